#include "training/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace hsie::training {

namespace {

class Writer {
public:
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        out_.insert(out_.end(), b, b + n);
    }
    template <typename U>
    void le(U v) {
        using Bits = std::conditional_t<sizeof(U) == 8, std::uint64_t,
                                        std::conditional_t<sizeof(U) == 4, std::uint32_t, std::uint8_t>>;
        Bits bits = std::bit_cast<Bits>(v);
        for (std::size_t i = 0; i < sizeof(U); ++i) out_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& in) : in_(in) {}
    void need(std::size_t n, const char* what) {
        if (pos_ + n > in_.size())
            throw IoError(std::string("corrupt checkpoint: truncated while reading ") + what + " (offset " +
                          std::to_string(pos_) + ", file size " + std::to_string(in_.size()) + ")");
    }
    template <typename U>
    U le(const char* what) {
        using Bits = std::conditional_t<sizeof(U) == 8, std::uint64_t,
                                        std::conditional_t<sizeof(U) == 4, std::uint32_t, std::uint8_t>>;
        need(sizeof(U), what);
        Bits bits = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<Bits>(static_cast<Bits>(in_[pos_ + i]) << (8 * i));
        pos_ += sizeof(U);
        return std::bit_cast<U>(bits);
    }
    void floats(std::span<float> dst, const char* what) {
        need(dst.size() * 4, what);
        for (auto& v : dst) v = le<float>(what);
    }
    std::size_t pos() const { return pos_; }
    void skip(std::size_t n) { pos_ += n; }

private:
    const std::vector<std::uint8_t>& in_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string describe_mismatch(const model::Layout& stored, const model::Layout& expected) {
    const std::size_t n = std::max(stored.layers.size(), expected.layers.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (i >= stored.layers.size())
            return "layer '" + expected.layers[i].name + "' is missing from the checkpoint";
        if (i >= expected.layers.size())
            return "checkpoint has extra layer '" + stored.layers[i].name + "'";
        const auto& a = stored.layers[i];
        const auto& b = expected.layers[i];
        if (a.name != b.name)
            return "layer " + std::to_string(i) + " is '" + a.name + "' in the checkpoint but '" + b.name + "' expected";
        if (a.weight_shape() != b.weight_shape() || a.has_bias != b.has_bias)
            return "layer '" + a.name + "' shape mismatch: checkpoint " + nn::shape_str(a.weight_shape()) +
                   ", expected " + nn::shape_str(b.weight_shape());
    }
    return {};
}

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt) {
    const auto& cfg = ckpt.params.config();
    Writer w;
    w.bytes(kCheckpointMagic, sizeof(kCheckpointMagic));
    w.le<std::uint32_t>(kCheckpointVersion);
    for (int v : {cfg.k, cfg.feat, cfg.n_cab, cfg.n_dense, cfg.eca_kernel, cfg.mask_channels, cfg.growth})
        w.le<std::int32_t>(v);
    w.le<std::uint32_t>(ckpt.epoch);
    const auto flat = ckpt.params.flatten();
    w.le<std::uint64_t>(flat.size());
    for (float v : flat) w.le<float>(v);
    w.le<std::uint8_t>(ckpt.optimizer ? 1 : 0);
    if (ckpt.optimizer) {
        const auto& s = *ckpt.optimizer;
        require(s.m.size() == flat.size() && s.v.size() == flat.size(),
                "checkpoint: optimizer state does not match parameter count");
        w.le<std::int64_t>(s.step);
        w.le<double>(s.beta1);
        w.le<double>(s.beta2);
        w.le<double>(s.eps);
        for (float v : s.m) w.le<float>(v);
        for (float v : s.v) w.le<float>(v);
    }
    return w.take();
}

Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes, const model::HsieConfig* expected) {
    Reader r(bytes);
    r.need(sizeof(kCheckpointMagic), "magic");
    if (std::memcmp(bytes.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0)
        throw IoError("corrupt checkpoint: bad magic tag");
    r.skip(sizeof(kCheckpointMagic));
    const auto version = r.le<std::uint32_t>("version");
    if (version != kCheckpointVersion)
        throw IoError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kCheckpointVersion) + ")");

    model::HsieConfig cfg;
    for (int* field : {&cfg.k, &cfg.feat, &cfg.n_cab, &cfg.n_dense, &cfg.eca_kernel, &cfg.mask_channels, &cfg.growth})
        *field = r.le<std::int32_t>("config");
    try {
        cfg.validate();
    } catch (const ValidationError& e) {
        throw IoError(std::string("corrupt checkpoint: ") + e.what());
    }

    Checkpoint ckpt;
    ckpt.params = model::HsieParams<float>::zeros(cfg);
    if (expected) {
        const auto msg = describe_mismatch(ckpt.params.layout, model::make_layout(*expected));
        if (!msg.empty()) throw ValidationError("incompatible checkpoint: " + msg);
    }
    ckpt.epoch = r.le<std::uint32_t>("epoch");
    const auto count = r.le<std::uint64_t>("parameter count");
    if (count != ckpt.params.param_count())
        throw IoError("corrupt checkpoint: payload holds " + std::to_string(count) + " parameters, config implies " +
                      std::to_string(ckpt.params.param_count()));
    std::vector<float> flat(count);
    r.floats(flat, "parameters");
    for (float v : flat)
        if (!std::isfinite(v)) throw IoError("corrupt checkpoint: non-finite parameter");
    ckpt.params.unflatten(flat);

    const auto has_opt = r.le<std::uint8_t>("optimizer flag");
    if (has_opt > 1) throw IoError("corrupt checkpoint: bad optimizer flag");
    if (has_opt) {
        nn::AdamState s;
        s.step = r.le<std::int64_t>("optimizer step");
        s.beta1 = r.le<double>("beta1");
        s.beta2 = r.le<double>("beta2");
        s.eps = r.le<double>("eps");
        s.m.resize(count);
        s.v.resize(count);
        r.floats(s.m, "first moments");
        r.floats(s.v, "second moments");
        ckpt.optimizer = std::move(s);
    }
    if (r.pos() != bytes.size())
        throw IoError("corrupt checkpoint: " + std::to_string(bytes.size() - r.pos()) + " trailing bytes");
    return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    const auto bytes = serialize_checkpoint(ckpt);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const model::HsieConfig* expected) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_checkpoint(bytes, expected);
}

}  // namespace hsie::training
