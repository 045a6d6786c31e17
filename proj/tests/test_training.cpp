#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "pyramid/pyramid.hpp"
#include "training/checkpoint.hpp"
#include "training/trainer.hpp"
#include "verify/verify.hpp"

using namespace hsie;
using namespace hsie::training;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "hsie_test_training";
    fs::create_directories(dir);
    return dir / name;
}

std::vector<std::uint8_t> slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

model::HsieConfig small_config(int k = 4) {
    auto c = verify::toy_config();
    c.k = k;
    return c;
}

std::vector<PatchSample> patches(int k, int count, std::uint64_t seed) {
    const HsiCube clean = synth_scene(32, 32, 8, seed);
    const HsiCube low = degrade(clean, DegradeConfig{0.3f, 0.0f, 0.01f, 0.0f, 0.0f, 0.0f, seed});
    auto all = extract_patches(low, clean, 16, k);
    all.resize(std::min<std::size_t>(all.size(), static_cast<std::size_t>(count)));
    return all;
}

struct EnvGuard {
    explicit EnvGuard(const char* value) { setenv("HSIE_THREADS", value, 1); }
    ~EnvGuard() { unsetenv("HSIE_THREADS"); }
};

}  // namespace

TEST_CASE("step schedule halves every lr_step_epochs") {
    TrainConfig cfg;
    CHECK(lr_at(0, cfg) == 2e-4);
    CHECK(lr_at(199, cfg) == 2e-4);
    CHECK(lr_at(200, cfg) == 1e-4);
    CHECK(lr_at(400, cfg) == 5e-5);
    CHECK(lr_at(599, cfg) == 5e-5);
    for (int e = 1; e < 600; ++e) CHECK(lr_at(e, cfg) <= lr_at(e - 1, cfg));
    CHECK_THROWS_AS(lr_at(-1, cfg), ValidationError);

    TrainConfig bad;
    bad.batch_size = 0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = {};
    bad.lr0 = 0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("overfits a single sample") {
    const auto data = patches(4, 1, 5);
    TrainConfig cfg;
    cfg.lr0 = 2e-3;
    cfg.epochs = 400;
    cfg.lr_step_epochs = 400;
    cfg.batch_size = 1;
    auto result = train(data, cfg, small_config());
    REQUIRE(result.log.steps.size() == 400u);
    const double first = result.log.steps.front().loss, last = result.log.steps.back().loss;
    INFO("first " << first << " last " << last);
    CHECK(last <= 0.1 * first);
}

TEST_CASE("L1 and L2 objectives both decrease") {
    const auto data = patches(4, 4, 6);
    for (LossKind kind : {LossKind::L1, LossKind::L2}) {
        TrainConfig cfg;
        cfg.lr0 = 2e-3;
        cfg.epochs = 60;
        cfg.batch_size = 4;
        cfg.loss = kind;
        auto result = train(data, cfg, small_config());
        CHECK(result.log.steps.back().loss < 0.5 * result.log.steps.front().loss);
    }
}

TEST_CASE("training is reproducible and independent of the worker count") {
    const auto data = patches(4, 6, 7);
    TrainConfig cfg;
    cfg.lr0 = 1e-3;
    cfg.epochs = 3;
    cfg.batch_size = 4;
    cfg.seed = 11;
    TrainResult a, b, c;
    {
        EnvGuard env("1");
        a = train(data, cfg, small_config());
        b = train(data, cfg, small_config());
    }
    {
        EnvGuard env("4");
        c = train(data, cfg, small_config());
    }
    REQUIRE(a.log.steps.size() == c.log.steps.size());
    for (std::size_t i = 0; i < a.log.steps.size(); ++i) {
        CHECK(a.log.steps[i].loss == b.log.steps[i].loss);
        CHECK(a.log.steps[i].loss == c.log.steps[i].loss);
    }
    CHECK(a.params.flatten() == b.params.flatten());
    CHECK(a.params.flatten() == c.params.flatten());

    cfg.seed = 12;
    CHECK(train(data, cfg, small_config()).params.flatten() != a.params.flatten());
}

TEST_CASE("max_steps caps the run; validation metrics are logged") {
    const auto data = patches(4, 8, 8);
    TrainConfig cfg;
    cfg.epochs = 10;
    cfg.batch_size = 2;
    cfg.max_steps = 5;
    const HsiCube clean = synth_scene(16, 16, 6, 9);
    std::vector<ValidationPair> val{{degrade(clean, DegradeConfig{}), clean}};
    int calls = 0;
    auto result = train(data, cfg, small_config(), val, [&](const TrainLog::Step&) { ++calls; });
    CHECK(result.log.steps.size() == 5u);
    CHECK(calls == 5);
    REQUIRE(result.log.epochs.size() == 2u);
    for (const auto& e : result.log.epochs) {
        CHECK(std::isfinite(e.mpsnr));
        CHECK(e.mssim <= 1.0);
        CHECK(e.sam >= 0.0);
    }
    CHECK(result.log.steps_csv().rfind("step,loss,lr\n", 0) == 0);
    CHECK(result.log.epochs_csv().rfind("epoch,mpsnr,mssim,sam\n", 0) == 0);
}

TEST_CASE("training rejects mismatched data and reports non-finite losses") {
    auto data = patches(4, 2, 10);
    TrainConfig cfg;
    cfg.epochs = 1;
    CHECK_THROWS_AS(train(data, cfg, small_config(3)), ValidationError);
    CHECK_THROWS_AS(train({}, cfg, small_config()), ValidationError);

    data[1].label_patch[0] = NAN;
    cfg.batch_size = 1;
    const fs::path ck = scratch("nan.ckpt");
    fs::remove(ck);
    cfg.checkpoint_path = ck;
    bool threw = false;
    try {
        cfg.seed = 3;
        // Order is shuffled; with two samples, the poisoned one is hit within the epoch.
        train(data, cfg, small_config());
    } catch (const NumericError& e) {
        threw = true;
        CHECK(std::string(e.what()).find(ck.string()) != std::string::npos);
    }
    CHECK(threw);
    REQUIRE(fs::exists(ck));
    const auto loaded = load_checkpoint(ck);
    for (float v : loaded.params.flatten()) CHECK(std::isfinite(v));
}

TEST_CASE("inference over whole bands") {
    const HsiCube cube = synth_scene(24, 20, 6, 13);
    const auto params = model::init_model(small_config(), 2);
    const HsiCube out = enhance_cube(cube, params, 1);
    CHECK(out.height() == 24);
    CHECK(out.width() == 20);
    CHECK(out.bands() == 6);
    for (float v : out.values()) {
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
    }
    const auto band3 = enhance_band(cube, 3, params);
    CHECK(std::equal(band3.begin(), band3.end(), out.band(3).begin()));
    CHECK(enhance_cube(cube, params, 4) == out);
    CHECK_THROWS_AS(enhance_band(cube, 6, params), ValidationError);
    CHECK_THROWS_AS(enhance_cube(synth_scene(23, 20, 6, 1), params), ValidationError);

    // Zero network with a centred unit tap in the last conv: clamp(mean high + expand(low)).
    auto zero = model::HsieParams<float>::zeros(small_config());
    zero.weights[static_cast<std::size_t>(zero.layout.index.final_conv)][4] = 1.0f;
    const auto band = enhance_band(cube, 0, zero);
    const auto bp = pyramid::decompose(cube.band_tensor(0));
    const auto ap = pyramid::decompose(gather_bands(cube, adjacent_window(0, 6, 4)));
    const auto mean = pyramid::mean_high_frequency(bp.high, ap.high);
    const auto up = pyramid::expand(bp.low);
    for (std::size_t i = 0; i < band.size(); ++i) CHECK(band[i] == std::clamp(mean[i] + up[i], 0.0f, 1.0f));
}

TEST_CASE("checkpoint round trip and corruption handling") {
    const auto cfg = small_config();
    const auto params = model::init_model(cfg, 4);
    nn::AdamState opt;
    opt.reset(params.param_count());
    opt.step = 7;
    for (std::size_t i = 0; i < opt.m.size(); ++i) {
        opt.m[i] = 0.001f * static_cast<float>(i % 17);
        opt.v[i] = 0.002f * static_cast<float>(i % 13);
    }
    const Checkpoint ck{params, opt, 42};
    const fs::path p1 = scratch("a.ckpt"), p2 = scratch("b.ckpt");
    save_checkpoint(ck, p1);
    const auto loaded = load_checkpoint(p1, &cfg);
    CHECK(loaded.epoch == 42u);
    CHECK(loaded.params.flatten() == params.flatten());
    REQUIRE(loaded.optimizer.has_value());
    CHECK(loaded.optimizer->step == 7);
    CHECK(loaded.optimizer->m == opt.m);
    save_checkpoint(loaded, p2);
    CHECK(slurp(p1) == slurp(p2));

    const Checkpoint bare{params, std::nullopt, 0};
    CHECK_FALSE(deserialize_checkpoint(serialize_checkpoint(bare)).optimizer.has_value());

    auto bytes = serialize_checkpoint(ck);
    auto truncated = bytes;
    truncated.resize(bytes.size() / 2);
    try {
        deserialize_checkpoint(truncated);
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("corrupt") != std::string::npos);
    }
    auto tagged = bytes;
    tagged[0] = 'X';
    CHECK_THROWS_AS(deserialize_checkpoint(tagged), IoError);
    auto versioned = bytes;
    versioned[8] = 2;
    try {
        deserialize_checkpoint(versioned);
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("version 2") != std::string::npos);
    }
    auto trailing = bytes;
    trailing.push_back(0);
    CHECK_THROWS_AS(deserialize_checkpoint(trailing), IoError);

    auto other = cfg;
    other.mask_channels = 5;
    try {
        deserialize_checkpoint(bytes, &other);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("incompatible") != std::string::npos);
        CHECK(msg.find("refine") != std::string::npos);
    }
    CHECK_THROWS_AS(load_checkpoint(scratch("missing.ckpt")), IoError);
}
