#include "model/hsie_net.hpp"

#include "common/rng.hpp"
#include "numerics/init.hpp"
#include "numerics/ops.hpp"
#include "pyramid/pyramid.hpp"

namespace hsie::model {

using nn::Tensor;
using nn::Var;

template <typename T>
HsieParams<T> HsieParams<T>::zeros(const HsieConfig& cfg) {
    HsieParams<T> p;
    p.layout = make_layout(cfg);
    for (const auto& l : p.layout.layers) {
        p.weights.emplace_back(l.weight_shape());
        p.biases.push_back(l.has_bias ? Tensor<T>({l.out}) : Tensor<T>());
    }
    return p;
}

template <typename T>
std::vector<T> HsieParams<T>::flatten() const {
    std::vector<T> flat;
    flat.reserve(param_count());
    for (std::size_t i = 0; i < weights.size(); ++i) {
        flat.insert(flat.end(), weights[i].vec().begin(), weights[i].vec().end());
        flat.insert(flat.end(), biases[i].vec().begin(), biases[i].vec().end());
    }
    return flat;
}

template <typename T>
void HsieParams<T>::unflatten(std::span<const T> flat) {
    require(flat.size() == param_count(), "unflatten: expected " + std::to_string(param_count()) +
                                              " values, got " + std::to_string(flat.size()));
    std::size_t off = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        for (auto* t : {&weights[i], &biases[i]}) {
            std::copy(flat.begin() + static_cast<std::ptrdiff_t>(off),
                      flat.begin() + static_cast<std::ptrdiff_t>(off + t->size()), t->data());
            off += t->size();
        }
    }
}

template <typename T>
template <typename U>
HsieParams<U> HsieParams<T>::cast() const {
    HsieParams<U> out;
    out.layout = layout;
    for (const auto& w : weights) out.weights.push_back(w.template cast<U>());
    for (const auto& b : biases) out.biases.push_back(b.template cast<U>());
    return out;
}

HsieParams<float> init_model(const HsieConfig& cfg, std::uint64_t seed) {
    auto p = HsieParams<float>::zeros(cfg);
    for (std::size_t i = 0; i < p.weights.size(); ++i) {
        Rng rng = Rng::stream(seed, 0x1A7E5ULL + i);
        nn::kaiming_normal(p.weights[i], rng);
    }
    return p;
}

template <typename T>
LayerVars<T> LayerVars<T>::from(const HsieParams<T>& params, bool track) {
    LayerVars<T> v;
    for (std::size_t i = 0; i < params.weights.size(); ++i) {
        v.weight.push_back(nn::leaf(params.weights[i], track));
        v.bias.push_back(params.biases[i].empty() ? nullptr : nn::leaf(params.biases[i], track));
    }
    return v;
}

template <typename T>
std::vector<T> LayerVars<T>::flat_grad(const Layout& layout) const {
    std::vector<T> flat;
    flat.reserve(layout.param_count());
    auto append = [&](const Var<T>& var, std::size_t n) {
        if (var && !var->grad.empty())
            flat.insert(flat.end(), var->grad.vec().begin(), var->grad.vec().end());
        else
            flat.insert(flat.end(), n, T(0));
    };
    for (std::size_t i = 0; i < layout.layers.size(); ++i) {
        const auto& l = layout.layers[i];
        append(weight[i], l.weight_count());
        if (l.has_bias) append(bias[i], static_cast<std::size_t>(l.out));
    }
    return flat;
}

namespace {

template <typename T>
Var<T> conv(const Var<T>& x, const LayerVars<T>& vars, int layer) {
    return nn::conv2d(x, vars.weight[static_cast<std::size_t>(layer)], vars.bias[static_cast<std::size_t>(layer)]);
}

}  // namespace

template <typename T>
Var<T> sfe_forward(const Var<T>& band_low, const Var<T>& adjacent_low, const Layout& layout, const LayerVars<T>& vars,
                   ForwardTrace<T>* trace) {
    if (band_low->value.rank() != 3 || band_low->value.channels() != 1)
        throw ValidationError("sfe: band input must be [1,h,w], got " + nn::shape_str(band_low->value.shape()));
    if (adjacent_low->value.rank() != 3 || adjacent_low->value.channels() != layout.config.k)
        throw ValidationError("sfe: adjacent input must have k=" + std::to_string(layout.config.k) +
                              " channels, got " + nn::shape_str(adjacent_low->value.shape()));
    const auto& ix = layout.index;
    std::vector<Var<T>> parts;
    for (int layer : ix.sfe_band) parts.push_back(conv(band_low, vars, layer));
    for (int layer : ix.sfe_adjacent) parts.push_back(conv(adjacent_low, vars, layer));
    Var<T> shallow = nn::relu(nn::concat(parts));
    Var<T> f0 = nn::relu(conv(shallow, vars, ix.sfe_merge));
    if (trace) {
        trace->shallow = shallow->value;
        trace->shallow_features = f0->value;
    }
    return f0;
}

template <typename T>
Var<T> cab_forward(const Var<T>& input, int block, const Layout& layout, const LayerVars<T>& vars,
                   ForwardTrace<T>* trace) {
    if (input->value.rank() != 3 || input->value.channels() != layout.config.feat)
        throw ValidationError("cab: input must have feat=" + std::to_string(layout.config.feat) + " channels, got " +
                              nn::shape_str(input->value.shape()));
    const auto& cab = layout.index.cabs.at(static_cast<std::size_t>(block));
    std::vector<Var<T>> features{input};
    for (int layer : cab.dense) features.push_back(nn::relu(conv(nn::concat(features), vars, layer)));
    Var<T> dense = nn::concat(features);
    Var<T> fused = conv(dense, vars, cab.transition);
    Var<T> pooled = nn::global_avg_pool(fused);
    Var<T> attention = nn::sigmoid(nn::conv1d(pooled, vars.weight[static_cast<std::size_t>(cab.eca)],
                                              vars.bias[static_cast<std::size_t>(cab.eca)]));
    Var<T> out = nn::add(nn::mul_channel(fused, attention), input);
    if (trace) {
        trace->dense_widths.push_back(dense->value.channels());
        trace->attention.push_back(attention->value);
    }
    return out;
}

template <typename T>
Var<T> enlighten_forward(const Var<T>& shallow, const Layout& layout, const LayerVars<T>& vars,
                         ForwardTrace<T>* trace) {
    std::vector<Var<T>> levels{shallow};
    for (int n = 0; n < layout.config.n_cab; ++n) {
        levels.push_back(cab_forward(levels.back(), n, layout, vars, trace));
        if (trace) trace->cab_outputs.push_back(levels.back()->value);
    }
    Var<T> stacked = nn::concat(levels);
    Var<T> fused = conv(stacked, vars, layout.index.fusion);
    if (trace) {
        trace->fusion_width = stacked->value.channels();
        trace->fused = fused->value;
    }
    return fused;
}

template <typename T>
Var<T> reconstruct_low(const Var<T>& fused, const Var<T>& band_low, const Layout& layout, const LayerVars<T>& vars,
                       ForwardTrace<T>* trace) {
    Var<T> residual = conv(fused, vars, layout.index.recon);
    Var<T> restored = nn::add(residual, band_low);
    if (trace) {
        trace->residual = residual->value;
        trace->low_restored = restored->value;
    }
    return restored;
}

template <typename T>
Refined<T> refine_high(const Var<T>& mean_high, const Var<T>& band_low, const Var<T>& low_restored,
                       const Layout& layout, const LayerVars<T>& vars) {
    const auto& mh = mean_high->value;
    if (mh.rank() != 3 || mh.channels() != 1)
        throw ValidationError("refine: mean high-frequency map must be [1,h,w], got " + nn::shape_str(mh.shape()));
    for (const auto* t : {&band_low->value, &low_restored->value}) {
        if (t->rank() != 3 || t->channels() != 1 || 2 * t->height() != mh.height() || 2 * t->width() != mh.width())
            throw ValidationError("refine: low-frequency map " + nn::shape_str(t->shape()) +
                                  " is not half the size of " + nn::shape_str(mh.shape()));
    }
    const auto& ix = layout.index;
    Var<T> x = nn::concat<T>({mean_high, nn::bilinear_upsample_x2(band_low), nn::bilinear_upsample_x2(low_restored)});
    x = conv(x, vars, ix.refine_head);
    for (const auto& block : ix.refine_blocks) {
        Var<T> y = nn::relu(conv(x, vars, block[0]));
        y = conv(y, vars, block[1]);
        x = nn::add(x, y);
    }
    Var<T> raw = conv(x, vars, ix.refine_tail);
    Var<T> mask = nn::add_scalar(raw, T(1));
    return {mask, nn::mul(mean_high, mask)};
}

template <typename T>
Var<T> hsie_forward(const Tensor<T>& band, const Tensor<T>& adjacent, const Layout& layout, const LayerVars<T>& vars,
                    ForwardTrace<T>* trace) {
    if (band.rank() != 3 || band.channels() != 1)
        throw ValidationError("hsie_forward: band must be [1,h,w], got " + nn::shape_str(band.shape()));
    if (adjacent.rank() != 3 || adjacent.channels() != layout.config.k)
        throw ValidationError("hsie_forward: expected k=" + std::to_string(layout.config.k) +
                              " adjacent bands, got " + nn::shape_str(adjacent.shape()));
    if (adjacent.height() != band.height() || adjacent.width() != band.width())
        throw ValidationError("hsie_forward: adjacent bands " + nn::shape_str(adjacent.shape()) +
                              " do not match band " + nn::shape_str(band.shape()));
    require(band.height() % 2 == 0 && band.width() % 2 == 0,
            "hsie_forward: spatial dimensions must be even, got " + std::to_string(band.height()) + "x" +
                std::to_string(band.width()));

    auto band_pyr = pyramid::decompose(band);
    auto adj_pyr = pyramid::decompose(adjacent);
    Tensor<T> mean_high = pyramid::mean_high_frequency(band_pyr.high, adj_pyr.high);
    if (trace) {
        trace->band_low = band_pyr.low;
        trace->adjacent_low = adj_pyr.low;
        trace->band_high = band_pyr.high;
        trace->adjacent_high = adj_pyr.high;
        trace->mean_high = mean_high;
    }

    Var<T> band_low = nn::leaf(std::move(band_pyr.low));
    Var<T> adjacent_low = nn::leaf(std::move(adj_pyr.low));
    Var<T> mean = nn::leaf(std::move(mean_high));

    Var<T> shallow = sfe_forward(band_low, adjacent_low, layout, vars, trace);
    Var<T> fused = enlighten_forward(shallow, layout, vars, trace);
    Var<T> low_restored = reconstruct_low(fused, band_low, layout, vars, trace);
    Refined<T> refined = refine_high(mean, band_low, low_restored, layout, vars);
    Var<T> merged = nn::add(refined.high, nn::laplacian_upscale(low_restored));
    Var<T> out = conv(merged, vars, layout.index.final_conv);
    if (trace) {
        trace->mask = refined.mask->value;
        trace->high_restored = refined.high->value;
        trace->output = out->value;
    }
    return out;
}

#define HSIE_INSTANTIATE_NET(T)                                                                                   \
    template struct HsieParams<T>;                                                                                \
    template struct LayerVars<T>;                                                                                 \
    template Var<T> sfe_forward(const Var<T>&, const Var<T>&, const Layout&, const LayerVars<T>&, ForwardTrace<T>*); \
    template Var<T> cab_forward(const Var<T>&, int, const Layout&, const LayerVars<T>&, ForwardTrace<T>*);          \
    template Var<T> enlighten_forward(const Var<T>&, const Layout&, const LayerVars<T>&, ForwardTrace<T>*);        \
    template Var<T> reconstruct_low(const Var<T>&, const Var<T>&, const Layout&, const LayerVars<T>&,              \
                                    ForwardTrace<T>*);                                                             \
    template Refined<T> refine_high(const Var<T>&, const Var<T>&, const Var<T>&, const Layout&, const LayerVars<T>&); \
    template Var<T> hsie_forward(const Tensor<T>&, const Tensor<T>&, const Layout&, const LayerVars<T>&,           \
                                 ForwardTrace<T>*);

HSIE_INSTANTIATE_NET(float)
HSIE_INSTANTIATE_NET(double)

template HsieParams<double> HsieParams<float>::cast<double>() const;
template HsieParams<float> HsieParams<double>::cast<float>() const;

}  // namespace hsie::model
