#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "model/layout.hpp"
#include "numerics/autograd.hpp"

namespace hsie::model {

/// All learnable tensors, parallel to Layout::layers. Layers without bias keep an empty tensor.
template <typename T>
struct HsieParams {
    Layout layout;
    std::vector<nn::Tensor<T>> weights;
    std::vector<nn::Tensor<T>> biases;

    /// All weights and biases zero.
    static HsieParams zeros(const HsieConfig& cfg);

    const HsieConfig& config() const { return layout.config; }
    std::size_t param_count() const { return layout.param_count(); }

    /// Flat vector in layout order: layer 0 weight, layer 0 bias, layer 1 weight, ...
    std::vector<T> flatten() const;
    void unflatten(std::span<const T> flat);

    template <typename U>
    HsieParams<U> cast() const;
};

/// Kaiming-normal weights (per-layer random stream derived from seed), zero biases.
HsieParams<float> init_model(const HsieConfig& cfg, std::uint64_t seed);

/// Graph leaves for one forward pass.
template <typename T>
struct LayerVars {
    std::vector<nn::Var<T>> weight;
    std::vector<nn::Var<T>> bias;  // null where the layer has no bias

    static LayerVars from(const HsieParams<T>& params, bool track);
    /// Gradients in flatten() order; zeros for untouched leaves.
    std::vector<T> flat_grad(const Layout& layout) const;
};

/// Named intermediates of one forward pass.
template <typename T>
struct ForwardTrace {
    nn::Tensor<T> band_low, adjacent_low, band_high, adjacent_high, mean_high;  // I_L, C_L, I_H, C_H, I_Mean
    nn::Tensor<T> shallow, shallow_features;                                   // F_S, F_0
    std::vector<nn::Tensor<T>> cab_outputs;                                    // F_1..F_N
    std::vector<nn::Tensor<T>> attention;                                      // W_A per block
    std::vector<int> dense_widths;                                             // transition input width per block
    int fusion_width = 0;
    nn::Tensor<T> fused, residual, low_restored;                               // F_D, I_R, enhanced I_L
    nn::Tensor<T> mask, high_restored, output;                                 // I_Mask, refined I_H, I_E
};

// Network stages. `vars` holds leaves for every layer of `layout`.

template <typename T>
nn::Var<T> sfe_forward(const nn::Var<T>& band_low, const nn::Var<T>& adjacent_low, const Layout& layout,
                       const LayerVars<T>& vars, ForwardTrace<T>* trace = nullptr);

template <typename T>
nn::Var<T> cab_forward(const nn::Var<T>& input, int block, const Layout& layout, const LayerVars<T>& vars,
                       ForwardTrace<T>* trace = nullptr);

template <typename T>
nn::Var<T> enlighten_forward(const nn::Var<T>& shallow, const Layout& layout, const LayerVars<T>& vars,
                             ForwardTrace<T>* trace = nullptr);

template <typename T>
nn::Var<T> reconstruct_low(const nn::Var<T>& fused, const nn::Var<T>& band_low, const Layout& layout,
                           const LayerVars<T>& vars, ForwardTrace<T>* trace = nullptr);

template <typename T>
struct Refined {
    nn::Var<T> mask;
    nn::Var<T> high;
};

template <typename T>
Refined<T> refine_high(const nn::Var<T>& mean_high, const nn::Var<T>& band_low, const nn::Var<T>& low_restored,
                       const Layout& layout, const LayerVars<T>& vars);

/// Full network: band [1,h,w] plus adjacent bands [k,h,w] -> enhanced band [1,h,w].
/// Pyramid decomposition of the inputs is constant preprocessing; gradients flow
/// only into parameters.
template <typename T>
nn::Var<T> hsie_forward(const nn::Tensor<T>& band, const nn::Tensor<T>& adjacent, const Layout& layout,
                        const LayerVars<T>& vars, ForwardTrace<T>* trace = nullptr);

}  // namespace hsie::model
