#pragma once

#include <vector>

#include "numerics/autograd.hpp"
#include "numerics/resample.hpp"

namespace hsie::nn {

// Differentiable operations used by the network. Every op validates shapes and
// throws ValidationError rather than broadcasting; the single exception is
// mul_channel, which scales each channel of a [C,H,W] map by a [C] vector.

/// Stride-1 cross-correlation with zero "same" padding.
/// x: [C_in,H,W], weight: [C_out,C_in,kh,kw] with odd kh, kw, bias: [C_out] or null.
template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias);

/// Same-length 1D cross-correlation. x: [L], weight: [1,1,k] with odd k, bias: [1] or null.
template <typename T>
Var<T> conv1d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias);

/// [C,H,W] -> [C] spatial mean.
template <typename T>
Var<T> global_avg_pool(const Var<T>& x);

template <typename T>
Var<T> relu(const Var<T>& x);

template <typename T>
Var<T> sigmoid(const Var<T>& x);

/// Channel-axis concatenation of [C_i,H,W] parts in argument order.
template <typename T>
Var<T> concat(const std::vector<Var<T>>& parts);

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b);

/// Elementwise product of equal shapes.
template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b);

/// x: [C,H,W] scaled per channel by w: [C].
template <typename T>
Var<T> mul_channel(const Var<T>& x, const Var<T>& w);

template <typename T>
Var<T> add_scalar(const Var<T>& x, T c);

/// Applies a separable linear map (rows along H, cols along W) to every channel.
template <typename T>
Var<T> resample2d(const Var<T>& x, const LinearMap1D& rows, const LinearMap1D& cols);

/// [C,H,W] -> [C,2H,2W] bilinear, half-pixel convention.
template <typename T>
Var<T> bilinear_upsample_x2(const Var<T>& x);

/// [C,H,W] -> [C,2H,2W] pyramid expansion (zero insertion, then 4x kernel convolution).
template <typename T>
Var<T> laplacian_upscale(const Var<T>& x, const pyramid::GaussianKernel& kernel = pyramid::GaussianKernel::binomial());

/// Mean absolute error; subgradient at zero difference is 0.
template <typename T>
Var<T> l1_loss(const Var<T>& pred, const Var<T>& target);

/// Mean squared error.
template <typename T>
Var<T> l2_loss(const Var<T>& pred, const Var<T>& target);

// Plain (non-recording) helpers shared with the pyramid module.
template <typename T>
Tensor<T> apply_resample(const Tensor<T>& x, const LinearMap1D& rows, const LinearMap1D& cols);

}  // namespace hsie::nn
