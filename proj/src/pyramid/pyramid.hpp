#pragma once

#include "numerics/tensor.hpp"
#include "pyramid/kernel.hpp"

namespace hsie {
class HsiCube;
}

namespace hsie::pyramid {

/// Single-level Laplacian decomposition of a [C,H,W] stack:
/// high is [C,H,W], low is [C,H/2,W/2], and high + expand(low) reproduces the input.
template <typename T>
struct PyramidPair {
    nn::Tensor<T> high;
    nn::Tensor<T> low;
};

/// Mirror-boundary blur followed by keeping even samples. H and W must be even.
template <typename T>
nn::Tensor<T> blur_downsample(const nn::Tensor<T>& x, const GaussianKernel& kernel = GaussianKernel::binomial());

/// Zero insertion to double size, then convolution with 4x the 2D kernel.
template <typename T>
nn::Tensor<T> expand(const nn::Tensor<T>& low, const GaussianKernel& kernel = GaussianKernel::binomial());

template <typename T>
PyramidPair<T> decompose(const nn::Tensor<T>& x, const GaussianKernel& kernel = GaussianKernel::binomial());

template <typename T>
nn::Tensor<T> reconstruct(const PyramidPair<T>& pair, const GaussianKernel& kernel = GaussianKernel::binomial());

/// Per-band decomposition of a cube, parallel over bands.
struct CubePyramid {
    nn::Tensor<float> high;  // [B,H,W]
    nn::Tensor<float> low;   // [B,H/2,W/2]
};
CubePyramid decompose_cube(const HsiCube& cube, const GaussianKernel& kernel = GaussianKernel::binomial());

/// Mean of the band's high-frequency map [1,H,W] and the k adjacent maps [k,H,W].
template <typename T>
nn::Tensor<T> mean_high_frequency(const nn::Tensor<T>& band_high, const nn::Tensor<T>& adjacent_high);

}  // namespace hsie::pyramid
