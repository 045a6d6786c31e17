#pragma once

#include <utility>
#include <vector>

#include "pyramid/kernel.hpp"

namespace hsie::nn {

/// Sparse linear map from a length-in_len signal to a length-out_len signal,
/// applied separably along rows and columns. Its transpose is the backward pass.
struct LinearMap1D {
    int in_len = 0;
    int out_len = 0;
    std::vector<std::vector<std::pair<int, double>>> rows;  // per output: (input index, weight)
};

/// Mirror-without-repeat index folding (…, 2, 1, 0, 1, 2, …, n-2, n-1, n-2, …).
int reflect101(int i, int n);

/// Factor-2 bilinear upsampling, half-pixel centres, edge samples clamped.
LinearMap1D bilinear_up2_map(int n);

/// Zero insertion to 2n samples followed by convolution with 2*taps (4*kernel in 2D),
/// mirror boundary on the zero-inserted grid.
LinearMap1D expand_map(int n, const pyramid::GaussianKernel& kernel);

/// Mirror-boundary blur followed by keeping even-index samples; n must be even.
LinearMap1D blur_down_map(int n, const pyramid::GaussianKernel& kernel);

}  // namespace hsie::nn
