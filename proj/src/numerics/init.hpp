#pragma once

#include "common/rng.hpp"
#include "numerics/tensor.hpp"

namespace hsie::nn {

/// Fills weight with Normal(0, 2 / fan_in), fan_in = product of all extents after
/// the first (in_ch * kh * kw for conv2d, k for the [1,1,k] conv1d).
template <typename T>
void kaiming_normal(Tensor<T>& weight, Rng& rng);

}  // namespace hsie::nn
