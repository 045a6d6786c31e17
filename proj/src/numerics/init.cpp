#include "numerics/init.hpp"

#include <cmath>

namespace hsie::nn {

template <typename T>
void kaiming_normal(Tensor<T>& weight, Rng& rng) {
    require(weight.rank() >= 2, "kaiming_normal: weight must have rank >= 2");
    const std::size_t fan_in = weight.size() / static_cast<std::size_t>(weight.dim(0));
    require(fan_in > 0, "kaiming_normal: zero fan-in");
    const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (auto& w : weight.vec()) w = static_cast<T>(rng.normal(0.0, stddev));
}

template void kaiming_normal(Tensor<float>&, Rng&);
template void kaiming_normal(Tensor<double>&, Rng&);

}  // namespace hsie::nn
