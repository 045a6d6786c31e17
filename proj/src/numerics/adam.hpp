#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace hsie::nn {

struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::int64_t step = 0;
    std::vector<float> m;
    std::vector<float> v;

    void reset(std::size_t n) {
        step = 0;
        m.assign(n, 0.0f);
        v.assign(n, 0.0f);
    }
};

/// One bias-corrected Adam update over a flat parameter vector. Throws
/// NumericError if any gradient is non-finite; parameters are untouched then.
void adam_step(std::span<float> params, std::span<const float> grads, AdamState& state, double lr);

}  // namespace hsie::nn
