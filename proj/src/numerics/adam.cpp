#include "numerics/adam.hpp"

#include <cmath>
#include <string>

#include "common/error.hpp"

namespace hsie::nn {

void adam_step(std::span<float> params, std::span<const float> grads, AdamState& state, double lr) {
    require(lr > 0, "adam_step: learning rate must be positive");
    require(params.size() == grads.size(), "adam_step: parameter and gradient lengths differ");
    if (state.m.size() != params.size() || state.v.size() != params.size()) {
        require(state.step == 0 && state.m.empty() && state.v.empty(),
                "adam_step: optimizer state does not match parameter count");
        state.reset(params.size());
    }
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (!std::isfinite(grads[i]))
            throw NumericError("adam_step: non-finite gradient at parameter index " + std::to_string(i));
    }

    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(state.beta1, t);
    const double c2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        const double m = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
        const double v = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
        state.m[i] = static_cast<float>(m);
        state.v[i] = static_cast<float>(v);
        const double mhat = m / c1;
        const double vhat = v / c2;
        params[i] = static_cast<float>(params[i] - lr * mhat / (std::sqrt(vhat) + state.eps));
    }
}

}  // namespace hsie::nn
