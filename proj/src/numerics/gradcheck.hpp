#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "common/rng.hpp"
#include "numerics/autograd.hpp"

namespace hsie::nn {

struct GradCheckResult {
    double max_rel_error = 0;
    std::size_t worst_input = 0;
    std::size_t worst_index = 0;
    std::size_t checked = 0;
};

/// Function under test: maps leaf variables to an output of any shape.
using GradOp = std::function<Var<double>(const std::vector<Var<double>>&)>;

/// Compares reverse-mode gradients of <r, op(inputs)> against central differences,
/// where r is a fixed pseudo-random projection. Relative error per element is
/// |analytic - numeric| / max(floor, |analytic|, |numeric|); the floor keeps
/// flat regions (e.g. saturated sigmoid) from reporting round-off as error.
/// Inputs listed in `frozen` are held constant and not checked.
inline GradCheckResult grad_check(const GradOp& op, const std::vector<Tensor<double>>& inputs, double h = 1e-6,
                                  std::uint64_t seed = 7, double floor = 1e-3,
                                  const std::vector<bool>& frozen = {}) {
    auto is_frozen = [&](std::size_t i) { return i < frozen.size() && frozen[i]; };

    auto build = [&](const std::vector<Tensor<double>>& vals, bool track) {
        std::vector<Var<double>> leaves;
        leaves.reserve(vals.size());
        for (std::size_t i = 0; i < vals.size(); ++i) leaves.push_back(leaf(vals[i], track && !is_frozen(i)));
        return leaves;
    };

    auto leaves = build(inputs, true);
    Var<double> out = op(leaves);
    require(out != nullptr, "grad_check: op returned null");
    if (!out->requires_grad || !out->backward)
        throw ValidationError("grad_check: op has no registered backward for the tracked inputs");

    Rng rng(seed);
    Tensor<double> proj(out->value.shape());
    for (std::size_t i = 0; i < proj.size(); ++i) proj[i] = rng.uniform(-1.0, 1.0);

    auto project = [&](const Tensor<double>& v) {
        long double acc = 0;
        for (std::size_t i = 0; i < v.size(); ++i) acc += static_cast<long double>(proj[i]) * v[i];
        return static_cast<double>(acc);
    };

    backward(out, &proj);

    GradCheckResult result;
    std::vector<Tensor<double>> probe = inputs;
    for (std::size_t a = 0; a < inputs.size(); ++a) {
        if (is_frozen(a)) continue;
        const Tensor<double>& analytic = leaves[a]->grad;
        for (std::size_t i = 0; i < inputs[a].size(); ++i) {
            const double x0 = inputs[a][i];
            probe[a][i] = x0 + h;
            const double fp = project(op(build(probe, false))->value);
            probe[a][i] = x0 - h;
            const double fm = project(op(build(probe, false))->value);
            probe[a][i] = x0;
            const double numeric = (fp - fm) / (2 * h);
            const double an = analytic.empty() ? 0.0 : analytic[i];
            const double denom = std::max({floor, std::abs(an), std::abs(numeric)});
            const double rel = std::abs(an - numeric) / denom;
            ++result.checked;
            if (rel > result.max_rel_error) {
                result.max_rel_error = rel;
                result.worst_input = a;
                result.worst_index = i;
            }
        }
    }
    return result;
}

}  // namespace hsie::nn
