#pragma once

#include <functional>
#include <string>
#include <vector>

#include "model/layout.hpp"
#include "numerics/gradcheck.hpp"

namespace hsie::verify {

/// Outcome of one self-check suite. `max_error` is the largest observed deviation
/// and `tolerance` the bound it was held to.
struct SuiteResult {
    std::string name;
    bool passed = false;
    double max_error = 0;
    double tolerance = 0;
    std::string detail;  // first failing check, or a summary
    double seconds = 0;
};

struct Options {
    bool corrupt_kernel = false;  // test hook: perturb one blur tap before the pyramid suite
};

SuiteResult gradient_suite();
SuiteResult pyramid_suite(const Options& opts = {});
SuiteResult metrics_suite();

/// Runs gradient, pyramid and metrics suites in that order, reporting each as it finishes.
std::vector<SuiteResult> run_all(const Options& opts = {},
                                 const std::function<void(const SuiteResult&)>& sink = {});

/// One named op-level gradient check.
struct OpCheck {
    std::string op;
    nn::GradCheckResult result;
};
std::vector<OpCheck> op_gradient_checks();

/// Finite-difference check of every parameter of a small network, through an L2 loss
/// against a random target. Spatial size h x w must be even.
nn::GradCheckResult model_gradient_check(const model::HsieConfig& cfg, int height, int width, std::uint64_t seed);

/// Toy network used by the end-to-end check: k=4, feat=6.
model::HsieConfig toy_config();

constexpr double kOpTolerance = 1e-4;
constexpr double kModelTolerance = 1e-3;

}  // namespace hsie::verify
