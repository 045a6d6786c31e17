#pragma once

#include <array>
#include <cmath>
#include <string>

namespace hsie::pyramid {

/// Separable 5-tap blur kernel shared by decomposition and expansion.
struct GaussianKernel {
    std::array<double, 5> taps{1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};

    static GaussianKernel binomial() { return {}; }

    double sum() const { return taps[0] + taps[1] + taps[2] + taps[3] + taps[4]; }
    bool symmetric() const { return taps[0] == taps[4] && taps[1] == taps[3]; }
    // Phases of the zero-inserted expansion: even outputs see taps 0,2,4; odd see 1,3.
    double even_phase_sum() const { return taps[0] + taps[2] + taps[4]; }
    double odd_phase_sum() const { return taps[1] + taps[3]; }

    /// Empty string when the kernel satisfies every invariant, else a description.
    std::string check(double tol = 1e-12) const {
        if (std::abs(sum() - 1.0) > tol) return "taps sum to " + std::to_string(sum()) + ", expected 1";
        if (!symmetric()) return "taps are not symmetric";
        if (std::abs(even_phase_sum() - 0.5) > tol || std::abs(odd_phase_sum() - 0.5) > tol)
            return "per-phase tap sums differ from 1/2";
        return {};
    }
};

}  // namespace hsie::pyramid
