#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "common/rng.hpp"
#include "hsidata/cube.hpp"

namespace hsie {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Sum of random plane waves with at most `max_freq` cycles across the image.
class WaveField {
public:
    WaveField(Rng& rng, int terms, double max_freq, double amplitude) {
        for (int j = 0; j < terms; ++j) {
            waves_.push_back({rng.uniform(-max_freq, max_freq), rng.uniform(-max_freq, max_freq),
                              rng.uniform(0.0, kTwoPi), amplitude * rng.uniform(0.5, 1.0) / terms});
        }
    }
    double operator()(double u, double v) const {  // u, v in [0,1)
        double acc = 0;
        for (const auto& w : waves_) acc += w.amp * std::cos(kTwoPi * (w.fu * u + w.fv * v) + w.phase);
        return acc;
    }

private:
    struct Wave {
        double fu, fv, phase, amp;
    };
    std::vector<Wave> waves_;
};

struct Signature {
    double base, slope;
    std::array<double, 2> centre, width, amp;
    double operator()(double t) const {
        double s = base + slope * (t - 0.5);
        for (std::size_t i = 0; i < 2; ++i) {
            const double d = (t - centre[i]) / width[i];
            s += amp[i] * std::exp(-0.5 * d * d);
        }
        return std::clamp(s, 0.05, 1.0);
    }
};

}  // namespace

HsiCube synth_scene(int height, int width, int bands, std::uint64_t seed) {
    require(height > 0 && width > 0 && height % 2 == 0 && width % 2 == 0,
            "synth_scene: height and width must be positive and even, got " + std::to_string(height) + "x" +
                std::to_string(width));
    require(bands >= 2, "synth_scene: need at least 2 bands");

    constexpr int kMaterials = 5;
    constexpr int kRegions = 7;
    Rng rng = Rng::stream(seed, 0x5CE4E);

    std::array<Signature, kMaterials> sigs{};
    for (auto& s : sigs) {
        s.base = rng.uniform(0.25, 0.7);
        s.slope = rng.uniform(-0.3, 0.3);
        for (std::size_t i = 0; i < 2; ++i) {
            s.centre[i] = rng.uniform(0.0, 1.0);
            s.width[i] = rng.uniform(0.08, 0.3);
            s.amp[i] = rng.uniform(-0.2, 0.25);
        }
    }

    // Piecewise part: Voronoi regions, each with its own material mixture.
    struct Region {
        double u, v;
        std::array<double, kMaterials> mix;
    };
    std::vector<Region> regions(kRegions);
    for (auto& r : regions) {
        r.u = rng.uniform();
        r.v = rng.uniform();
        double total = 0;
        for (auto& m : r.mix) {
            m = std::pow(rng.uniform(), 3.0) + 1e-3;  // skewed toward one dominant material
            total += m;
        }
        for (auto& m : r.mix) m /= total;
    }

    // Smooth part: per-material abundance modulation and a shared illumination-free texture.
    std::vector<WaveField> modulation;
    for (int m = 0; m < kMaterials; ++m) modulation.emplace_back(rng, 4, 2.0, 0.6);
    const WaveField shading(rng, 3, 1.5, 0.15);
    const WaveField texture(rng, 8, 12.0, 0.12);

    std::vector<std::array<double, kMaterials>> abundance(static_cast<std::size_t>(height) * width);
    std::vector<double> gain(abundance.size());
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double u = (x + 0.5) / width, v = (y + 0.5) / height;
            const Region* best = &regions[0];
            double best_d = 1e30;
            for (const auto& r : regions) {
                const double d = (u - r.u) * (u - r.u) + (v - r.v) * (v - r.v);
                if (d < best_d) {
                    best_d = d;
                    best = &r;
                }
            }
            auto& a = abundance[static_cast<std::size_t>(y) * width + x];
            double total = 0;
            for (int m = 0; m < kMaterials; ++m) {
                a[m] = best->mix[m] * std::exp(modulation[m](u, v));
                total += a[m];
            }
            for (auto& am : a) am /= total;
            gain[static_cast<std::size_t>(y) * width + x] = 1.0 + shading(u, v) + texture(u, v);
        }
    }

    HsiCube cube(height, width, bands);
    for (int b = 0; b < bands; ++b) {
        const double t = bands == 1 ? 0.0 : static_cast<double>(b) / (bands - 1);
        std::array<double, kMaterials> spectrum{};
        for (int m = 0; m < kMaterials; ++m) spectrum[m] = sigs[m](t);
        auto plane = cube.band(b);
        for (std::size_t p = 0; p < plane.size(); ++p) {
            double s = 0;
            for (int m = 0; m < kMaterials; ++m) s += abundance[p][m] * spectrum[m];
            plane[p] = static_cast<float>(std::clamp(s * gain[p], 0.05, 0.95));
        }
    }
    return cube;
}

void DegradeConfig::validate() const {
    require(gain > 0.0f && gain <= 1.0f, "degrade: gain must lie in (0,1]");
    require(gain_variation >= 0.0f && gain_variation < 1.0f, "degrade: gain_variation must lie in [0,1)");
    require(gaussian_sigma >= 0.0f, "degrade: gaussian_sigma must be non-negative");
    require(impulse_fraction >= 0.0f && impulse_fraction < 1.0f, "degrade: impulse_fraction must lie in [0,1)");
    require(stripe_fraction >= 0.0f && stripe_fraction < 1.0f, "degrade: stripe_fraction must lie in [0,1)");
    require(stripe_amplitude >= 0.0f, "degrade: stripe_amplitude must be non-negative");
}

HsiCube degrade(const HsiCube& cube, const DegradeConfig& cfg) {
    cfg.validate();
    const int H = cube.height(), W = cube.width(), B = cube.bands();
    HsiCube out(H, W, B);

    // Separate streams per noise type, so switching one off leaves the others unchanged.
    Rng field_rng = Rng::stream(cfg.seed, 1);
    const WaveField illumination(field_rng, 3, 1.0, 1.0);
    std::vector<double> gain(cube.plane());
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            const double g = cfg.gain * (1.0 + cfg.gain_variation * std::clamp(illumination((x + 0.5) / W, (y + 0.5) / H), -1.0, 1.0));
            gain[static_cast<std::size_t>(y) * W + x] = g;
        }

    for (int b = 0; b < B; ++b) {
        Rng gauss = Rng::stream(cfg.seed, 0x1000000ULL + static_cast<std::uint64_t>(b));
        Rng stripe = Rng::stream(cfg.seed, 0x2000000ULL + static_cast<std::uint64_t>(b));
        Rng impulse = Rng::stream(cfg.seed, 0x3000000ULL + static_cast<std::uint64_t>(b));

        std::vector<double> column_offset(static_cast<std::size_t>(W), 0.0);
        for (int x = 0; x < W; ++x) {
            const double u = stripe.uniform();
            const double a = stripe.uniform(-1.0, 1.0) * cfg.stripe_amplitude;
            if (u < cfg.stripe_fraction) column_offset[static_cast<std::size_t>(x)] = a;
        }

        auto src = cube.band(b);
        auto dst = out.band(b);
        for (std::size_t p = 0; p < src.size(); ++p) {
            double v = gain[p] * src[p];
            const double n = gauss.normal();
            if (cfg.gaussian_sigma > 0) v += cfg.gaussian_sigma * n;
            v += column_offset[p % static_cast<std::size_t>(W)];
            const double u = impulse.uniform();
            const double salt = impulse.uniform();
            if (u < cfg.impulse_fraction) v = salt < 0.5 ? 0.0 : 1.0;
            dst[p] = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
    }
    return out;
}

}  // namespace hsie
