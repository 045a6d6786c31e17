#include <algorithm>
#include <cmath>

#include "baselines/baselines.hpp"
#include "numerics/resample.hpp"

namespace hsie::baselines {

namespace {

using SparseRows = std::vector<std::vector<std::pair<int, double>>>;

// Normalized Gaussian taps folded onto [0,n) with mirror boundary.
SparseRows folded_gaussian(int n, double sigma) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
    double total = 0;
    for (int t = -radius; t <= radius; ++t) {
        const double w = std::exp(-0.5 * (t / sigma) * (t / sigma));
        taps[static_cast<std::size_t>(t + radius)] = w;
        total += w;
    }
    SparseRows rows(static_cast<std::size_t>(n));
    std::vector<double> dense(static_cast<std::size_t>(n));
    for (int o = 0; o < n; ++o) {
        std::fill(dense.begin(), dense.end(), 0.0);
        for (int t = -radius; t <= radius; ++t)
            dense[static_cast<std::size_t>(nn::reflect101(o + t, n))] += taps[static_cast<std::size_t>(t + radius)] / total;
        for (int j = 0; j < n; ++j)
            if (dense[static_cast<std::size_t>(j)] != 0.0) rows[static_cast<std::size_t>(o)].emplace_back(j, dense[static_cast<std::size_t>(j)]);
    }
    return rows;
}

std::vector<double> log_image(std::span<const float> band) {
    std::vector<double> out(band.size());
    for (std::size_t i = 0; i < band.size(); ++i) out[i] = std::log(static_cast<double>(band[i]) + kLogEpsilon);
    return out;
}

std::vector<float> percentile_stretch(const std::vector<double>& v, double lo_pct = 0.01, double hi_pct = 0.99) {
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double lo = sorted[static_cast<std::size_t>(std::floor(lo_pct * static_cast<double>(n - 1)))];
    const double hi = sorted[static_cast<std::size_t>(std::floor(hi_pct * static_cast<double>(n - 1)))];
    std::vector<float> out(n, 0.0f);
    // Degenerate range (e.g. a constant band) maps to zeros.
    if (!(hi - lo > 1e-9)) return out;
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<float>(std::clamp((v[i] - lo) / (hi - lo), 0.0, 1.0));
    return out;
}

}  // namespace

std::vector<double> gaussian_blur(std::span<const double> img, int height, int width, double sigma) {
    require(sigma > 0, "gaussian_blur: sigma must be positive");
    require(img.size() == static_cast<std::size_t>(height) * width, "gaussian_blur: size mismatch");
    const SparseRows cols = folded_gaussian(width, sigma);
    const SparseRows rows = folded_gaussian(height, sigma);
    std::vector<double> tmp(img.size(), 0.0), out(img.size(), 0.0);
    for (int y = 0; y < height; ++y) {
        const double* src = img.data() + static_cast<std::size_t>(y) * width;
        double* dst = tmp.data() + static_cast<std::size_t>(y) * width;
        for (int x = 0; x < width; ++x) {
            double acc = 0;
            for (const auto& [j, w] : cols[static_cast<std::size_t>(x)]) acc += w * src[j];
            dst[x] = acc;
        }
    }
    for (int y = 0; y < height; ++y) {
        double* dst = out.data() + static_cast<std::size_t>(y) * width;
        for (const auto& [j, w] : rows[static_cast<std::size_t>(y)]) {
            const double* src = tmp.data() + static_cast<std::size_t>(j) * width;
            for (int x = 0; x < width; ++x) dst[x] += w * src[x];
        }
    }
    return out;
}

std::vector<double> msr_log_ratio(std::span<const float> band, int height, int width, const std::vector<double>& scales) {
    require(!scales.empty(), "msr: no scales");
    require(band.size() == static_cast<std::size_t>(height) * width, "msr: band size mismatch");
    const std::vector<double> logx = log_image(band);
    std::vector<double> x(band.begin(), band.end());
    std::vector<double> r(band.size(), 0.0);
    for (double sigma : scales) {
        const auto blurred = gaussian_blur(x, height, width, sigma);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] += logx[i] - std::log(blurred[i] + kLogEpsilon);
    }
    for (auto& v : r) v /= static_cast<double>(scales.size());
    return r;
}

std::vector<float> msr(std::span<const float> band, int height, int width, const std::vector<double>& scales) {
    return percentile_stretch(msr_log_ratio(band, height, width, scales));
}

namespace {

struct Level {
    int h = 0, w = 0;
    std::vector<double> v;
};

// 2x2 mean with ceil division; a missing last row/column repeats the edge.
Level halve(const Level& in) {
    Level out{(in.h + 1) / 2, (in.w + 1) / 2, {}};
    out.v.resize(static_cast<std::size_t>(out.h) * out.w);
    for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x) {
            double acc = 0;
            for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx) {
                    const int sy = std::min(2 * y + dy, in.h - 1), sx = std::min(2 * x + dx, in.w - 1);
                    acc += in.v[static_cast<std::size_t>(sy) * in.w + sx];
                }
            out.v[static_cast<std::size_t>(y) * out.w + x] = acc / 4.0;
        }
    return out;
}

}  // namespace

std::vector<float> mccann_retinex(std::span<const float> band, int height, int width, int iterations) {
    require(band.size() == static_cast<std::size_t>(height) * width, "mccann_retinex: band size mismatch");
    require(iterations >= 1, "mccann_retinex: iterations must be >= 1");
    require(std::any_of(band.begin(), band.end(), [](float v) { return v > 0.0f; }),
            "mccann_retinex: band is all zero (undefined in the log domain)");

    // Log-reflectance pyramid, finest first.
    std::vector<Level> pyramid{{height, width, log_image(band)}};
    while (pyramid.back().h > 1 || pyramid.back().w > 1) pyramid.push_back(halve(pyramid.back()));
    const double maximum = *std::max_element(pyramid.front().v.begin(), pyramid.front().v.end());

    // Neighbour order N, NE, E, SE, S, SW, W, NW.
    constexpr int kShifts[8][2] = {{-1, 0}, {-1, 1}, {0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}, {-1, -1}};

    std::vector<double> op(pyramid.back().v.size(), maximum);
    int prev_w = pyramid.back().w;
    for (int level = static_cast<int>(pyramid.size()) - 1; level >= 0; --level) {
        const Level& rr = pyramid[static_cast<std::size_t>(level)];
        if (static_cast<int>(op.size()) != rr.h * rr.w) {
            std::vector<double> up(static_cast<std::size_t>(rr.h) * rr.w);
            for (int y = 0; y < rr.h; ++y)
                for (int x = 0; x < rr.w; ++x) up[static_cast<std::size_t>(y) * rr.w + x] = op[static_cast<std::size_t>(y / 2) * prev_w + x / 2];
            op = std::move(up);
        }
        prev_w = rr.w;
        std::vector<double> ip(op.size());
        for (int it = 0; it < iterations; ++it) {
            for (const auto& s : kShifts) {
                for (int y = 0; y < rr.h; ++y)
                    for (int x = 0; x < rr.w; ++x) {
                        const std::size_t i = static_cast<std::size_t>(y) * rr.w + x;
                        const int ny = y + s[0], nx = x + s[1];
                        double v = op[i];
                        if (ny >= 0 && ny < rr.h && nx >= 0 && nx < rr.w) {
                            const std::size_t j = static_cast<std::size_t>(ny) * rr.w + nx;
                            v = std::min(op[j] + rr.v[i] - rr.v[j], maximum);  // ratio-product, reset
                        }
                        ip[i] = v;
                    }
                for (std::size_t i = 0; i < op.size(); ++i) op[i] = 0.5 * (op[i] + ip[i]);
            }
        }
    }

    std::vector<float> out(op.size());
    for (std::size_t i = 0; i < op.size(); ++i) out[i] = static_cast<float>(std::clamp(std::exp(op[i] - maximum), 0.0, 1.0));
    return out;
}

}  // namespace hsie::baselines
