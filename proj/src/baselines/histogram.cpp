#include <algorithm>
#include <array>
#include <cmath>

#include "baselines/baselines.hpp"
#include "common/parallel.hpp"

namespace hsie::baselines {

int histogram_bin(float v) {
    const double scaled = std::floor(static_cast<double>(v) * kHistogramBins);
    return static_cast<int>(std::clamp(scaled, 0.0, static_cast<double>(kHistogramBins - 1)));
}

namespace {

using Histogram = std::array<double, kHistogramBins>;

// Normalized cumulative histogram: cdf[b] = fraction of mass in bins <= b.
Histogram cumulative(const Histogram& hist) {
    Histogram cdf{};
    double total = 0;
    for (double h : hist) total += h;
    double acc = 0;
    for (int b = 0; b < kHistogramBins; ++b) {
        acc += hist[static_cast<std::size_t>(b)];
        cdf[static_cast<std::size_t>(b)] = total > 0 ? acc / total : 0.0;
    }
    return cdf;
}

}  // namespace

std::vector<float> hist_equalize(std::span<const float> band) {
    Histogram hist{};
    for (float v : band) hist[static_cast<std::size_t>(histogram_bin(v))] += 1.0;
    const Histogram cdf = cumulative(hist);
    std::vector<float> out(band.size());
    for (std::size_t i = 0; i < band.size(); ++i)
        out[i] = static_cast<float>(cdf[static_cast<std::size_t>(histogram_bin(band[i]))]);
    return out;
}

std::vector<float> clahe(std::span<const float> band, int height, int width, int tiles, double clip,
                         ClaheStats* stats) {
    require(tiles >= 1, "clahe: tiles must be >= 1");
    require(clip > 0, "clahe: clip must be positive");
    require(band.size() == static_cast<std::size_t>(height) * width, "clahe: band size mismatch");
    require(height >= tiles && width >= tiles, "clahe: image " + std::to_string(height) + "x" + std::to_string(width) +
                                                   " smaller than the " + std::to_string(tiles) + "x" +
                                                   std::to_string(tiles) + " tile grid");

    // Tile t along an axis spans [t*n/tiles, (t+1)*n/tiles).
    auto bounds = [tiles](int n, int t) { return std::pair{t * n / tiles, (t + 1) * n / tiles}; };

    std::vector<Histogram> maps(static_cast<std::size_t>(tiles) * tiles);
    if (stats) *stats = {};
    for (int ty = 0; ty < tiles; ++ty) {
        for (int tx = 0; tx < tiles; ++tx) {
            const auto [y0, y1] = bounds(height, ty);
            const auto [x0, x1] = bounds(width, tx);
            Histogram hist{};
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x) hist[static_cast<std::size_t>(histogram_bin(band[static_cast<std::size_t>(y) * width + x]))] += 1.0;
            const double pixels = static_cast<double>(y1 - y0) * (x1 - x0);
            const double ceiling = std::max(1.0, clip * pixels);
            double excess = 0;
            for (auto& h : hist) {
                if (h > ceiling) {
                    excess += h - ceiling;
                    h = ceiling;
                }
            }
            if (stats) {
                stats->clip_ceiling = std::max(stats->clip_ceiling, ceiling);
                for (double h : hist) stats->max_clipped_bin = std::max(stats->max_clipped_bin, h);
            }
            const double share = excess / kHistogramBins;
            for (auto& h : hist) h += share;
            maps[static_cast<std::size_t>(ty) * tiles + tx] = cumulative(hist);
        }
    }

    // Bilinear blend of the four nearest tile mappings, measured between tile centres.
    auto centre = [&](int n, int t) {
        const auto [a, b] = bounds(n, t);
        return 0.5 * (a + b) - 0.5;
    };
    auto locate = [&](int n, double pos, int& t0, int& t1, double& f) {
        if (tiles == 1 || pos <= centre(n, 0)) {
            t0 = t1 = 0;
            f = 0;
            return;
        }
        if (pos >= centre(n, tiles - 1)) {
            t0 = t1 = tiles - 1;
            f = 0;
            return;
        }
        t0 = 0;
        while (t0 + 1 < tiles - 1 && centre(n, t0 + 1) <= pos) ++t0;
        t1 = t0 + 1;
        f = (pos - centre(n, t0)) / (centre(n, t1) - centre(n, t0));
    };

    std::vector<float> out(band.size());
    for (int y = 0; y < height; ++y) {
        int ty0, ty1;
        double fy;
        locate(height, y, ty0, ty1, fy);
        for (int x = 0; x < width; ++x) {
            int tx0, tx1;
            double fx;
            locate(width, x, tx0, tx1, fx);
            const auto bin = static_cast<std::size_t>(histogram_bin(band[static_cast<std::size_t>(y) * width + x]));
            auto m = [&](int ty, int tx) { return maps[static_cast<std::size_t>(ty) * tiles + tx][bin]; };
            const double top = (1 - fx) * m(ty0, tx0) + fx * m(ty0, tx1);
            const double bottom = (1 - fx) * m(ty1, tx0) + fx * m(ty1, tx1);
            out[static_cast<std::size_t>(y) * width + x] = static_cast<float>(std::clamp((1 - fy) * top + fy * bottom, 0.0, 1.0));
        }
    }
    return out;
}

Method parse_method(const std::string& name) {
    if (name == "he") return Method::He;
    if (name == "clahe") return Method::Clahe;
    if (name == "msr") return Method::Msr;
    if (name == "mr") return Method::McCann;
    throw ValidationError("unknown baseline method '" + name + "' (expected he, clahe, msr or mr)");
}

std::string method_name(Method m) {
    switch (m) {
        case Method::He: return "he";
        case Method::Clahe: return "clahe";
        case Method::Msr: return "msr";
        case Method::McCann: return "mr";
    }
    return "?";
}

HsiCube apply(const HsiCube& cube, Method method) {
    const int H = cube.height(), W = cube.width();
    HsiCube out(H, W, cube.bands());
    parallel_for(static_cast<std::size_t>(cube.bands()), [&](std::size_t bi) {
        const int b = static_cast<int>(bi);
        std::vector<float> res;
        switch (method) {
            case Method::He: res = hist_equalize(cube.band(b)); break;
            case Method::Clahe: res = clahe(cube.band(b), H, W); break;
            case Method::Msr: res = msr(cube.band(b), H, W); break;
            case Method::McCann: res = mccann_retinex(cube.band(b), H, W); break;
        }
        std::copy(res.begin(), res.end(), out.band(b).begin());
    });
    return out;
}

}  // namespace hsie::baselines
