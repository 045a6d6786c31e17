#include <algorithm>
#include <cmath>
#include <limits>

#include "hsidata/cube.hpp"

namespace hsie {

HsiCube select_bands(const HsiCube& cube, int drop_front, int drop_back, int stride) {
    require(drop_front >= 0 && drop_back >= 0, "select_bands: drop counts must be non-negative");
    require(stride >= 1, "select_bands: stride must be >= 1");
    require(drop_front + drop_back < cube.bands(),
            "select_bands: dropping " + std::to_string(drop_front) + "+" + std::to_string(drop_back) + " of " +
                std::to_string(cube.bands()) + " bands leaves nothing");
    std::vector<int> keep;
    for (int b = drop_front; b < cube.bands() - drop_back; b += stride) keep.push_back(b);
    return HsiCube(gather_bands(cube, keep));
}

HsiCube normalize(const HsiCube& cube) {
    require(cube.size() > 0, "normalize: empty cube");
    float lo = std::numeric_limits<float>::infinity();
    float hi = -lo;
    for (float v : cube.values()) {
        require(std::isfinite(v), "normalize: non-finite value");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    HsiCube out(cube.height(), cube.width(), cube.bands(), 0.0f);
    if (hi > lo) {
        const double range = static_cast<double>(hi) - lo;
        auto src = cube.values();
        auto dst = out.values();
        for (std::size_t i = 0; i < src.size(); ++i)
            dst[i] = static_cast<float>((static_cast<double>(src[i]) - lo) / range);
    }
    return out;
}

std::vector<int> adjacent_window(int band_index, int total_bands, int k) {
    require(k >= 0, "adjacent_window: k must be non-negative");
    require(k < total_bands, "adjacent_window: k=" + std::to_string(k) + " needs more than " + std::to_string(k) +
                                 " bands, cube has " + std::to_string(total_bands));
    require(band_index >= 0 && band_index < total_bands,
            "adjacent_window: band " + std::to_string(band_index) + " out of range");
    // Take k+1 contiguous bands containing the centre, shifted inward at the edges,
    // then drop the centre itself.
    int start = band_index - k / 2;
    start = std::clamp(start, 0, total_bands - 1 - k);
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(k));
    for (int b = start; b <= start + k; ++b)
        if (b != band_index) out.push_back(b);
    return out;
}

nn::Tensor<float> gather_bands(const HsiCube& cube, const std::vector<int>& indices) {
    const int H = cube.height(), W = cube.width();
    nn::Tensor<float> out({static_cast<int>(indices.size()), H, W});
    for (std::size_t i = 0; i < indices.size(); ++i) {
        auto src = cube.band(indices[i]);
        std::copy(src.begin(), src.end(), out.data() + i * cube.plane());
    }
    return out;
}

namespace {

nn::Tensor<float> crop(const HsiCube& cube, const std::vector<int>& bands, int row, int col, int patch) {
    nn::Tensor<float> out({static_cast<int>(bands.size()), patch, patch});
    for (std::size_t i = 0; i < bands.size(); ++i)
        for (int y = 0; y < patch; ++y)
            for (int x = 0; x < patch; ++x)
                out.at(static_cast<int>(i), y, x) = cube.at(bands[i], row + y, col + x);
    return out;
}

}  // namespace

std::vector<PatchSample> extract_patches(const HsiCube& low, const HsiCube& label, int patch, int k) {
    require(low.height() == label.height() && low.width() == label.width() && low.bands() == label.bands(),
            "extract_patches: low-light and label cubes differ in shape");
    require(patch >= 1, "extract_patches: patch size must be positive");
    require(patch <= low.height() && patch <= low.width(),
            "extract_patches: patch " + std::to_string(patch) + " larger than image " + std::to_string(low.height()) +
                "x" + std::to_string(low.width()));
    const int rows = low.height() / patch, cols = low.width() / patch;
    std::vector<PatchSample> out;
    out.reserve(static_cast<std::size_t>(low.bands()) * rows * cols);
    for (int b = 0; b < low.bands(); ++b) {
        const auto window = adjacent_window(b, low.bands(), k);
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                PatchSample s;
                s.band_index = b;
                s.row = r * patch;
                s.col = c * patch;
                s.band_patch = crop(low, {b}, s.row, s.col, patch);
                s.cube_patch = crop(low, window, s.row, s.col, patch);
                s.label_patch = crop(label, {b}, s.row, s.col, patch);
                s.window = window;
                out.push_back(std::move(s));
            }
        }
    }
    return out;
}

}  // namespace hsie
