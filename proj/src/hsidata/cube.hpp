#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "numerics/tensor.hpp"

namespace hsie {

/// Hyperspectral cube, band-sequential: band-major, then row-major. Stored as a
/// [B,H,W] tensor so a band is a contiguous H*W plane.
class HsiCube {
public:
    HsiCube() = default;
    HsiCube(int height, int width, int bands, float fill = 0.0f)
        : data_({bands, height, width}, fill) {
        require(height > 0 && width > 0 && bands > 0, "cube dimensions must be positive");
    }
    HsiCube(int height, int width, int bands, std::vector<float> values)
        : data_({bands, height, width}, std::move(values)) {
        require(height > 0 && width > 0 && bands > 0, "cube dimensions must be positive");
    }
    explicit HsiCube(nn::Tensor<float> bhw) : data_(std::move(bhw)) { nn::require_rank(data_, 3, "cube"); }

    int height() const { return data_.height(); }
    int width() const { return data_.width(); }
    int bands() const { return data_.channels(); }
    std::size_t plane() const { return data_.plane(); }
    std::size_t size() const { return data_.size(); }

    std::span<float> band(int b) { return {data_.data() + static_cast<std::size_t>(b) * plane(), plane()}; }
    std::span<const float> band(int b) const { return {data_.data() + static_cast<std::size_t>(b) * plane(), plane()}; }
    float& at(int b, int y, int x) { return data_.at(b, y, x); }
    float at(int b, int y, int x) const { return data_.at(b, y, x); }

    /// Copy of one band as a [1,H,W] tensor.
    nn::Tensor<float> band_tensor(int b) const {
        require(b >= 0 && b < bands(), "band index " + std::to_string(b) + " out of range");
        auto s = band(b);
        return nn::Tensor<float>({1, height(), width()}, std::vector<float>(s.begin(), s.end()));
    }

    nn::Tensor<float>& tensor() { return data_; }
    const nn::Tensor<float>& tensor() const { return data_; }
    std::span<float> values() { return data_.span(); }
    std::span<const float> values() const { return data_.span(); }

    bool operator==(const HsiCube& other) const {
        return data_.shape() == other.data_.shape() && data_.vec() == other.data_.vec();
    }

private:
    nn::Tensor<float> data_;
};

/// One training example cut from a paired cube.
struct PatchSample {
    nn::Tensor<float> band_patch;   // [1,p,p] low-light band
    nn::Tensor<float> cube_patch;   // [k,p,p] adjacent low-light bands
    nn::Tensor<float> label_patch;  // [1,p,p] reference band
    int band_index = 0;
    int row = 0;
    int col = 0;
    std::vector<int> window;        // band indices stacked in cube_patch
};

struct DegradeConfig {
    float gain = 0.2f;
    float gain_variation = 0.0f;   // amplitude of a smooth multiplicative illumination field
    float gaussian_sigma = 0.02f;
    float impulse_fraction = 0.01f;
    float stripe_fraction = 0.05f;
    float stripe_amplitude = 0.05f;
    std::uint64_t seed = 1;

    static DegradeConfig identity() { return {1.0f, 0.0f, 0.0f, 0.0f, 0.0f, 0.0f, 1}; }
    void validate() const;
};

// File I/O: ENVI-compatible <stem>.hdr + <stem>.raw, 32-bit little-endian floats, BSQ.
HsiCube read_cube(const std::filesystem::path& path);
void write_cube(const HsiCube& cube, const std::filesystem::path& path);
/// Resolves "x", "x.hdr" or "x.raw" to the header and payload paths.
std::filesystem::path header_path(const std::filesystem::path& path);
std::filesystem::path raw_path(const std::filesystem::path& path);

// Preprocessing.
HsiCube select_bands(const HsiCube& cube, int drop_front, int drop_back, int stride);
HsiCube normalize(const HsiCube& cube);
std::vector<int> adjacent_window(int band_index, int total_bands, int k);
/// [k,H,W] stack of the given bands.
nn::Tensor<float> gather_bands(const HsiCube& cube, const std::vector<int>& indices);
std::vector<PatchSample> extract_patches(const HsiCube& low, const HsiCube& label, int patch, int k);

// Synthetic data.
HsiCube synth_scene(int height, int width, int bands, std::uint64_t seed);
HsiCube degrade(const HsiCube& cube, const DegradeConfig& cfg);

}  // namespace hsie
