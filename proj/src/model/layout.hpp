#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "numerics/tensor.hpp"

namespace hsie::model {

struct HsieConfig {
    int k = 24;             // adjacent bands fed to the spectral branch
    int feat = 60;          // feature width
    int n_cab = 4;          // attention blocks in the enlightening module
    int n_dense = 4;        // dense conv layers per block
    int eca_kernel = 3;     // 1D attention kernel length
    int mask_channels = 16; // refinement branch width
    int growth = 60;        // channels emitted by each dense layer

    /// Full-size network.
    static HsieConfig full() { return {}; }
    /// Reduced network used for desk-scale training and the acceptance runs.
    static HsieConfig desk() { return {8, 16, 2, 3, 3, 16, 16}; }

    void validate() const;
    bool operator==(const HsieConfig&) const = default;
};

/// Channel split of the three parallel shallow convolutions (3x3, 5x5, 7x7).
/// Widths differ by at most one and sum to feat.
std::array<int, 3> sfe_split(int feat);

struct LayerSpec {
    std::string name;
    int out = 0, in = 0, kh = 0, kw = 0;
    bool has_bias = true;
    bool is_conv1d = false;

    nn::Shape weight_shape() const { return is_conv1d ? nn::Shape{1, 1, kw} : nn::Shape{out, in, kh, kw}; }
    std::size_t weight_count() const { return nn::shape_numel(weight_shape()); }
    std::size_t param_count() const { return weight_count() + (has_bias ? static_cast<std::size_t>(out) : 0); }
};

/// Positions of each named operator in the layout.
struct LayerIndex {
    std::array<int, 3> sfe_band{};      // 3x3/5x5/7x7 on the band's low-frequency map
    std::array<int, 3> sfe_adjacent{};  // same on the adjacent bands
    int sfe_merge = 0;                  // 3x3, 2*feat -> feat
    struct Cab {
        std::vector<int> dense;
        int transition = 0;
        int eca = 0;
    };
    std::vector<Cab> cabs;
    int fusion = 0;
    int recon = 0;
    int refine_head = 0;
    std::array<std::array<int, 2>, 3> refine_blocks{};
    int refine_tail = 0;
    int final_conv = 0;
};

struct Layout {
    HsieConfig config;
    std::vector<LayerSpec> layers;
    LayerIndex index;

    std::size_t param_count() const;
};

/// Deterministic layer list; serialization writes layers in this order, weight then bias.
Layout make_layout(const HsieConfig& cfg);

}  // namespace hsie::model
