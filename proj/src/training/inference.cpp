#include <algorithm>

#include "common/parallel.hpp"
#include "training/trainer.hpp"

namespace hsie::training {

std::vector<float> enhance_band(const HsiCube& cube, int band_index, const model::HsieParams<float>& params) {
    require(band_index >= 0 && band_index < cube.bands(), "enhance_band: band " + std::to_string(band_index) +
                                                               " out of range for " + std::to_string(cube.bands()) +
                                                               " bands");
    require(cube.height() % 2 == 0 && cube.width() % 2 == 0,
            "enhance_band: spatial dimensions must be even, got " + std::to_string(cube.height()) + "x" +
                std::to_string(cube.width()));
    const int k = params.config().k;
    const auto window = adjacent_window(band_index, cube.bands(), k);
    const auto vars = model::LayerVars<float>::from(params, false);
    auto out = model::hsie_forward(cube.band_tensor(band_index), gather_bands(cube, window), params.layout, vars);
    std::vector<float> band = std::move(out->value.vec());
    for (auto& v : band) v = std::clamp(v, 0.0f, 1.0f);
    return band;
}

HsiCube enhance_cube(const HsiCube& cube, const model::HsieParams<float>& params, int workers) {
    HsiCube out(cube.height(), cube.width(), cube.bands());
    parallel_for(
        static_cast<std::size_t>(cube.bands()),
        [&](std::size_t b) {
            const auto band = enhance_band(cube, static_cast<int>(b), params);
            std::copy(band.begin(), band.end(), out.band(static_cast<int>(b)).begin());
        },
        workers);
    return out;
}

}  // namespace hsie::training
