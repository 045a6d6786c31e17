#include "pyramid/pyramid.hpp"

#include <cmath>

#include "common/parallel.hpp"
#include "hsidata/cube.hpp"
#include "numerics/ops.hpp"

namespace hsie::pyramid {

namespace {

template <typename T>
void require_even(const nn::Tensor<T>& x, const char* what) {
    nn::require_rank(x, 3, what);
    require(x.height() % 2 == 0 && x.width() % 2 == 0,
            std::string(what) + ": spatial dimensions must be even, got " + std::to_string(x.height()) + "x" +
                std::to_string(x.width()));
    require(x.height() > 0 && x.width() > 0, std::string(what) + ": empty band");
}

}  // namespace

template <typename T>
nn::Tensor<T> blur_downsample(const nn::Tensor<T>& x, const GaussianKernel& kernel) {
    require_even(x, "decompose");
    return nn::apply_resample(x, nn::blur_down_map(x.height(), kernel), nn::blur_down_map(x.width(), kernel));
}

template <typename T>
nn::Tensor<T> expand(const nn::Tensor<T>& low, const GaussianKernel& kernel) {
    nn::require_rank(low, 3, "expand");
    return nn::apply_resample(low, nn::expand_map(low.height(), kernel), nn::expand_map(low.width(), kernel));
}

template <typename T>
PyramidPair<T> decompose(const nn::Tensor<T>& x, const GaussianKernel& kernel) {
    for (const T v : x.vec()) require(std::isfinite(static_cast<double>(v)), "decompose: non-finite input");
    PyramidPair<T> pair;
    pair.low = blur_downsample(x, kernel);
    nn::Tensor<T> up = expand(pair.low, kernel);
    pair.high = nn::Tensor<T>(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) pair.high[i] = x[i] - up[i];
    return pair;
}

template <typename T>
nn::Tensor<T> reconstruct(const PyramidPair<T>& pair, const GaussianKernel& kernel) {
    nn::require_rank(pair.high, 3, "reconstruct high");
    nn::require_rank(pair.low, 3, "reconstruct low");
    if (pair.low.channels() != pair.high.channels() || 2 * pair.low.height() != pair.high.height() ||
        2 * pair.low.width() != pair.high.width())
        throw ValidationError("reconstruct: low " + nn::shape_str(pair.low.shape()) + " is not half of high " +
                              nn::shape_str(pair.high.shape()));
    nn::Tensor<T> out = expand(pair.low, kernel);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = pair.high[i] + out[i];
    return out;
}

CubePyramid decompose_cube(const HsiCube& cube, const GaussianKernel& kernel) {
    const int H = cube.height(), W = cube.width(), B = cube.bands();
    require(H % 2 == 0 && W % 2 == 0, "decompose_cube: spatial dimensions must be even, got " + std::to_string(H) +
                                          "x" + std::to_string(W));
    CubePyramid out{nn::Tensor<float>({B, H, W}), nn::Tensor<float>({B, H / 2, W / 2})};
    parallel_for(static_cast<std::size_t>(B), [&](std::size_t b) {
        auto pair = decompose(cube.band_tensor(static_cast<int>(b)), kernel);
        std::copy(pair.high.vec().begin(), pair.high.vec().end(), out.high.data() + b * pair.high.size());
        std::copy(pair.low.vec().begin(), pair.low.vec().end(), out.low.data() + b * pair.low.size());
    });
    return out;
}

template <typename T>
nn::Tensor<T> mean_high_frequency(const nn::Tensor<T>& band_high, const nn::Tensor<T>& adjacent_high) {
    nn::require_rank(band_high, 3, "mean_high_frequency band");
    require(band_high.channels() == 1, "mean_high_frequency: band map must have one channel");
    if (adjacent_high.empty() || adjacent_high.channels() == 0) return band_high;
    nn::require_rank(adjacent_high, 3, "mean_high_frequency adjacent");
    if (adjacent_high.height() != band_high.height() || adjacent_high.width() != band_high.width())
        throw ValidationError("mean_high_frequency: spatial mismatch " + nn::shape_str(band_high.shape()) + " vs " +
                              nn::shape_str(adjacent_high.shape()));
    const int k = adjacent_high.channels();
    const std::size_t HW = band_high.plane();
    nn::Tensor<T> out(band_high.shape());
    for (std::size_t p = 0; p < HW; ++p) {
        T acc = band_high[p];
        for (int c = 0; c < k; ++c) acc += adjacent_high[static_cast<std::size_t>(c) * HW + p];
        out[p] = acc / static_cast<T>(k + 1);
    }
    return out;
}

#define HSIE_INSTANTIATE_PYRAMID(T)                                                           \
    template nn::Tensor<T> blur_downsample(const nn::Tensor<T>&, const GaussianKernel&);      \
    template nn::Tensor<T> expand(const nn::Tensor<T>&, const GaussianKernel&);               \
    template PyramidPair<T> decompose(const nn::Tensor<T>&, const GaussianKernel&);           \
    template nn::Tensor<T> reconstruct(const PyramidPair<T>&, const GaussianKernel&);         \
    template nn::Tensor<T> mean_high_frequency(const nn::Tensor<T>&, const nn::Tensor<T>&);

HSIE_INSTANTIATE_PYRAMID(float)
HSIE_INSTANTIATE_PYRAMID(double)

}  // namespace hsie::pyramid
