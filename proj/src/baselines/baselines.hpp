#pragma once

#include <span>
#include <string>
#include <vector>

#include "hsidata/cube.hpp"

namespace hsie::baselines {

// Classical single-band enhancers. Each takes one band (row-major, h x w, values in
// [0,1]) and returns a band of the same size in [0,1]. Cubes are processed band by band.

constexpr int kHistogramBins = 256;

/// Bin index of a [0,1] value: min(255, floor(v * 256)).
int histogram_bin(float v);

/// Global histogram equalization: each pixel maps to the CDF of its bin.
std::vector<float> hist_equalize(std::span<const float> band);

struct ClaheStats {
    double clip_ceiling = 0;         // bin mass limit per tile
    double max_clipped_bin = 0;      // largest bin mass after clipping, before redistribution
};

/// Contrast-limited adaptive equalization on a tiles x tiles grid. `clip` is the
/// ceiling as a fraction of tile pixels; values >= 1 disable clipping.
std::vector<float> clahe(std::span<const float> band, int height, int width, int tiles = 8, double clip = 0.01,
                         ClaheStats* stats = nullptr);

inline const std::vector<double> kMsrScales = {15.0, 80.0, 360.0};
constexpr double kLogEpsilon = 1e-4;

/// Gaussian blur with mirror boundary; the kernel is truncated at 3 sigma and
/// folded onto the image, so sigma may exceed the image size.
std::vector<double> gaussian_blur(std::span<const double> img, int height, int width, double sigma);

/// Scale-averaged log(x+eps) - log(G_sigma * x + eps), before any stretch.
std::vector<double> msr_log_ratio(std::span<const float> band, int height, int width,
                                  const std::vector<double>& scales);

/// Equal-weight multi-scale Retinex followed by a 1st/99th percentile stretch.
std::vector<float> msr(std::span<const float> band, int height, int width,
                       const std::vector<double>& scales = kMsrScales);

/// Multi-resolution McCann99 Retinex with `iterations` ratio-product-reset rounds per level.
std::vector<float> mccann_retinex(std::span<const float> band, int height, int width, int iterations = 3);

enum class Method { He, Clahe, Msr, McCann };
Method parse_method(const std::string& name);  // he | clahe | msr | mr
std::string method_name(Method m);

HsiCube apply(const HsiCube& cube, Method method);

}  // namespace hsie::baselines
