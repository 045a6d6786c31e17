#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hsidata/cube.hpp"

namespace hsie::metrics {

struct MetricsReport {
    double mpsnr = 0;                 // dB, mean of band_psnr (may be +inf)
    double mssim = 0;
    double sam_deg = 0;               // mean spectral angle in degrees
    std::vector<double> band_psnr;    // dB per band
    std::size_t sam_skipped = 0;      // zero-norm spectra excluded from SAM
};

/// 10*log10(peak^2 / MSE); +inf for identical inputs.
double psnr(std::span<const float> ref, std::span<const float> test, double peak = 1.0);

std::vector<double> band_psnr_curve(const HsiCube& ref, const HsiCube& test);
double mpsnr(const HsiCube& ref, const HsiCube& test);

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;

/// Mean of the SSIM map over all valid 11x11 window positions (no padding).
double ssim(std::span<const float> ref, std::span<const float> test, int height, int width);
double mssim(const HsiCube& ref, const HsiCube& test);

struct SamResult {
    double mean_deg = 0;
    std::size_t skipped = 0;
};
/// Spectral angle per pixel over the band axis, averaged over pixels with non-zero spectra.
SamResult sam(const HsiCube& ref, const HsiCube& test);

MetricsReport evaluate(const HsiCube& ref, const HsiCube& test);

/// {"mpsnr":..,"mssim":..,"sam_deg":..,"band_psnr":[..]}; infinities are written as "inf".
std::string report_json(const MetricsReport& report);
/// "band,psnr" header, one row per band.
std::string curve_csv(const std::vector<double>& band_psnr);
void write_report(const MetricsReport& report, const std::filesystem::path& path);
void write_curve(const std::vector<double>& band_psnr, const std::filesystem::path& path);

/// Shortest round-trip decimal text for a double, "inf"/"-inf" for infinities.
std::string format_number(double v);

}  // namespace hsie::metrics
