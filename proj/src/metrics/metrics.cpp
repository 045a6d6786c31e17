#include "metrics/metrics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include <json.hpp>

#include "common/parallel.hpp"

namespace hsie::metrics {

namespace {

void require_same_shape(const HsiCube& a, const HsiCube& b, const char* what) {
    if (a.height() != b.height() || a.width() != b.width() || a.bands() != b.bands())
        throw ValidationError(std::string(what) + ": cube shapes differ (" + std::to_string(a.height()) + "x" +
                              std::to_string(a.width()) + "x" + std::to_string(a.bands()) + " vs " +
                              std::to_string(b.height()) + "x" + std::to_string(b.width()) + "x" +
                              std::to_string(b.bands()) + ")");
}

std::vector<double> gaussian_window() {
    std::vector<double> w(kSsimWindow);
    double total = 0;
    const int r = kSsimWindow / 2;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double d = i - r;
        w[static_cast<std::size_t>(i)] = std::exp(-d * d / (2 * kSsimSigma * kSsimSigma));
        total += w[static_cast<std::size_t>(i)];
    }
    for (auto& v : w) v /= total;
    return w;
}

// Separable valid-mode filtering: H x W -> (H-10) x (W-10).
std::vector<double> filter_valid(const std::vector<double>& img, int H, int W, const std::vector<double>& w) {
    const int K = static_cast<int>(w.size());
    const int Wo = W - K + 1, Ho = H - K + 1;
    std::vector<double> tmp(static_cast<std::size_t>(H) * Wo);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < Wo; ++x) {
            double acc = 0;
            for (int t = 0; t < K; ++t) acc += w[static_cast<std::size_t>(t)] * img[static_cast<std::size_t>(y) * W + x + t];
            tmp[static_cast<std::size_t>(y) * Wo + x] = acc;
        }
    std::vector<double> out(static_cast<std::size_t>(Ho) * Wo);
    for (int y = 0; y < Ho; ++y)
        for (int x = 0; x < Wo; ++x) {
            double acc = 0;
            for (int t = 0; t < K; ++t) acc += w[static_cast<std::size_t>(t)] * tmp[static_cast<std::size_t>(y + t) * Wo + x];
            out[static_cast<std::size_t>(y) * Wo + x] = acc;
        }
    return out;
}

}  // namespace

double psnr(std::span<const float> ref, std::span<const float> test, double peak) {
    require(ref.size() == test.size(), "psnr: size mismatch (" + std::to_string(ref.size()) + " vs " +
                                           std::to_string(test.size()) + ")");
    require(!ref.empty(), "psnr: empty input");
    double acc = 0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const double d = static_cast<double>(ref[i]) - static_cast<double>(test[i]);
        acc += d * d;
    }
    const double mse = acc / static_cast<double>(ref.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

std::vector<double> band_psnr_curve(const HsiCube& ref, const HsiCube& test) {
    require_same_shape(ref, test, "band_psnr_curve");
    std::vector<double> out(static_cast<std::size_t>(ref.bands()));
    for (int b = 0; b < ref.bands(); ++b) out[static_cast<std::size_t>(b)] = psnr(ref.band(b), test.band(b));
    return out;
}

double mpsnr(const HsiCube& ref, const HsiCube& test) {
    const auto curve = band_psnr_curve(ref, test);
    double acc = 0;
    for (double v : curve) acc += v;
    return acc / static_cast<double>(curve.size());
}

double ssim(std::span<const float> ref, std::span<const float> test, int height, int width) {
    require(ref.size() == test.size() && ref.size() == static_cast<std::size_t>(height) * width,
            "ssim: size mismatch");
    require(height >= kSsimWindow && width >= kSsimWindow,
            "ssim: image " + std::to_string(height) + "x" + std::to_string(width) + " smaller than the " +
                std::to_string(kSsimWindow) + "x" + std::to_string(kSsimWindow) + " window");
    constexpr double L = 1.0;
    constexpr double C1 = (0.01 * L) * (0.01 * L);
    constexpr double C2 = (0.03 * L) * (0.03 * L);
    static const std::vector<double> window = gaussian_window();

    const std::size_t n = ref.size();
    std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = ref[i];
        y[i] = test[i];
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
    }
    const auto mx = filter_valid(x, height, width, window);
    const auto my = filter_valid(y, height, width, window);
    const auto fxx = filter_valid(xx, height, width, window);
    const auto fyy = filter_valid(yy, height, width, window);
    const auto fxy = filter_valid(xy, height, width, window);

    double acc = 0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
        const double sxx = fxx[i] - mx[i] * mx[i];
        const double syy = fyy[i] - my[i] * my[i];
        const double sxy = fxy[i] - mx[i] * my[i];
        const double num = (2 * mx[i] * my[i] + C1) * (2 * sxy + C2);
        const double den = (mx[i] * mx[i] + my[i] * my[i] + C1) * (sxx + syy + C2);
        acc += num / den;
    }
    return acc / static_cast<double>(mx.size());
}

double mssim(const HsiCube& ref, const HsiCube& test) {
    require_same_shape(ref, test, "mssim");
    std::vector<double> per_band(static_cast<std::size_t>(ref.bands()));
    parallel_for(per_band.size(), [&](std::size_t b) {
        per_band[b] = ssim(ref.band(static_cast<int>(b)), test.band(static_cast<int>(b)), ref.height(), ref.width());
    });
    double acc = 0;
    for (double v : per_band) acc += v;
    return acc / static_cast<double>(per_band.size());
}

SamResult sam(const HsiCube& ref, const HsiCube& test) {
    require_same_shape(ref, test, "sam");
    require(ref.bands() >= 2, "sam: need at least 2 bands");
    const std::size_t P = ref.plane();
    const int B = ref.bands();
    SamResult result;
    double acc = 0;
    std::size_t counted = 0;
    std::vector<double> r(static_cast<std::size_t>(B)), t(static_cast<std::size_t>(B));
    for (std::size_t p = 0; p < P; ++p) {
        double nr = 0, nt = 0;
        for (int b = 0; b < B; ++b) {
            r[static_cast<std::size_t>(b)] = ref.band(b)[p];
            t[static_cast<std::size_t>(b)] = test.band(b)[p];
            nr += r[static_cast<std::size_t>(b)] * r[static_cast<std::size_t>(b)];
            nt += t[static_cast<std::size_t>(b)] * t[static_cast<std::size_t>(b)];
        }
        if (nr == 0.0 || nt == 0.0) {
            ++result.skipped;
            continue;
        }
        nr = std::sqrt(nr);
        nt = std::sqrt(nt);
        // Angle between unit vectors as 2*atan2(|u-v|, |u+v|); stays accurate near 0 and 180 degrees.
        double dm = 0, dp = 0;
        for (int b = 0; b < B; ++b) {
            const double u = r[static_cast<std::size_t>(b)] / nr;
            const double v = t[static_cast<std::size_t>(b)] / nt;
            dm += (u - v) * (u - v);
            dp += (u + v) * (u + v);
        }
        acc += 2.0 * std::atan2(std::sqrt(dm), std::sqrt(dp));
        ++counted;
    }
    if (counted == 0) throw ValidationError("sam: every spectrum has zero norm");
    result.mean_deg = acc / static_cast<double>(counted) * 180.0 / std::numbers::pi;
    return result;
}

MetricsReport evaluate(const HsiCube& ref, const HsiCube& test) {
    require_same_shape(ref, test, "evaluate");
    MetricsReport r;
    r.band_psnr = band_psnr_curve(ref, test);
    double acc = 0;
    for (double v : r.band_psnr) acc += v;
    r.mpsnr = acc / static_cast<double>(r.band_psnr.size());
    r.mssim = mssim(ref, test);
    const auto s = sam(ref, test);
    r.sam_deg = s.mean_deg;
    r.sam_skipped = s.skipped;
    return r;
}

std::string format_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

nlohmann::ordered_json number_json(double v) {
    if (std::isfinite(v)) return v;
    return format_number(v);
}

}  // namespace

std::string report_json(const MetricsReport& report) {
    nlohmann::ordered_json j;
    j["mpsnr"] = number_json(report.mpsnr);
    j["mssim"] = number_json(report.mssim);
    j["sam_deg"] = number_json(report.sam_deg);
    auto curve = nlohmann::ordered_json::array();
    for (double v : report.band_psnr) curve.push_back(number_json(v));
    j["band_psnr"] = std::move(curve);
    return j.dump(2) + "\n";
}

std::string curve_csv(const std::vector<double>& band_psnr) {
    std::string out = "band,psnr\n";
    for (std::size_t b = 0; b < band_psnr.size(); ++b) out += std::to_string(b) + "," + format_number(band_psnr[b]) + "\n";
    return out;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

void write_report(const MetricsReport& report, const std::filesystem::path& path) {
    write_text(path, report_json(report));
}

void write_curve(const std::vector<double>& band_psnr, const std::filesystem::path& path) {
    write_text(path, curve_csv(band_psnr));
}

}  // namespace hsie::metrics
