// Acceptance checks: one PASS/FAIL line per criterion; exit status 1 if any fails.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>

#include "baselines/baselines.hpp"
#include "common/rng.hpp"
#include "metrics/metrics.hpp"
#include "model/hsie_net.hpp"
#include "numerics/adam.hpp"
#include "numerics/init.hpp"
#include "pyramid/pyramid.hpp"
#include "training/trainer.hpp"
#include "verify/verify.hpp"

using namespace hsie;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), f, args...);
    return buf;
}

void set_threads(const std::string& n) { setenv("HSIE_THREADS", n.c_str(), 1); }

// ---- 1 ----------------------------------------------------------------------
Outcome pyramid_exactness() {
    const auto t0 = Clock::now();
    double worst64 = 0;
    float worst32 = 0;
    for (int i = 0; i < 100; ++i) {
        Rng rng = Rng::stream(2024, static_cast<std::uint64_t>(i));
        nn::Tensor<double> x({16, 64, 64});
        for (std::size_t j = 0; j < x.size(); ++j) x[j] = rng.uniform();
        const auto back = pyramid::reconstruct(pyramid::decompose(x));
        for (std::size_t j = 0; j < x.size(); ++j) worst64 = std::max(worst64, std::abs(back[j] - x[j]));
        const auto xf = x.cast<float>();
        const auto backf = pyramid::reconstruct(pyramid::decompose(xf));
        for (std::size_t j = 0; j < xf.size(); ++j) worst32 = std::max(worst32, std::abs(backf[j] - xf[j]));
    }
    const double secs = seconds_since(t0);
    return {worst32 <= 1e-5f && worst64 <= 1e-12 && secs < 5.0,
            fmt("float max %.3g (<=1e-5), double max %.3g (<=1e-12), %.2fs (<5s)", worst32, worst64, secs)};
}

// ---- 2 ----------------------------------------------------------------------
Outcome gradient_suite() {
    const auto t0 = Clock::now();
    double op_worst = 0;
    std::string worst_op;
    for (const auto& c : verify::op_gradient_checks()) {
        if (c.result.max_rel_error >= op_worst) {
            op_worst = c.result.max_rel_error;
            worst_op = c.op;
        }
    }
    const auto model = verify::model_gradient_check(verify::toy_config(), 16, 16, 11);
    const double secs = seconds_since(t0);
    return {op_worst < 1e-4 && model.max_rel_error < 1e-3 && secs < 60.0,
            fmt("op max rel %.3g [%s] (<1e-4), toy model max rel %.3g over %zu params (<1e-3), %.2fs (<60s)", op_worst,
                worst_op.c_str(), model.max_rel_error, model.checked, secs)};
}

// ---- 3 ----------------------------------------------------------------------
Outcome zero_identity() {
    bool ok = true;
    std::size_t compared = 0;
    for (int trial = 0; trial < 5; ++trial) {
        const model::HsieConfig cfg = trial % 2 ? model::HsieConfig::desk() : verify::toy_config();
        const auto params = model::HsieParams<float>::zeros(cfg);
        Rng rng = Rng::stream(99, static_cast<std::uint64_t>(trial));
        nn::Tensor<float> band({1, 32, 24}), adj({cfg.k, 32, 24});
        for (std::size_t i = 0; i < band.size(); ++i) band[i] = static_cast<float>(rng.uniform());
        for (std::size_t i = 0; i < adj.size(); ++i) adj[i] = static_cast<float>(rng.uniform());
        model::ForwardTrace<float> trace;
        model::hsie_forward(band, adj, params.layout, model::LayerVars<float>::from(params, false), &trace);
        // Independently computed I_L and I_Mean.
        const auto bp = pyramid::decompose(band), ap = pyramid::decompose(adj);
        const auto mean = pyramid::mean_high_frequency(bp.high, ap.high);
        ok = ok && trace.low_restored.vec() == bp.low.vec() && trace.high_restored.vec() == mean.vec();
        compared += bp.low.size() + mean.size();
    }
    return {ok, fmt("restored low == I_L and refined high == I_Mean bitwise over %zu values", compared)};
}

// ---- 4 ----------------------------------------------------------------------
double sam_oracle_deg(const HsiCube& a, const HsiCube& b) {
    long double acc = 0;
    std::size_t n = 0;
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x) {
            long double dot = 0, na = 0, nb = 0;
            for (int c = 0; c < a.bands(); ++c) {
                const long double p = a.at(c, y, x), q = b.at(c, y, x);
                dot += p * q;
                na += p * p;
                nb += q * q;
            }
            if (na == 0 || nb == 0) continue;
            acc += std::acos(std::clamp(dot / std::sqrt(na * nb), -1.0L, 1.0L));
            ++n;
        }
    return static_cast<double>(acc / n * 180.0L / std::numbers::pi_v<long double>);
}

Outcome metric_oracles() {
    Rng rng(4);
    HsiCube x(32, 32, 8);
    for (float& v : x.values()) v = static_cast<float>(rng.uniform(0.05, 0.85));
    HsiCube shifted = x, half = x;
    for (float& v : shifted.values()) v += 0.1f;
    for (float& v : half.values()) v *= 0.5f;
    const double psnr = metrics::psnr(x.values(), shifted.values());
    const double sam_half = metrics::sam(x, half).mean_deg;
    const double ssim_self = metrics::mssim(x, x);
    double worst = 0;
    for (int i = 0; i < 20; ++i) {
        Rng r = Rng::stream(77, static_cast<std::uint64_t>(i));
        HsiCube a(9, 7, 6), b(9, 7, 6);
        for (float& v : a.values()) v = static_cast<float>(r.uniform());
        for (float& v : b.values()) v = static_cast<float>(r.uniform());
        worst = std::max(worst, std::abs(metrics::sam(a, b).mean_deg - sam_oracle_deg(a, b)));
    }
    const bool ok = std::abs(psnr - 20.0) <= 1e-6 && std::abs(sam_half) <= 1e-9 && ssim_self == 1.0 && worst <= 1e-9;
    return {ok, fmt("psnr(x,x+0.1) %.9f dB, SAM(x,0.5x) %.2g deg, MSSIM(x,x) %.17g, SAM vs oracle max %.2g deg (20 cubes)",
                    psnr, sam_half, ssim_self, worst)};
}

// ---- 5 and 6 ----------------------------------------------------------------
struct TrainingRun {
    training::TrainResult result;
    double seconds = 0;
};

struct SmokeData {
    std::vector<PatchSample> patches;
    HsiCube held_clean, held_low;
};

SmokeData smoke_data(const model::HsieConfig& cfg) {
    SmokeData d;
    const DegradeConfig deg{0.2f, 0.0f, 0.02f, 0.01f, 0.05f, 0.05f, 0};
    for (int i = 0; i < 9; ++i) {
        const std::uint64_t seed = 3 * 1000003ULL + static_cast<std::uint64_t>(i);
        const HsiCube clean = synth_scene(64, 64, 32, seed);
        DegradeConfig dc = deg;
        dc.seed = seed ^ 0x9E3779B97F4A7C15ULL;
        const HsiCube low = degrade(clean, dc);
        if (i < 8) {
            auto p = extract_patches(low, clean, 32, cfg.k);
            d.patches.insert(d.patches.end(), p.begin(), p.end());
        } else {
            d.held_clean = clean;
            d.held_low = low;
        }
    }
    return d;
}

TrainingRun run_training(const SmokeData& data, const model::HsieConfig& cfg) {
    training::TrainConfig tc;
    tc.lr0 = 2e-4;
    tc.batch_size = 16;
    tc.max_steps = 300;
    tc.seed = 3;
    tc.validate_every = 0;
    const auto t0 = Clock::now();
    TrainingRun run{training::train(data.patches, tc, cfg), 0};
    run.seconds = seconds_since(t0);
    return run;
}

// ---- 7 ----------------------------------------------------------------------
Outcome recipe() {
    training::TrainConfig tc;
    const bool lr_ok = training::lr_at(0, tc) == 2e-4 && training::lr_at(200, tc) == 1e-4 && training::lr_at(400, tc) == 5e-5;
    const nn::AdamState adam;
    const bool adam_ok = adam.beta1 == 0.9 && adam.beta2 == 0.999 && adam.eps == 1e-8;
    nn::Tensor<float> w({20, 60, 3, 3});  // 10800 samples, fan_in 540
    Rng rng(5);
    nn::kaiming_normal(w, rng);
    double mean = 0, var = 0;
    for (float v : w.vec()) mean += v;
    mean /= static_cast<double>(w.size());
    for (float v : w.vec()) var += (v - mean) * (v - mean);
    var /= static_cast<double>(w.size() - 1);
    const double rel = std::abs(var / (2.0 / 540) - 1.0);
    return {lr_ok && adam_ok && rel < 0.1,
            fmt("lr_at {0,200,400} = {%g,%g,%g}; Adam (%g,%g,%g); Kaiming variance off by %.1f%% over %zu samples",
                training::lr_at(0, tc), training::lr_at(200, tc), training::lr_at(400, tc), adam.beta1, adam.beta2,
                adam.eps, rel * 100, w.size())};
}

// ---- 8 ----------------------------------------------------------------------
Outcome preprocessing() {
    const HsiCube raw(4, 4, 224);
    const int bands = select_bands(raw, 20, 12, 3).bands();
    const HsiCube scene(390, 512, 2);
    const auto patches = extract_patches(scene, scene, 64, 1);  // 64x64 training patches
    const std::size_t per_band = patches.size() / 2;
    return {bands == 64 && per_band == 48, fmt("select_bands -> %d bands; 390x512 at 64x64 -> %zu patches per band", bands, per_band)};
}

// ---- 9 ----------------------------------------------------------------------
int run_cli(const std::string& args, const std::string& threads, const fs::path& log) {
    const std::string cmd = "HSIE_THREADS=" + threads + " \"" + HSIE_CLI_PATH + "\" " + args + " >> \"" + log.string() +
                            "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome pipeline_determinism() {
    const fs::path root = fs::temp_directory_path() / "hsie_acceptance_pipeline";
    fs::remove_all(root);
    fs::create_directories(root);
    {
        std::ofstream(root / "train.json") << R"({"preset": "desk", "max_steps": 6, "batch_size": 8, "seed": 9})";
    }
    const unsigned hw = std::max(2u, std::thread::hardware_concurrency());
    const std::vector<std::string> threads = {"1", std::to_string(hw)};
    const std::vector<std::string> files = {"data/scene_0_low.raw", "data/scene_2_clean.raw", "model.ckpt",
                                            "model_loss.csv", "model_val.csv", "enhanced.raw", "enhanced.hdr",
                                            "report.json", "curve.csv"};
    for (std::size_t r = 0; r < threads.size(); ++r) {
        const fs::path dir = root / ("run" + std::to_string(r));
        fs::create_directories(dir);
        const fs::path log = dir / "log.txt";
        const std::string d = dir.string();
        const int codes[4] = {
            run_cli("synth --out " + d + "/data --scenes 3 --height 32 --width 32 --bands 16 --seed 21", threads[r], log),
            run_cli("train --quiet --data " + d + "/data --config " + (root / "train.json").string() + " --out " + d +
                        "/model.ckpt",
                    threads[r], log),
            run_cli("enhance --ckpt " + d + "/model.ckpt --in " + d + "/data/scene_2_low --out " + d + "/enhanced",
                    threads[r], log),
            run_cli("eval --ref " + d + "/data/scene_2_clean --test " + d + "/enhanced --report " + d +
                        "/report.json --curve " + d + "/curve.csv",
                    threads[r], log)};
        for (int c : codes)
            if (c != 0) return {false, "pipeline step failed with HSIE_THREADS=" + threads[r] + "; see " + log.string()};
    }
    std::size_t bytes = 0;
    for (const auto& f : files) {
        const std::string a = slurp(root / "run0" / f), b = slurp(root / "run1" / f);
        if (a.empty() || a != b) return {false, f + " differs between HSIE_THREADS=1 and " + threads[1]};
        bytes += a.size();
    }
    return {true, fmt("synth/train/enhance/eval identical under HSIE_THREADS=1 and %s (%zu files, %zu bytes)",
                      threads[1].c_str(), files.size(), bytes)};
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&](int id, const char* name, const Outcome& o) {
        std::printf("%s  %d. %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failures;
    };
    auto guarded = [&](int id, const char* name, const std::function<Outcome()>& fn) {
        try {
            report(id, name, fn());
        } catch (const std::exception& e) {
            report(id, name, {false, std::string("threw: ") + e.what()});
        }
    };

    guarded(1, "pyramid exactness", pyramid_exactness);
    guarded(2, "gradient suite", gradient_suite);
    guarded(3, "zero-init identity", zero_identity);
    guarded(4, "metric oracles", metric_oracles);

    try {
        const model::HsieConfig cfg = model::HsieConfig::desk();
        const SmokeData data = smoke_data(cfg);
        set_threads("1");
        const TrainingRun first = run_training(data, cfg);
        const unsigned hw = std::max(2u, std::thread::hardware_concurrency());
        set_threads(std::to_string(hw));
        const TrainingRun second = run_training(data, cfg);
        unsetenv("HSIE_THREADS");

        const auto& log = first.result.log.steps;
        const double l0 = log.front().loss, l1 = log.back().loss;
        const HsiCube enhanced = training::enhance_cube(data.held_low, first.result.params);
        const double p_low = metrics::mpsnr(data.held_clean, data.held_low);
        const double p_enh = metrics::mpsnr(data.held_clean, enhanced);
        bool same = first.result.params.flatten() == second.result.params.flatten() &&
                    second.result.log.steps.size() == log.size();
        for (std::size_t i = 0; same && i < log.size(); ++i) same = log[i].loss == second.result.log.steps[i].loss;
        report(5, "training smoke",
               {log.size() == 300 && l1 <= 0.5 * l0 && p_enh >= p_low + 3.0 && first.seconds <= 600.0 && same,
                fmt("%zu steps on %zu patches, loss %.4f -> %.4f (%.1f%%), held-out MPSNR %.2f dB vs low-light %.2f dB "
                    "(+%.2f), %.0fs single-threaded, rerun with %u threads bit-identical: %s",
                    log.size(), data.patches.size(), l0, l1, 100 * l1 / l0, p_enh, p_low, p_enh - p_low, first.seconds,
                    hw, same ? "yes" : "no")});

        const double sam_hsie = metrics::sam(data.held_clean, enhanced).mean_deg;
        std::string detail = fmt("SAM HSIE %.3f deg", sam_hsie);
        bool lower = true;
        for (auto m : {baselines::Method::He, baselines::Method::Clahe, baselines::Method::Msr}) {
            const double s = metrics::sam(data.held_clean, baselines::apply(data.held_low, m)).mean_deg;
            lower = lower && sam_hsie < s;
            detail += fmt(", %s %.3f", baselines::method_name(m).c_str(), s);
        }
        report(6, "baseline ordering", {lower, detail});
    } catch (const std::exception& e) {
        report(5, "training smoke", {false, std::string("threw: ") + e.what()});
        report(6, "baseline ordering", {false, "no trained model"});
    }

    guarded(7, "schedule and recipe", recipe);
    guarded(8, "preprocessing", preprocessing);
    guarded(9, "pipeline determinism", pipeline_determinism);

    std::printf("%s: %d failure(s)\n", failures ? "FAILED" : "ALL PASSED", failures);
    return failures ? 1 : 0;
}
