#include "verify/verify.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

#include "common/rng.hpp"
#include "hsidata/cube.hpp"
#include "metrics/metrics.hpp"
#include "model/hsie_net.hpp"
#include "numerics/init.hpp"
#include "numerics/ops.hpp"
#include "pyramid/pyramid.hpp"

namespace hsie::verify {

using nn::Tensor;
using nn::Var;

namespace {

Tensor<double> random_tensor(const nn::Shape& shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Tensor<double> t(shape);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

// Values bounded away from zero, so kinks (relu, |x|) are never straddled by the stencil.
Tensor<double> away_from_zero(const nn::Shape& shape, Rng& rng) {
    Tensor<double> t(shape);
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double m = rng.uniform(0.1, 1.0);
        t[i] = rng.uniform() < 0.5 ? -m : m;
    }
    return t;
}

double elapsed(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

}  // namespace

std::vector<OpCheck> op_gradient_checks() {
    Rng rng(0xC0FFEE);
    std::vector<OpCheck> out;
    auto run = [&](std::string name, const nn::GradOp& op, std::vector<Tensor<double>> inputs,
                   std::vector<bool> frozen = {}) {
        out.push_back({std::move(name), nn::grad_check(op, inputs, 1e-6, 7, 1e-3, frozen)});
    };

    run("conv2d", [](const auto& v) { return nn::conv2d(v[0], v[1], v[2]); },
        {random_tensor({2, 5, 6}, rng), random_tensor({3, 2, 3, 3}, rng), random_tensor({3}, rng)});
    run("conv2d_5x5_nobias", [](const auto& v) { return nn::conv2d(v[0], v[1], Var<double>{}); },
        {random_tensor({2, 6, 5}, rng), random_tensor({2, 2, 5, 5}, rng)});
    run("conv2d_1x1", [](const auto& v) { return nn::conv2d(v[0], v[1], v[2]); },
        {random_tensor({4, 3, 3}, rng), random_tensor({2, 4, 1, 1}, rng), random_tensor({2}, rng)});
    run("conv1d", [](const auto& v) { return nn::conv1d(v[0], v[1], Var<double>{}); },
        {random_tensor({7}, rng), random_tensor({1, 1, 3}, rng)});
    run("global_avg_pool", [](const auto& v) { return nn::global_avg_pool(v[0]); }, {random_tensor({3, 4, 5}, rng)});
    run("relu", [](const auto& v) { return nn::relu(v[0]); }, {away_from_zero({2, 4, 4}, rng)});
    run("sigmoid", [](const auto& v) { return nn::sigmoid(v[0]); }, {random_tensor({2, 4, 4}, rng, -4.0, 4.0)});
    run("concat", [](const auto& v) { return nn::concat<double>({v[0], v[1], v[2]}); },
        {random_tensor({1, 3, 4}, rng), random_tensor({2, 3, 4}, rng), random_tensor({1, 3, 4}, rng)});
    run("add", [](const auto& v) { return nn::add(v[0], v[1]); },
        {random_tensor({2, 3, 3}, rng), random_tensor({2, 3, 3}, rng)});
    run("mul", [](const auto& v) { return nn::mul(v[0], v[1]); },
        {random_tensor({2, 3, 3}, rng), random_tensor({2, 3, 3}, rng)});
    run("mul_channel", [](const auto& v) { return nn::mul_channel(v[0], v[1]); },
        {random_tensor({3, 4, 4}, rng), random_tensor({3}, rng)});
    run("add_scalar", [](const auto& v) { return nn::add_scalar(v[0], 0.75); }, {random_tensor({2, 3, 3}, rng)});
    run("bilinear_upsample_x2", [](const auto& v) { return nn::bilinear_upsample_x2(v[0]); },
        {random_tensor({2, 4, 5}, rng)});
    run("laplacian_upscale", [](const auto& v) { return nn::laplacian_upscale(v[0]); },
        {random_tensor({2, 4, 5}, rng)});
    run("blur_downsample",
        [](const auto& v) {
            const auto k = pyramid::GaussianKernel::binomial();
            return nn::resample2d(v[0], nn::blur_down_map(8, k), nn::blur_down_map(6, k));
        },
        {random_tensor({2, 8, 6}, rng)});
    {
        Tensor<double> pred = random_tensor({1, 5, 5}, rng);
        Tensor<double> target = pred;
        Tensor<double> offset = away_from_zero({1, 5, 5}, rng);
        for (std::size_t i = 0; i < target.size(); ++i) target[i] += offset[i];
        run("l1_loss", [](const auto& v) { return nn::l1_loss(v[0], v[1]); }, {pred, target});
    }
    run("l2_loss", [](const auto& v) { return nn::l2_loss(v[0], v[1]); },
        {random_tensor({1, 5, 5}, rng), random_tensor({1, 5, 5}, rng)});
    return out;
}

model::HsieConfig toy_config() {
    model::HsieConfig cfg;
    cfg.k = 4;
    cfg.feat = 6;
    cfg.n_cab = 1;
    cfg.n_dense = 2;
    cfg.eca_kernel = 3;
    cfg.mask_channels = 4;
    cfg.growth = 6;
    return cfg;
}

nn::GradCheckResult model_gradient_check(const model::HsieConfig& cfg, int height, int width, std::uint64_t seed) {
    cfg.validate();
    const auto params = model::init_model(cfg, seed).cast<double>();
    const model::Layout& layout = params.layout;

    Rng rng = Rng::stream(seed, 0xD47A);
    const Tensor<double> band = random_tensor({1, height, width}, rng, 0.0, 1.0);
    const Tensor<double> adjacent = random_tensor({cfg.k, height, width}, rng, 0.0, 1.0);
    const Tensor<double> target = random_tensor({1, height, width}, rng, 0.0, 1.0);

    // Flat input list: weight, then bias where present, per layer. Biases get small
    // random values so their paths are exercised away from the zero-init point.
    std::vector<Tensor<double>> inputs;
    for (std::size_t i = 0; i < layout.layers.size(); ++i) {
        inputs.push_back(params.weights[i]);
        if (layout.layers[i].has_bias) inputs.push_back(random_tensor(params.biases[i].shape(), rng, -0.05, 0.05));
    }

    const nn::GradOp op = [&](const std::vector<Var<double>>& leaves) {
        model::LayerVars<double> vars;
        std::size_t j = 0;
        for (const auto& spec : layout.layers) {
            vars.weight.push_back(leaves[j++]);
            vars.bias.push_back(spec.has_bias ? leaves[j++] : Var<double>{});
        }
        const auto output = model::hsie_forward(band, adjacent, layout, vars);
        return nn::l2_loss(output, nn::leaf(target));
    };
    return nn::grad_check(op, inputs, 1e-6, seed, 1e-3);
}

SuiteResult gradient_suite() {
    const auto start = std::chrono::steady_clock::now();
    SuiteResult r{"gradient", true, 0, kOpTolerance, {}, 0};
    std::string first_failure;
    for (const auto& c : op_gradient_checks()) {
        r.max_error = std::max(r.max_error, c.result.max_rel_error);
        if (!(c.result.max_rel_error < kOpTolerance) && first_failure.empty())
            first_failure = c.op + " rel error " + fmt(c.result.max_rel_error);
    }
    const auto model = model_gradient_check(toy_config(), 16, 16, 11);
    if (!(model.max_rel_error < kModelTolerance) && first_failure.empty())
        first_failure = "end-to-end model rel error " + fmt(model.max_rel_error);
    r.passed = first_failure.empty();
    r.detail = r.passed ? "ops max " + fmt(r.max_error) + ", model max " + fmt(model.max_rel_error) + " over " +
                              std::to_string(model.checked) + " parameters"
                        : first_failure;
    r.max_error = std::max(r.max_error, model.max_rel_error);
    r.seconds = elapsed(start);
    return r;
}

SuiteResult pyramid_suite(const Options& opts) {
    const auto start = std::chrono::steady_clock::now();
    SuiteResult r{"pyramid", true, 0, 1e-12, {}, 0};
    pyramid::GaussianKernel kernel = pyramid::GaussianKernel::binomial();
    if (opts.corrupt_kernel) kernel.taps[0] += 1e-3;

    std::string failure;
    auto fail = [&](const std::string& what) {
        if (failure.empty()) failure = what;
    };

    if (auto msg = kernel.check(); !msg.empty()) fail("kernel: " + msg);
    r.max_error = std::max(r.max_error, std::abs(kernel.sum() - 1.0));

    // A constant image has no detail: the high-frequency part must vanish.
    {
        Tensor<double> flat({2, 16, 16}, 0.37);
        const auto pair = pyramid::decompose(flat, kernel);
        double worst = 0;
        for (std::size_t i = 0; i < pair.high.size(); ++i) worst = std::max(worst, std::abs(pair.high[i]));
        r.max_error = std::max(r.max_error, worst);
        if (worst > 1e-12) fail("constant input leaves high-frequency residue " + fmt(worst));
    }

    // Exact invertibility in both precisions.
    double worst64 = 0, worst32 = 0;
    Rng rng(0x9F2A);
    for (int trial = 0; trial < 8; ++trial) {
        const Tensor<double> x = random_tensor({16, 64, 64}, rng, 0.0, 1.0);
        const auto back = pyramid::reconstruct(pyramid::decompose(x, kernel), kernel);
        for (std::size_t i = 0; i < x.size(); ++i) worst64 = std::max(worst64, std::abs(back[i] - x[i]));
        const Tensor<float> xf = x.cast<float>();
        const auto backf = pyramid::reconstruct(pyramid::decompose(xf, kernel), kernel);
        for (std::size_t i = 0; i < xf.size(); ++i)
            worst32 = std::max(worst32, static_cast<double>(std::abs(backf[i] - xf[i])));
    }
    if (worst64 > 1e-12) fail("64-bit round trip error " + fmt(worst64));
    if (worst32 > 1e-5) fail("32-bit round trip error " + fmt(worst32));
    r.max_error = std::max(r.max_error, worst64);

    r.passed = failure.empty();
    r.detail = r.passed ? "round trip 64-bit " + fmt(worst64) + ", 32-bit " + fmt(worst32) : failure;
    r.seconds = elapsed(start);
    return r;
}

SuiteResult metrics_suite() {
    const auto start = std::chrono::steady_clock::now();
    SuiteResult r{"metrics", true, 0, 1e-6, {}, 0};
    std::string failure;
    auto check = [&](const std::string& what, double err, double tol) {
        r.max_error = std::max(r.max_error, err);
        if (!(err <= tol) && failure.empty()) failure = what + " off by " + fmt(err);
    };

    const HsiCube x = synth_scene(32, 32, 6, 3);

    HsiCube shifted = x;
    for (float& v : shifted.values()) v += 0.1f;
    check("psnr(x, x+0.1) vs 20 dB", std::abs(metrics::psnr(x.band(0), shifted.band(0)) - 20.0), 1e-6);

    HsiCube half = x;
    for (float& v : half.values()) v *= 0.5f;
    check("sam(x, 0.5x) vs 0", metrics::sam(x, half).mean_deg, 1e-9);
    check("mssim(x, x) vs 1", std::abs(metrics::mssim(x, x) - 1.0), 0.0);

    // Per-pixel arccos oracle in extended precision.
    Rng rng(0x5A11);
    for (int trial = 0; trial < 5; ++trial) {
        HsiCube a(7, 9, 5), b(7, 9, 5);
        for (float& v : a.values()) v = static_cast<float>(rng.uniform(0.01, 1.0));
        for (float& v : b.values()) v = static_cast<float>(rng.uniform(0.01, 1.0));
        long double total = 0;
        for (int y = 0; y < 7; ++y)
            for (int xx = 0; xx < 9; ++xx) {
                long double dot = 0, na = 0, nb = 0;
                for (int band = 0; band < 5; ++band) {
                    const long double p = a.at(band, y, xx), q = b.at(band, y, xx);
                    dot += p * q;
                    na += p * p;
                    nb += q * q;
                }
                total += std::acos(dot / std::sqrt(na * nb)) * 180.0L / std::numbers::pi_v<long double>;
            }
        const double oracle = static_cast<double>(total / 63.0L);
        check("sam vs per-pixel oracle", std::abs(metrics::sam(a, b).mean_deg - oracle), 1e-9);
    }

    r.passed = failure.empty();
    r.detail = r.passed ? "all oracles within tolerance" : failure;
    r.seconds = elapsed(start);
    return r;
}

std::vector<SuiteResult> run_all(const Options& opts, const std::function<void(const SuiteResult&)>& sink) {
    std::vector<SuiteResult> results;
    for (auto suite : {0, 1, 2}) {
        SuiteResult r = suite == 0 ? gradient_suite() : suite == 1 ? pyramid_suite(opts) : metrics_suite();
        if (sink) sink(r);
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace hsie::verify
