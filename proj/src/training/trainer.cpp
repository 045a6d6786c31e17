#include "training/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "common/parallel.hpp"
#include "common/rng.hpp"
#include "metrics/metrics.hpp"
#include "numerics/ops.hpp"
#include "training/checkpoint.hpp"

namespace hsie::training {

void TrainConfig::validate() const {
    require(lr0 > 0, "train config: lr0 must be positive");
    require(lr_step_epochs >= 1, "train config: lr_step_epochs must be >= 1");
    require(epochs >= 1, "train config: epochs must be >= 1");
    require(max_steps >= 0, "train config: max_steps must be >= 0");
    require(batch_size >= 1, "train config: batch_size must be >= 1");
    require(validate_every >= 0 && checkpoint_every >= 0, "train config: intervals must be >= 0");
}

double lr_at(int epoch, const TrainConfig& cfg) {
    require(epoch >= 0, "lr_at: epoch must be >= 0");
    return cfg.lr0 * std::ldexp(1.0, -(epoch / cfg.lr_step_epochs));
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

std::string TrainLog::steps_csv() const {
    std::string out = "step,loss,lr\n";
    for (const auto& s : steps) out += std::to_string(s.step) + "," + fmt(s.loss) + "," + fmt(s.lr) + "\n";
    return out;
}

std::string TrainLog::epochs_csv() const {
    std::string out = "epoch,mpsnr,mssim,sam\n";
    for (const auto& e : epochs)
        out += std::to_string(e.epoch) + "," + fmt(e.mpsnr) + "," + fmt(e.mssim) + "," + fmt(e.sam) + "\n";
    return out;
}

void TrainLog::write(const std::filesystem::path& steps_path, const std::filesystem::path& epochs_path) const {
    write_text(steps_path, steps_csv());
    write_text(epochs_path, epochs_csv());
}

SampleGrad sample_gradient(const PatchSample& sample, const model::HsieParams<float>& params, LossKind loss) {
    auto vars = model::LayerVars<float>::from(params, true);
    auto out = model::hsie_forward(sample.band_patch, sample.cube_patch, params.layout, vars);
    auto target = nn::leaf(sample.label_patch);
    auto l = loss == LossKind::L1 ? nn::l1_loss(out, target) : nn::l2_loss(out, target);
    nn::backward(l);
    return {static_cast<double>(l->value[0]), vars.flat_grad(params.layout)};
}

TrainResult train(const std::vector<PatchSample>& dataset, const TrainConfig& cfg, const model::HsieConfig& model_cfg,
                  const std::vector<ValidationPair>& validation, const ProgressFn& progress,
                  const model::HsieParams<float>* initial) {
    cfg.validate();
    model_cfg.validate();
    require(!dataset.empty(), "train: empty dataset");
    const auto& first = dataset.front();
    for (const auto& s : dataset) {
        require(s.band_patch.shape() == first.band_patch.shape() && s.label_patch.shape() == first.band_patch.shape(),
                "train: patches differ in shape");
        require(s.cube_patch.rank() == 3 && s.cube_patch.channels() == model_cfg.k,
                "train: patch carries " + std::to_string(s.cube_patch.rank() == 3 ? s.cube_patch.channels() : 0) +
                    " adjacent bands, model expects k=" + std::to_string(model_cfg.k));
    }

    TrainResult result;
    if (initial) {
        require(initial->config() == model_cfg, "train: initial parameters do not match the model config");
        result.params = *initial;
    } else {
        result.params = model::init_model(model_cfg, cfg.seed);
    }
    std::vector<float> flat = result.params.flatten();
    result.optimizer.reset(flat.size());

    const std::size_t n = dataset.size();
    const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);
    std::int64_t step = 0;
    bool done = false;

    auto save = [&](const model::HsieParams<float>& params, int epoch) {
        if (cfg.checkpoint_path.empty()) return;
        save_checkpoint({params, result.optimizer, static_cast<std::uint32_t>(epoch)}, cfg.checkpoint_path);
    };

    for (int epoch = 0; epoch < cfg.epochs && !done; ++epoch) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng shuffle = Rng::stream(cfg.seed, 0xE90C0000ULL + static_cast<std::uint64_t>(epoch));
        for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);

        const double lr = lr_at(epoch, cfg);
        for (std::size_t start = 0; start < n; start += batch) {
            if (cfg.max_steps > 0 && step >= cfg.max_steps) {
                done = true;
                break;
            }
            const std::size_t count = std::min(batch, n - start);
            std::vector<SampleGrad> grads(count);
            parallel_for(count, [&](std::size_t i) {
                grads[i] = sample_gradient(dataset[order[start + i]], result.params, cfg.loss);
            });

            // Fixed-order reduction.
            std::vector<double> total(flat.size(), 0.0);
            double loss = 0;
            for (const auto& g : grads) {
                loss += g.loss;
                for (std::size_t j = 0; j < total.size(); ++j) total[j] += g.grad[j];
            }
            loss /= static_cast<double>(count);
            std::vector<float> mean(flat.size());
            for (std::size_t j = 0; j < total.size(); ++j) mean[j] = static_cast<float>(total[j] / static_cast<double>(count));

            const bool finite_grad = std::all_of(mean.begin(), mean.end(), [](float g) { return std::isfinite(g); });
            if (!std::isfinite(loss) || !finite_grad) {
                save(result.params, epoch);
                std::string msg = std::string(std::isfinite(loss) ? "non-finite gradient" : "non-finite loss") +
                                  " at step " + std::to_string(step);
                if (!cfg.checkpoint_path.empty()) msg += "; last good checkpoint: " + cfg.checkpoint_path.string();
                throw NumericError(msg);
            }
            nn::adam_step(flat, mean, result.optimizer, lr);
            result.params.unflatten(flat);

            TrainLog::Step entry{step, epoch, loss, lr};
            result.log.steps.push_back(entry);
            if (progress) progress(entry);
            ++step;
        }
        result.epochs_completed = epoch + 1;

        if (!validation.empty() && cfg.validate_every > 0 && (epoch + 1) % cfg.validate_every == 0) {
            double p = 0, s = 0, a = 0;
            for (const auto& pair : validation) {
                const auto enhanced = enhance_cube(pair.low, result.params);
                p += metrics::mpsnr(pair.clean, enhanced);
                s += metrics::mssim(pair.clean, enhanced);
                a += metrics::sam(pair.clean, enhanced).mean_deg;
            }
            const double m = static_cast<double>(validation.size());
            result.log.epochs.push_back({epoch, p / m, s / m, a / m});
        }
        if (cfg.checkpoint_every > 0 && (epoch + 1) % cfg.checkpoint_every == 0) save(result.params, epoch + 1);
    }
    return result;
}

}  // namespace hsie::training
