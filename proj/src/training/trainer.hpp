#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "hsidata/cube.hpp"
#include "model/hsie_net.hpp"
#include "numerics/adam.hpp"

namespace hsie::training {

enum class LossKind { L1, L2 };

struct TrainConfig {
    double lr0 = 2e-4;
    int lr_step_epochs = 200;  // learning rate halves every this many epochs
    int epochs = 600;
    int max_steps = 0;         // 0: run all epochs
    int batch_size = 16;
    LossKind loss = LossKind::L1;
    std::uint64_t seed = 1;
    int validate_every = 1;    // epochs between validation passes (0: never)
    int checkpoint_every = 0;  // epochs between checkpoints (0: only on failure)
    std::filesystem::path checkpoint_path;  // empty: no checkpoint files

    void validate() const;
};

/// lr0 * 0.5^floor(epoch / lr_step_epochs).
double lr_at(int epoch, const TrainConfig& cfg);

struct TrainLog {
    struct Step {
        std::int64_t step;
        int epoch;
        double loss;
        double lr;
    };
    struct Epoch {
        int epoch;
        double mpsnr, mssim, sam;
    };
    std::vector<Step> steps;
    std::vector<Epoch> epochs;

    std::string steps_csv() const;   // step,loss,lr
    std::string epochs_csv() const;  // epoch,mpsnr,mssim,sam
    void write(const std::filesystem::path& steps_path, const std::filesystem::path& epochs_path) const;
};

struct ValidationPair {
    HsiCube low;
    HsiCube clean;
};

struct TrainResult {
    model::HsieParams<float> params;
    nn::AdamState optimizer;
    TrainLog log;
    int epochs_completed = 0;
};

using ProgressFn = std::function<void(const TrainLog::Step&)>;

/// Mini-batch Adam on the per-patch loss between the network output and the
/// label patch. Per-sample gradients may be computed in parallel; they are
/// summed in batch order, so results do not depend on the worker count.
/// A non-finite loss raises NumericError; when a checkpoint path is set, the
/// parameters from before the failing step are saved there first.
TrainResult train(const std::vector<PatchSample>& dataset, const TrainConfig& cfg, const model::HsieConfig& model_cfg,
                  const std::vector<ValidationPair>& validation = {}, const ProgressFn& progress = {},
                  const model::HsieParams<float>* initial = nullptr);

/// Loss and flat gradient for one sample (exposed for tests).
struct SampleGrad {
    double loss;
    std::vector<float> grad;
};
SampleGrad sample_gradient(const PatchSample& sample, const model::HsieParams<float>& params, LossKind loss);

// Inference over whole bands (fully convolutional, no patching), clamped to [0,1].
std::vector<float> enhance_band(const HsiCube& cube, int band_index, const model::HsieParams<float>& params);
HsiCube enhance_cube(const HsiCube& cube, const model::HsieParams<float>& params, int workers = 0);

}  // namespace hsie::training
