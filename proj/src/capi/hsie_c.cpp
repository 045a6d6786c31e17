#include "hsie/hsie.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <new>
#include <string>

#include "baselines/baselines.hpp"
#include "common/error.hpp"
#include "hsidata/cube.hpp"
#include "metrics/metrics.hpp"
#include "pyramid/pyramid.hpp"
#include "training/checkpoint.hpp"
#include "training/trainer.hpp"
#include "verify/verify.hpp"

struct hsie_cube {
    hsie::HsiCube cube;
};
struct hsie_report {
    hsie::metrics::MetricsReport report;
};
struct hsie_model {
    hsie::model::HsieParams<float> params;
    std::optional<hsie::nn::AdamState> optimizer;
    std::uint32_t epoch = 0;
};
struct hsie_dataset {
    int k = 0;
    int patch = 0;
    std::vector<hsie::PatchSample> samples;
    std::vector<hsie::training::ValidationPair> validation;
};
struct hsie_train_log {
    hsie::training::TrainLog log;
};

namespace {

thread_local std::string g_last_error;

hsie_status fail(hsie_status status, std::string message) {
    g_last_error = std::move(message);
    return status;
}

/// Runs `body`, translating exceptions into status codes.
template <typename F>
hsie_status guarded(F&& body) {
    g_last_error.clear();
    try {
        body();
        return HSIE_OK;
    } catch (const hsie::Error& e) {
        return fail(static_cast<hsie_status>(e.kind()), e.what());
    } catch (const std::bad_alloc&) {
        return fail(HSIE_ERR_INTERNAL, "out of memory");
    } catch (const std::filesystem::filesystem_error& e) {
        return fail(HSIE_ERR_IO, e.what());
    } catch (const std::exception& e) {
        return fail(HSIE_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(HSIE_ERR_INTERNAL, "unknown error");
    }
}

void need(const void* p, const char* what) {
    if (!p) throw hsie::ValidationError(std::string(what) + " must not be null");
}

hsie::model::HsieConfig to_cpp(const hsie_model_config& c) {
    return {c.k, c.feat, c.n_cab, c.n_dense, c.eca_kernel, c.mask_channels, c.growth};
}

hsie_model_config to_c(const hsie::model::HsieConfig& c) {
    return {c.k, c.feat, c.n_cab, c.n_dense, c.eca_kernel, c.mask_channels, c.growth};
}

hsie::training::TrainConfig to_cpp(const hsie_train_config& c) {
    hsie::training::TrainConfig t;
    t.lr0 = c.lr0;
    t.lr_step_epochs = c.lr_step_epochs;
    t.epochs = c.epochs;
    t.max_steps = c.max_steps;
    t.batch_size = c.batch_size;
    t.loss = c.loss == HSIE_LOSS_L2 ? hsie::training::LossKind::L2 : hsie::training::LossKind::L1;
    t.seed = c.seed;
    t.validate_every = c.validate_every;
    t.checkpoint_every = c.checkpoint_every;
    if (c.checkpoint_path) t.checkpoint_path = c.checkpoint_path;
    return t;
}

hsie_cube* wrap(hsie::HsiCube cube) { return new hsie_cube{std::move(cube)}; }

}  // namespace

extern "C" {

const char* hsie_last_error(void) { return g_last_error.c_str(); }
const char* hsie_version(void) { return "1.0.0"; }

hsie_status hsie_cube_create(int height, int width, int bands, const float* values, hsie_cube** out) {
    return guarded([&] {
        need(out, "out");
        hsie::HsiCube cube(height, width, bands);
        if (values) std::copy(values, values + cube.size(), cube.values().begin());
        *out = wrap(std::move(cube));
    });
}

void hsie_cube_free(hsie_cube* cube) { delete cube; }

hsie_status hsie_cube_dims(const hsie_cube* cube, int* height, int* width, int* bands) {
    return guarded([&] {
        need(cube, "cube");
        if (height) *height = cube->cube.height();
        if (width) *width = cube->cube.width();
        if (bands) *bands = cube->cube.bands();
    });
}

float* hsie_cube_data(hsie_cube* cube) { return cube ? cube->cube.values().data() : nullptr; }
const float* hsie_cube_data_const(const hsie_cube* cube) { return cube ? cube->cube.values().data() : nullptr; }

hsie_status hsie_cube_read(const char* path, hsie_cube** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = wrap(hsie::read_cube(path));
    });
}

hsie_status hsie_cube_write(const hsie_cube* cube, const char* path) {
    return guarded([&] {
        need(cube, "cube");
        need(path, "path");
        hsie::write_cube(cube->cube, path);
    });
}

hsie_status hsie_select_bands(const hsie_cube* cube, int drop_front, int drop_back, int stride, hsie_cube** out) {
    return guarded([&] {
        need(cube, "cube");
        need(out, "out");
        *out = wrap(hsie::select_bands(cube->cube, drop_front, drop_back, stride));
    });
}

hsie_status hsie_normalize(const hsie_cube* cube, hsie_cube** out) {
    return guarded([&] {
        need(cube, "cube");
        need(out, "out");
        *out = wrap(hsie::normalize(cube->cube));
    });
}

hsie_status hsie_adjacent_window(int band_index, int total_bands, int k, int* out_indices) {
    return guarded([&] {
        need(out_indices, "out_indices");
        const auto w = hsie::adjacent_window(band_index, total_bands, k);
        std::copy(w.begin(), w.end(), out_indices);
    });
}

hsie_status hsie_patch_count(int height, int width, int bands, int patch, size_t* out) {
    return guarded([&] {
        need(out, "out");
        hsie::require(height > 0 && width > 0 && bands > 0, "patch_count: dimensions must be positive");
        hsie::require(patch >= 1 && patch <= height && patch <= width, "patch_count: patch size out of range");
        *out = static_cast<size_t>(height / patch) * static_cast<size_t>(width / patch) * static_cast<size_t>(bands);
    });
}

hsie_degrade_config hsie_degrade_config_default(void) {
    const hsie::DegradeConfig d;
    return {d.gain, d.gain_variation, d.gaussian_sigma, d.impulse_fraction, d.stripe_fraction, d.stripe_amplitude,
            d.seed};
}

hsie_status hsie_synth_scene(int height, int width, int bands, uint64_t seed, hsie_cube** out) {
    return guarded([&] {
        need(out, "out");
        *out = wrap(hsie::synth_scene(height, width, bands, seed));
    });
}

hsie_status hsie_degrade(const hsie_cube* clean, const hsie_degrade_config* cfg, hsie_cube** out) {
    return guarded([&] {
        need(clean, "clean");
        need(cfg, "cfg");
        need(out, "out");
        hsie::DegradeConfig d{cfg->gain,          cfg->gain_variation,   cfg->gaussian_sigma, cfg->impulse_fraction,
                              cfg->stripe_fraction, cfg->stripe_amplitude, cfg->seed};
        *out = wrap(hsie::degrade(clean->cube, d));
    });
}

hsie_status hsie_decompose(const hsie_cube* cube, hsie_cube** high, hsie_cube** low) {
    return guarded([&] {
        need(cube, "cube");
        need(high, "high");
        need(low, "low");
        auto pyr = hsie::pyramid::decompose_cube(cube->cube);
        auto h = std::make_unique<hsie_cube>(hsie_cube{hsie::HsiCube(std::move(pyr.high))});
        auto l = std::make_unique<hsie_cube>(hsie_cube{hsie::HsiCube(std::move(pyr.low))});
        *high = h.release();
        *low = l.release();
    });
}

hsie_status hsie_reconstruct(const hsie_cube* high, const hsie_cube* low, hsie_cube** out) {
    return guarded([&] {
        need(high, "high");
        need(low, "low");
        need(out, "out");
        hsie::require(high->cube.bands() == low->cube.bands(), "reconstruct: band counts differ");
        hsie::pyramid::PyramidPair<float> pair{high->cube.tensor(), low->cube.tensor()};
        *out = wrap(hsie::HsiCube(hsie::pyramid::reconstruct(pair)));
    });
}

hsie_status hsie_baseline(const hsie_cube* cube, const char* method, hsie_cube** out) {
    return guarded([&] {
        need(cube, "cube");
        need(method, "method");
        need(out, "out");
        *out = wrap(hsie::baselines::apply(cube->cube, hsie::baselines::parse_method(method)));
    });
}

hsie_status hsie_evaluate(const hsie_cube* ref, const hsie_cube* test, hsie_report** out) {
    return guarded([&] {
        need(ref, "ref");
        need(test, "test");
        need(out, "out");
        *out = new hsie_report{hsie::metrics::evaluate(ref->cube, test->cube)};
    });
}

void hsie_report_free(hsie_report* report) { delete report; }
double hsie_report_mpsnr(const hsie_report* r) { return r ? r->report.mpsnr : NAN; }
double hsie_report_mssim(const hsie_report* r) { return r ? r->report.mssim : NAN; }
double hsie_report_sam(const hsie_report* r) { return r ? r->report.sam_deg : NAN; }
size_t hsie_report_band_count(const hsie_report* r) { return r ? r->report.band_psnr.size() : 0; }
double hsie_report_band_psnr(const hsie_report* r, size_t band) {
    return r && band < r->report.band_psnr.size() ? r->report.band_psnr[band] : NAN;
}

hsie_status hsie_report_write_json(const hsie_report* report, const char* path) {
    return guarded([&] {
        need(report, "report");
        need(path, "path");
        hsie::metrics::write_report(report->report, path);
    });
}

hsie_status hsie_report_write_curve(const hsie_report* report, const char* path) {
    return guarded([&] {
        need(report, "report");
        need(path, "path");
        hsie::metrics::write_curve(report->report.band_psnr, path);
    });
}

hsie_model_config hsie_model_config_default(void) { return to_c(hsie::model::HsieConfig::full()); }
hsie_model_config hsie_model_config_desk(void) { return to_c(hsie::model::HsieConfig::desk()); }

hsie_status hsie_model_config_validate(const hsie_model_config* cfg) {
    return guarded([&] {
        need(cfg, "cfg");
        to_cpp(*cfg).validate();
    });
}

hsie_status hsie_model_init(const hsie_model_config* cfg, uint64_t seed, hsie_model** out) {
    return guarded([&] {
        need(cfg, "cfg");
        need(out, "out");
        *out = new hsie_model{hsie::model::init_model(to_cpp(*cfg), seed), std::nullopt, 0};
    });
}

hsie_status hsie_model_load(const char* path, const hsie_model_config* expected, hsie_model** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        std::optional<hsie::model::HsieConfig> exp;
        if (expected) exp = to_cpp(*expected);
        auto ckpt = hsie::training::load_checkpoint(path, exp ? &*exp : nullptr);
        *out = new hsie_model{std::move(ckpt.params), std::move(ckpt.optimizer), ckpt.epoch};
    });
}

hsie_status hsie_model_save(const hsie_model* model, const char* path) {
    return guarded([&] {
        need(model, "model");
        need(path, "path");
        hsie::training::save_checkpoint({model->params, model->optimizer, model->epoch}, path);
    });
}

void hsie_model_free(hsie_model* model) { delete model; }

hsie_status hsie_model_get_config(const hsie_model* model, hsie_model_config* out) {
    return guarded([&] {
        need(model, "model");
        need(out, "out");
        *out = to_c(model->params.config());
    });
}

size_t hsie_model_param_count(const hsie_model* model) { return model ? model->params.param_count() : 0; }

hsie_status hsie_enhance(const hsie_model* model, const hsie_cube* cube, hsie_cube** out) {
    return guarded([&] {
        need(model, "model");
        need(cube, "cube");
        need(out, "out");
        *out = wrap(hsie::training::enhance_cube(cube->cube, model->params));
    });
}

hsie_train_config hsie_train_config_default(void) {
    const hsie::training::TrainConfig t;
    return {t.lr0,  t.lr_step_epochs,  t.epochs, t.max_steps, t.batch_size, HSIE_LOSS_L1, t.seed, t.validate_every,
            t.checkpoint_every, nullptr};
}

double hsie_lr_at(int epoch, const hsie_train_config* cfg) {
    if (!cfg) return NAN;
    return hsie::training::lr_at(epoch, to_cpp(*cfg));
}

hsie_status hsie_dataset_create(int k, int patch, hsie_dataset** out) {
    return guarded([&] {
        need(out, "out");
        hsie::require(k >= 0, "dataset: k must be non-negative");
        hsie::require(patch >= 1, "dataset: patch must be positive");
        *out = new hsie_dataset{k, patch, {}, {}};
    });
}

void hsie_dataset_free(hsie_dataset* dataset) { delete dataset; }

hsie_status hsie_dataset_add_pair(hsie_dataset* dataset, const hsie_cube* low, const hsie_cube* clean) {
    return guarded([&] {
        need(dataset, "dataset");
        need(low, "low");
        need(clean, "clean");
        auto patches = hsie::extract_patches(low->cube, clean->cube, dataset->patch, dataset->k);
        for (auto& p : patches) dataset->samples.push_back(std::move(p));
    });
}

hsie_status hsie_dataset_add_validation(hsie_dataset* dataset, const hsie_cube* low, const hsie_cube* clean) {
    return guarded([&] {
        need(dataset, "dataset");
        need(low, "low");
        need(clean, "clean");
        hsie::require(low->cube.tensor().shape() == clean->cube.tensor().shape(),
                      "validation pair: low-light and clean cubes differ in shape");
        dataset->validation.push_back({low->cube, clean->cube});
    });
}

size_t hsie_dataset_size(const hsie_dataset* dataset) { return dataset ? dataset->samples.size() : 0; }

hsie_status hsie_train(const hsie_dataset* dataset, const hsie_train_config* cfg, const hsie_model_config* model_cfg,
                       const hsie_model* initial, hsie_progress_fn progress, void* user, hsie_model** out_model,
                       hsie_train_log** out_log) {
    return guarded([&] {
        need(dataset, "dataset");
        need(cfg, "cfg");
        need(model_cfg, "model_cfg");
        need(out_model, "out_model");
        hsie::require(!dataset->samples.empty(), "train: dataset is empty");
        const auto mc = to_cpp(*model_cfg);
        if (initial)
            hsie::require(initial->params.config() == mc, "train: initial model does not match the model config");
        hsie::training::ProgressFn fn;
        if (progress)
            fn = [&](const hsie::training::TrainLog::Step& s) { progress(s.step, s.epoch, s.loss, s.lr, user); };
        auto result = hsie::training::train(dataset->samples, to_cpp(*cfg), mc, dataset->validation, fn,
                                            initial ? &initial->params : nullptr);
        auto model = std::make_unique<hsie_model>(hsie_model{std::move(result.params), std::move(result.optimizer),
                                                             static_cast<std::uint32_t>(result.epochs_completed)});
        if (out_log) *out_log = new hsie_train_log{std::move(result.log)};
        *out_model = model.release();
    });
}

void hsie_train_log_free(hsie_train_log* log) { delete log; }
size_t hsie_train_log_steps(const hsie_train_log* log) { return log ? log->log.steps.size() : 0; }
double hsie_train_log_loss(const hsie_train_log* log, size_t step) {
    return log && step < log->log.steps.size() ? log->log.steps[step].loss : NAN;
}

hsie_status hsie_train_log_write(const hsie_train_log* log, const char* steps_csv, const char* epochs_csv) {
    return guarded([&] {
        need(log, "log");
        need(steps_csv, "steps_csv");
        need(epochs_csv, "epochs_csv");
        log->log.write(steps_csv, epochs_csv);
    });
}

hsie_status hsie_verify(int inject_fault, hsie_verify_sink sink, void* user) {
    std::string failed;
    const hsie_status st = guarded([&] {
        hsie::verify::Options opts;
        opts.corrupt_kernel = inject_fault != 0;
        hsie::verify::run_all(opts, [&](const hsie::verify::SuiteResult& r) {
            if (sink) sink(r.name.c_str(), r.passed ? 1 : 0, r.max_error, r.tolerance, r.detail.c_str(), r.seconds, user);
            if (!r.passed && failed.empty()) failed = r.name + " suite failed: " + r.detail;
        });
    });
    if (st != HSIE_OK) return st;
    if (!failed.empty()) return fail(HSIE_ERR_VERIFY, failed);
    return HSIE_OK;
}

hsie_status hsie_write_preview_ppm(const hsie_cube* cube, int red, int green, int blue, const char* path) {
    return guarded([&] {
        need(cube, "cube");
        need(path, "path");
        const auto& c = cube->cube;
        for (int b : {red, green, blue})
            hsie::require(b >= 0 && b < c.bands(), "preview: band " + std::to_string(b) + " out of range for " +
                                                       std::to_string(c.bands()) + " bands");
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw hsie::IoError(std::string("cannot write preview ") + path);
        out << "P6\n" << c.width() << " " << c.height() << "\n255\n";
        std::vector<unsigned char> rgb(c.plane() * 3);
        const int chans[3] = {red, green, blue};
        for (int ch = 0; ch < 3; ++ch) {
            auto band = c.band(chans[ch]);
            for (std::size_t p = 0; p < band.size(); ++p) {
                const double v = std::clamp(static_cast<double>(band[p]), 0.0, 1.0);
                rgb[p * 3 + static_cast<std::size_t>(ch)] = static_cast<unsigned char>(std::lround(v * 255.0));
            }
        }
        out.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
        if (!out) throw hsie::IoError(std::string("failed writing preview ") + path);
    });
}

}  // extern "C"
