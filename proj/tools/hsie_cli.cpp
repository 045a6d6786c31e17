// hsie — command-line front end over the C interface.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hsie/hsie.h"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kPreviewRed = 57, kPreviewGreen = 27, kPreviewBlue = 17;

/// Failure carrying the process exit code.
struct CliError {
    int code;
    std::string message;
};

void check(hsie_status st) {
    if (st != HSIE_OK) throw CliError{static_cast<int>(st) == HSIE_ERR_INTERNAL ? 2 : static_cast<int>(st), hsie_last_error()};
}

[[noreturn]] void invalid(const std::string& msg) { throw CliError{1, msg}; }

struct CubeDeleter {
    void operator()(hsie_cube* c) const { hsie_cube_free(c); }
};
struct ModelDeleter {
    void operator()(hsie_model* m) const { hsie_model_free(m); }
};
struct ReportDeleter {
    void operator()(hsie_report* r) const { hsie_report_free(r); }
};
struct DatasetDeleter {
    void operator()(hsie_dataset* d) const { hsie_dataset_free(d); }
};
struct LogDeleter {
    void operator()(hsie_train_log* l) const { hsie_train_log_free(l); }
};
using Cube = std::unique_ptr<hsie_cube, CubeDeleter>;
using Model = std::unique_ptr<hsie_model, ModelDeleter>;

Cube read_cube(const std::string& path) {
    hsie_cube* c = nullptr;
    check(hsie_cube_read(path.c_str(), &c));
    return Cube(c);
}

void write_cube(const hsie_cube* c, const std::string& path) { check(hsie_cube_write(c, path.c_str())); }

int bands_of(const hsie_cube* c) {
    int b = 0;
    check(hsie_cube_dims(c, nullptr, nullptr, &b));
    return b;
}

// ---- JSON config overlay ----------------------------------------------------

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CliError{2, "cannot read config " + path};
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        invalid("config " + path + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) invalid("config " + path + " must be a JSON object");
    return j;
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& path) {
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) invalid("config " + path + ": unknown key '" + key + "'");
}

template <typename T>
void overlay(const json& j, const char* key, T& dst) {
    if (!j.contains(key)) return;
    try {
        dst = j.at(key).get<T>();
    } catch (const json::exception&) {
        invalid(std::string("config: key '") + key + "' has the wrong type");
    }
}

template <typename T>
void apply_flag(const std::optional<T>& flag, T& dst) {
    if (flag) dst = *flag;
}

// ---- degrade settings shared by synth -----------------------------------------

struct DegradeFlags {
    std::optional<float> gain, gain_variation, sigma, impulse, stripes, stripe_amplitude;
};

void add_degrade_flags(CLI::App* cmd, DegradeFlags& f) {
    cmd->add_option("--gain", f.gain, "Illumination gain (0,1]");
    cmd->add_option("--gain-variation", f.gain_variation, "Amplitude of smooth illumination field [0,1)");
    cmd->add_option("--sigma", f.sigma, "Gaussian noise standard deviation");
    cmd->add_option("--impulse", f.impulse, "Impulse noise pixel fraction");
    cmd->add_option("--stripes", f.stripes, "Fraction of columns with stripe offsets");
    cmd->add_option("--stripe-amplitude", f.stripe_amplitude, "Maximum stripe offset");
}

// ---- subcommands --------------------------------------------------------------

struct SynthArgs {
    std::string out, config;
    std::optional<int> scenes, height, width, bands;
    std::optional<std::uint64_t> seed;
    DegradeFlags degrade;
};

int cmd_synth(const SynthArgs& a) {
    int scenes = 8, height = 64, width = 64, bands = 32;
    std::uint64_t seed = 1;
    hsie_degrade_config dc = hsie_degrade_config_default();
    if (!a.config.empty()) {
        const json j = load_config(a.config);
        reject_unknown(j,
                       {"scenes", "height", "width", "bands", "seed", "gain", "gain_variation", "gaussian_sigma",
                        "impulse_fraction", "stripe_fraction", "stripe_amplitude"},
                       a.config);
        overlay(j, "scenes", scenes);
        overlay(j, "height", height);
        overlay(j, "width", width);
        overlay(j, "bands", bands);
        overlay(j, "seed", seed);
        overlay(j, "gain", dc.gain);
        overlay(j, "gain_variation", dc.gain_variation);
        overlay(j, "gaussian_sigma", dc.gaussian_sigma);
        overlay(j, "impulse_fraction", dc.impulse_fraction);
        overlay(j, "stripe_fraction", dc.stripe_fraction);
        overlay(j, "stripe_amplitude", dc.stripe_amplitude);
    }
    apply_flag(a.scenes, scenes);
    apply_flag(a.height, height);
    apply_flag(a.width, width);
    apply_flag(a.bands, bands);
    apply_flag(a.seed, seed);
    apply_flag(a.degrade.gain, dc.gain);
    apply_flag(a.degrade.gain_variation, dc.gain_variation);
    apply_flag(a.degrade.sigma, dc.gaussian_sigma);
    apply_flag(a.degrade.impulse, dc.impulse_fraction);
    apply_flag(a.degrade.stripes, dc.stripe_fraction);
    apply_flag(a.degrade.stripe_amplitude, dc.stripe_amplitude);

    if (scenes < 1) invalid("--scenes must be >= 1");
    if (height <= 0 || width <= 0 || height % 2 || width % 2)
        invalid("scene dimensions must be positive and even, got " + std::to_string(height) + "x" +
                std::to_string(width));
    if (bands < 2) invalid("--bands must be >= 2");

    std::error_code ec;
    fs::create_directories(a.out, ec);
    if (ec || !fs::is_directory(a.out)) throw CliError{2, "cannot create output directory " + a.out};

    json manifest;
    manifest["height"] = height;
    manifest["width"] = width;
    manifest["bands"] = bands;
    manifest["seed"] = seed;
    manifest["degrade"] = {{"gain", dc.gain},
                           {"gain_variation", dc.gain_variation},
                           {"gaussian_sigma", dc.gaussian_sigma},
                           {"impulse_fraction", dc.impulse_fraction},
                           {"stripe_fraction", dc.stripe_fraction},
                           {"stripe_amplitude", dc.stripe_amplitude}};
    json list = json::array();
    for (int i = 0; i < scenes; ++i) {
        const std::uint64_t scene_seed = seed * 1000003ULL + static_cast<std::uint64_t>(i);
        hsie_cube* clean_raw = nullptr;
        check(hsie_synth_scene(height, width, bands, scene_seed, &clean_raw));
        Cube clean(clean_raw);
        hsie_degrade_config d = dc;
        d.seed = scene_seed ^ 0x9E3779B97F4A7C15ULL;
        hsie_cube* low_raw = nullptr;
        check(hsie_degrade(clean.get(), &d, &low_raw));
        Cube low(low_raw);
        const std::string stem = "scene_" + std::to_string(i);
        write_cube(clean.get(), (fs::path(a.out) / (stem + "_clean")).string());
        write_cube(low.get(), (fs::path(a.out) / (stem + "_low")).string());
        list.push_back({{"clean", stem + "_clean"}, {"low", stem + "_low"}});
    }
    manifest["scenes"] = list;
    const fs::path mpath = fs::path(a.out) / "manifest.json";
    std::ofstream out(mpath, std::ios::trunc);
    if (!out) throw CliError{2, "cannot write " + mpath.string()};
    out << manifest.dump(2) << "\n";
    if (!out) throw CliError{2, "failed writing " + mpath.string()};
    std::cout << "wrote " << scenes << " scene pairs to " << a.out << "\n";
    return 0;
}

struct DecomposeArgs {
    std::string in, high, low;
};

int cmd_decompose(const DecomposeArgs& a) {
    Cube cube = read_cube(a.in);
    hsie_cube *h = nullptr, *l = nullptr;
    check(hsie_decompose(cube.get(), &h, &l));
    Cube high(h), low(l);
    write_cube(high.get(), a.high);
    write_cube(low.get(), a.low);
    return 0;
}

/// Model and training settings after defaults < config file < flags.
struct TrainSettings {
    hsie_model_config model = hsie_model_config_desk();
    hsie_train_config train = hsie_train_config_default();
    int patch = 32;
    int holdout = 1;
    bool normalize = false;
};

const std::set<std::string> kModelKeys = {"k", "feat", "n_cab", "n_dense", "eca_kernel", "mask_channels", "growth"};

void overlay_model(const json& j, hsie_model_config& m) {
    if (j.contains("preset")) {
        std::string preset;
        overlay(j, "preset", preset);
        if (preset == "desk") m = hsie_model_config_desk();
        else if (preset == "full") m = hsie_model_config_default();
        else invalid("config: preset must be 'desk' or 'full', got '" + preset + "'");
    }
    overlay(j, "k", m.k);
    overlay(j, "feat", m.feat);
    overlay(j, "n_cab", m.n_cab);
    overlay(j, "n_dense", m.n_dense);
    overlay(j, "eca_kernel", m.eca_kernel);
    overlay(j, "mask_channels", m.mask_channels);
    overlay(j, "growth", m.growth);
}

struct TrainArgs {
    std::string data, config, out, log_dir;
    std::optional<int> epochs, max_steps, batch_size, patch;
    std::optional<double> lr;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};

void progress_printer(int64_t step, int epoch, double loss, double lr, void* user) {
    if (*static_cast<bool*>(user)) return;
    if (step % 25 == 0) std::fprintf(stderr, "step %lld epoch %d loss %.6g lr %.3g\n", static_cast<long long>(step), epoch, loss, lr);
}

int cmd_train(const TrainArgs& a) {
    TrainSettings s;
    s.train.checkpoint_path = nullptr;
    if (!a.config.empty()) {
        const json j = load_config(a.config);
        std::set<std::string> allowed = kModelKeys;
        allowed.insert({"preset", "lr0", "lr_step_epochs", "epochs", "max_steps", "batch_size", "loss", "seed",
                        "validate_every", "checkpoint_every", "patch", "holdout", "normalize"});
        reject_unknown(j, allowed, a.config);
        overlay_model(j, s.model);
        overlay(j, "lr0", s.train.lr0);
        overlay(j, "lr_step_epochs", s.train.lr_step_epochs);
        overlay(j, "epochs", s.train.epochs);
        overlay(j, "max_steps", s.train.max_steps);
        overlay(j, "batch_size", s.train.batch_size);
        overlay(j, "seed", s.train.seed);
        overlay(j, "validate_every", s.train.validate_every);
        overlay(j, "checkpoint_every", s.train.checkpoint_every);
        overlay(j, "patch", s.patch);
        overlay(j, "holdout", s.holdout);
        overlay(j, "normalize", s.normalize);
        if (j.contains("loss")) {
            std::string loss;
            overlay(j, "loss", loss);
            if (loss == "l1") s.train.loss = HSIE_LOSS_L1;
            else if (loss == "l2") s.train.loss = HSIE_LOSS_L2;
            else invalid("config: loss must be 'l1' or 'l2', got '" + loss + "'");
        }
    }
    apply_flag(a.epochs, s.train.epochs);
    apply_flag(a.max_steps, s.train.max_steps);
    apply_flag(a.batch_size, s.train.batch_size);
    apply_flag(a.patch, s.patch);
    apply_flag(a.lr, s.train.lr0);
    apply_flag(a.seed, s.train.seed);
    check(hsie_model_config_validate(&s.model));
    if (s.holdout < 0) invalid("holdout must be >= 0");

    const fs::path mpath = fs::path(a.data) / "manifest.json";
    if (!fs::exists(mpath)) invalid("no manifest.json in " + a.data);
    json manifest;
    {
        std::ifstream in(mpath);
        if (!in) throw CliError{2, "cannot read " + mpath.string()};
        try {
            manifest = json::parse(in);
        } catch (const json::parse_error& e) {
            invalid("manifest " + mpath.string() + " is not valid JSON: " + e.what());
        }
    }
    if (!manifest.contains("scenes") || !manifest["scenes"].is_array() || manifest["scenes"].empty())
        invalid("manifest " + mpath.string() + " lists no scenes");
    const auto& scenes = manifest["scenes"];
    const int n = static_cast<int>(scenes.size());
    if (s.holdout >= n) invalid("holdout " + std::to_string(s.holdout) + " leaves no training scenes out of " + std::to_string(n));

    hsie_dataset* ds_raw = nullptr;
    check(hsie_dataset_create(s.model.k, s.patch, &ds_raw));
    std::unique_ptr<hsie_dataset, DatasetDeleter> ds(ds_raw);
    for (int i = 0; i < n; ++i) {
        const auto& e = scenes[static_cast<std::size_t>(i)];
        if (!e.contains("low") || !e.contains("clean")) invalid("manifest scene " + std::to_string(i) + " lacks low/clean");
        const fs::path low_p = fs::path(a.data) / e["low"].get<std::string>();
        const fs::path clean_p = fs::path(a.data) / e["clean"].get<std::string>();
        for (const auto& p : {low_p, clean_p}) {
            fs::path hdr = p;
            hdr += ".hdr";
            if (!fs::exists(hdr)) invalid("missing pair member " + hdr.string());
        }
        Cube low = read_cube(low_p.string()), clean = read_cube(clean_p.string());
        if (s.normalize) {
            hsie_cube *nl = nullptr, *nc = nullptr;
            check(hsie_normalize(low.get(), &nl));
            low.reset(nl);
            check(hsie_normalize(clean.get(), &nc));
            clean.reset(nc);
        }
        if (i < n - s.holdout) check(hsie_dataset_add_pair(ds.get(), low.get(), clean.get()));
        else check(hsie_dataset_add_validation(ds.get(), low.get(), clean.get()));
    }

    const std::string ckpt = a.out;
    s.train.checkpoint_path = ckpt.c_str();
    bool quiet = a.quiet;
    hsie_model* model_raw = nullptr;
    hsie_train_log* log_raw = nullptr;
    check(hsie_train(ds.get(), &s.train, &s.model, nullptr, progress_printer, &quiet, &model_raw, &log_raw));
    Model model(model_raw);
    std::unique_ptr<hsie_train_log, LogDeleter> log(log_raw);
    check(hsie_model_save(model.get(), ckpt.c_str()));

    const fs::path log_dir = a.log_dir.empty() ? fs::path(ckpt).parent_path() : fs::path(a.log_dir);
    const std::string stem = fs::path(ckpt).stem().string();
    const std::string steps_csv = (log_dir / (stem + "_loss.csv")).string();
    const std::string epochs_csv = (log_dir / (stem + "_val.csv")).string();
    check(hsie_train_log_write(log.get(), steps_csv.c_str(), epochs_csv.c_str()));
    const size_t steps = hsie_train_log_steps(log.get());
    std::cout << "trained " << steps << " steps on " << hsie_dataset_size(ds.get()) << " patches; checkpoint " << ckpt
              << "; logs " << steps_csv << ", " << epochs_csv << "\n";
    if (steps > 0)
        std::cout << "loss " << hsie_train_log_loss(log.get(), 0) << " -> " << hsie_train_log_loss(log.get(), steps - 1)
                  << "\n";
    return 0;
}

void write_preview(const hsie_cube* cube, const std::string& out, const std::string& preview_flag, bool no_preview) {
    if (no_preview) return;
    const int bands = bands_of(cube);
    if (bands <= kPreviewRed) {
        std::cerr << "warning: cube has " << bands << " bands; pseudo-color preview needs at least " << kPreviewRed + 1
                  << ", skipped\n";
        return;
    }
    std::string path = preview_flag;
    if (path.empty()) {
        fs::path p(out);
        if (p.extension() == ".hdr" || p.extension() == ".raw") p.replace_extension();
        path = p.string() + "_preview.ppm";
    }
    check(hsie_write_preview_ppm(cube, kPreviewRed, kPreviewGreen, kPreviewBlue, path.c_str()));
}

struct EnhanceArgs {
    std::string ckpt, in, out, config, preview;
    bool no_preview = false;
};

int cmd_enhance(const EnhanceArgs& a) {
    std::optional<hsie_model_config> expected;
    if (!a.config.empty()) {
        const json j = load_config(a.config);
        std::set<std::string> allowed = kModelKeys;
        allowed.insert("preset");
        // Training keys may share the file; they are irrelevant here but not unknown.
        allowed.insert({"lr0", "lr_step_epochs", "epochs", "max_steps", "batch_size", "loss", "seed", "validate_every",
                        "checkpoint_every", "patch", "holdout", "normalize"});
        reject_unknown(j, allowed, a.config);
        hsie_model_config m = hsie_model_config_desk();
        overlay_model(j, m);
        expected = m;
    }
    hsie_model* raw = nullptr;
    check(hsie_model_load(a.ckpt.c_str(), expected ? &*expected : nullptr, &raw));
    Model model(raw);
    Cube cube = read_cube(a.in);
    hsie_cube* out_raw = nullptr;
    check(hsie_enhance(model.get(), cube.get(), &out_raw));
    Cube out(out_raw);
    write_cube(out.get(), a.out);
    write_preview(out.get(), a.out, a.preview, a.no_preview);
    return 0;
}

struct BaselineArgs {
    std::string method, in, out, preview;
    bool no_preview = false;
};

int cmd_baseline(const BaselineArgs& a) {
    Cube cube = read_cube(a.in);
    hsie_cube* out_raw = nullptr;
    check(hsie_baseline(cube.get(), a.method.c_str(), &out_raw));
    Cube out(out_raw);
    write_cube(out.get(), a.out);
    write_preview(out.get(), a.out, a.preview, a.no_preview);
    return 0;
}

struct EvalArgs {
    std::string ref, test, report, curve;
};

int cmd_eval(const EvalArgs& a) {
    Cube ref = read_cube(a.ref), test = read_cube(a.test);
    hsie_report* raw = nullptr;
    check(hsie_evaluate(ref.get(), test.get(), &raw));
    std::unique_ptr<hsie_report, ReportDeleter> report(raw);
    if (!a.report.empty()) check(hsie_report_write_json(report.get(), a.report.c_str()));
    if (!a.curve.empty()) check(hsie_report_write_curve(report.get(), a.curve.c_str()));
    std::cout << "MPSNR " << hsie_report_mpsnr(report.get()) << " dB  MSSIM " << hsie_report_mssim(report.get())
              << "  SAM " << hsie_report_sam(report.get()) << " deg\n";
    return 0;
}

void verify_sink(const char* suite, int passed, double max_error, double tolerance, const char* detail, double seconds,
                 void*) {
    std::printf("%-9s %s  max error %.3e (tol %.1e)  %.2fs  %s\n", suite, passed ? "PASS" : "FAIL", max_error, tolerance,
                seconds, detail);
    std::fflush(stdout);
}

int cmd_verify(bool inject_fault) {
    const hsie_status st = hsie_verify(inject_fault ? 1 : 0, verify_sink, nullptr);
    if (st == HSIE_ERR_VERIFY) throw CliError{4, hsie_last_error()};
    check(st);
    std::cout << "all suites passed\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"HSIE low-light hyperspectral enhancement"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(hsie_version()));

    SynthArgs synth;
    auto* c_synth = app.add_subcommand("synth", "Generate paired clean/low-light synthetic scenes");
    c_synth->add_option("--out", synth.out, "Output directory")->required();
    c_synth->add_option("--scenes", synth.scenes, "Number of scene pairs (default 8)");
    c_synth->add_option("--height", synth.height, "Scene height, even (default 64)");
    c_synth->add_option("--width", synth.width, "Scene width, even (default 64)");
    c_synth->add_option("--bands", synth.bands, "Spectral bands (default 32)");
    c_synth->add_option("--seed", synth.seed, "Random seed (default 1)");
    c_synth->add_option("--config", synth.config, "JSON overlay with the same keys");
    add_degrade_flags(c_synth, synth.degrade);

    DecomposeArgs dec;
    auto* c_dec = app.add_subcommand("decompose", "Split a cube into high- and low-frequency cubes");
    c_dec->add_option("--in", dec.in, "Input cube")->required();
    c_dec->add_option("--high", dec.high, "High-frequency output cube")->required();
    c_dec->add_option("--low", dec.low, "Low-frequency output cube")->required();

    TrainArgs train;
    auto* c_train = app.add_subcommand("train", "Train a network on a synthesized dataset");
    c_train->add_option("--data", train.data, "Dataset directory with manifest.json")->required();
    c_train->add_option("--config", train.config, "JSON training/model config");
    c_train->add_option("--out", train.out, "Checkpoint path")->required();
    c_train->add_option("--log-dir", train.log_dir, "Directory for CSV logs (default: checkpoint directory)");
    c_train->add_option("--epochs", train.epochs);
    c_train->add_option("--max-steps", train.max_steps);
    c_train->add_option("--batch-size", train.batch_size);
    c_train->add_option("--patch", train.patch);
    c_train->add_option("--lr", train.lr);
    c_train->add_option("--seed", train.seed);
    c_train->add_flag("--quiet", train.quiet, "No per-step progress");

    EnhanceArgs enh;
    auto* c_enh = app.add_subcommand("enhance", "Enhance a low-light cube with a trained checkpoint");
    c_enh->add_option("--ckpt", enh.ckpt, "Checkpoint")->required();
    c_enh->add_option("--in", enh.in, "Input cube")->required();
    c_enh->add_option("--out", enh.out, "Output cube")->required();
    c_enh->add_option("--config", enh.config, "Expected model config; the checkpoint must match it");
    c_enh->add_option("--preview", enh.preview, "Pseudo-color PPM path (default <out>_preview.ppm)");
    c_enh->add_flag("--no-preview", enh.no_preview);

    BaselineArgs base;
    auto* c_base = app.add_subcommand("baseline", "Apply a classical band-wise enhancer");
    c_base->add_option("--method", base.method, "he | clahe | msr | mr")->required();
    c_base->add_option("--in", base.in, "Input cube")->required();
    c_base->add_option("--out", base.out, "Output cube")->required();
    c_base->add_option("--preview", base.preview, "Pseudo-color PPM path (default <out>_preview.ppm)");
    c_base->add_flag("--no-preview", base.no_preview);

    EvalArgs ev;
    auto* c_eval = app.add_subcommand("eval", "Compare a cube against a reference");
    c_eval->add_option("--ref", ev.ref, "Reference cube")->required();
    c_eval->add_option("--test", ev.test, "Test cube")->required();
    c_eval->add_option("--report", ev.report, "JSON report path");
    c_eval->add_option("--curve", ev.curve, "Per-band PSNR CSV path");

    bool inject_fault = false;
    auto* c_verify = app.add_subcommand("verify", "Run the gradient, pyramid and metric self-checks");
    c_verify->add_flag("--inject-fault", inject_fault, "Corrupt a blur tap (tests the failure path)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*c_synth) return cmd_synth(synth);
        if (*c_dec) return cmd_decompose(dec);
        if (*c_train) return cmd_train(train);
        if (*c_enh) return cmd_enhance(enh);
        if (*c_base) return cmd_baseline(base);
        if (*c_eval) return cmd_eval(ev);
        if (*c_verify) return cmd_verify(inject_fault);
    } catch (const CliError& e) {
        std::cerr << "error: " << e.message << "\n";
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
