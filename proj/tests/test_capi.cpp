#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "hsie/hsie.h"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "hsie_test_capi";
    fs::create_directories(dir);
    return dir / name;
}

bool last_error_mentions(const char* needle) { return std::string(hsie_last_error()).find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("cube lifecycle and I/O") {
    CHECK(std::strlen(hsie_version()) > 0);
    hsie_cube* cube = nullptr;
    CHECK(hsie_cube_create(0, 4, 4, nullptr, &cube) == HSIE_ERR_VALIDATION);
    CHECK(cube == nullptr);
    CHECK(std::strlen(hsie_last_error()) > 0);
    CHECK(hsie_cube_create(4, 6, 3, nullptr, nullptr) == HSIE_ERR_VALIDATION);

    std::vector<float> values(4 * 6 * 3);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<float>(i) / values.size();
    REQUIRE(hsie_cube_create(4, 6, 3, values.data(), &cube) == HSIE_OK);
    int h = 0, w = 0, b = 0;
    CHECK(hsie_cube_dims(cube, &h, &w, &b) == HSIE_OK);
    CHECK(h == 4);
    CHECK(w == 6);
    CHECK(b == 3);
    // band-sequential layout: (band * height + row) * width + col
    CHECK(hsie_cube_data(cube)[(2 * 4 + 1) * 6 + 3] == values[(2 * 4 + 1) * 6 + 3]);

    const std::string path = scratch("cube").string();
    REQUIRE(hsie_cube_write(cube, path.c_str()) == HSIE_OK);
    hsie_cube* back = nullptr;
    REQUIRE(hsie_cube_read((path + ".hdr").c_str(), &back) == HSIE_OK);
    CHECK(std::memcmp(hsie_cube_data_const(back), values.data(), values.size() * sizeof(float)) == 0);
    hsie_cube_free(back);

    hsie_cube* missing = nullptr;
    CHECK(hsie_cube_read(scratch("nope").string().c_str(), &missing) == HSIE_ERR_IO);
    CHECK(last_error_mentions("nope"));
    hsie_cube_free(cube);
    hsie_cube_free(nullptr);
}

TEST_CASE("preprocessing helpers") {
    hsie_cube *cube = nullptr, *sel = nullptr, *norm = nullptr;
    REQUIRE(hsie_cube_create(4, 4, 224, nullptr, &cube) == HSIE_OK);
    REQUIRE(hsie_select_bands(cube, 20, 12, 3, &sel) == HSIE_OK);
    int h, w, b;
    hsie_cube_dims(sel, &h, &w, &b);
    CHECK(b == 64);
    CHECK(hsie_select_bands(cube, 200, 30, 1, &sel) == HSIE_ERR_VALIDATION);
    REQUIRE(hsie_normalize(cube, &norm) == HSIE_OK);
    hsie_cube_free(norm);
    hsie_cube_free(sel);
    hsie_cube_free(cube);

    int win[4];
    REQUIRE(hsie_adjacent_window(0, 10, 4, win) == HSIE_OK);
    CHECK(win[0] == 1);
    CHECK(hsie_adjacent_window(0, 4, 4, win) == HSIE_ERR_VALIDATION);
    std::size_t n = 0;
    REQUIRE(hsie_patch_count(64, 64, 3, 32, &n) == HSIE_OK);
    CHECK(n == 12u);
}

TEST_CASE("synthesis, pyramid, baselines and metrics") {
    hsie_cube *clean = nullptr, *low = nullptr, *high = nullptr, *lowband = nullptr, *rec = nullptr;
    REQUIRE(hsie_synth_scene(16, 16, 5, 3, &clean) == HSIE_OK);
    hsie_degrade_config dc = hsie_degrade_config_default();
    CHECK(dc.gain == doctest::Approx(0.2f));
    REQUIRE(hsie_degrade(clean, &dc, &low) == HSIE_OK);
    dc.gain = -1;
    hsie_cube* bad = nullptr;
    CHECK(hsie_degrade(clean, &dc, &bad) == HSIE_ERR_VALIDATION);

    REQUIRE(hsie_decompose(clean, &high, &lowband) == HSIE_OK);
    int h, w, b;
    hsie_cube_dims(lowband, &h, &w, &b);
    CHECK(h == 8);
    REQUIRE(hsie_reconstruct(high, lowband, &rec) == HSIE_OK);
    const float* a = hsie_cube_data_const(clean);
    const float* r = hsie_cube_data_const(rec);
    for (int i = 0; i < 16 * 16 * 5; ++i) CHECK(std::abs(a[i] - r[i]) < 1e-5f);

    hsie_cube* he = nullptr;
    REQUIRE(hsie_baseline(low, "he", &he) == HSIE_OK);
    CHECK(hsie_baseline(low, "sharpen", &bad) == HSIE_ERR_VALIDATION);
    CHECK(last_error_mentions("sharpen"));

    hsie_report* rep = nullptr;
    REQUIRE(hsie_evaluate(clean, clean, &rep) == HSIE_OK);
    CHECK(std::isinf(hsie_report_mpsnr(rep)));
    CHECK(hsie_report_mssim(rep) == 1.0);
    CHECK(hsie_report_sam(rep) == 0.0);
    CHECK(hsie_report_band_count(rep) == 5u);
    CHECK(hsie_report_write_json(rep, scratch("r.json").string().c_str()) == HSIE_OK);
    CHECK(hsie_report_write_curve(rep, scratch("c.csv").string().c_str()) == HSIE_OK);
    hsie_report_free(rep);
    REQUIRE(hsie_evaluate(clean, low, &rep) == HSIE_OK);
    CHECK(std::isfinite(hsie_report_band_psnr(rep, 2)));
    hsie_report_free(rep);
    CHECK(hsie_evaluate(clean, lowband, &rep) == HSIE_ERR_VALIDATION);

    for (hsie_cube* c : {clean, low, high, lowband, rec, he}) hsie_cube_free(c);
}

TEST_CASE("model, training and checkpoint compatibility") {
    hsie_model_config cfg = hsie_model_config_desk();
    cfg.k = 4;
    cfg.feat = 6;
    cfg.n_cab = 1;
    cfg.n_dense = 2;
    cfg.eca_kernel = 3;
    cfg.mask_channels = 4;
    cfg.growth = 6;
    CHECK(hsie_model_config_validate(&cfg) == HSIE_OK);
    hsie_model_config broken = cfg;
    broken.eca_kernel = 4;
    CHECK(hsie_model_config_validate(&broken) == HSIE_ERR_VALIDATION);
    CHECK(hsie_model_config_default().feat == 60);

    hsie_cube *clean = nullptr, *low = nullptr;
    REQUIRE(hsie_synth_scene(32, 32, 6, 4, &clean) == HSIE_OK);
    hsie_degrade_config dc = hsie_degrade_config_default();
    REQUIRE(hsie_degrade(clean, &dc, &low) == HSIE_OK);

    hsie_dataset* ds = nullptr;
    REQUIRE(hsie_dataset_create(4, 16, &ds) == HSIE_OK);
    REQUIRE(hsie_dataset_add_pair(ds, low, clean) == HSIE_OK);
    CHECK(hsie_dataset_size(ds) == 24u);
    REQUIRE(hsie_dataset_add_validation(ds, low, clean) == HSIE_OK);

    hsie_train_config tc = hsie_train_config_default();
    CHECK(hsie_lr_at(200, &tc) == doctest::Approx(1e-4));
    tc.max_steps = 3;
    tc.batch_size = 4;
    int calls = 0;
    hsie_model* model = nullptr;
    hsie_train_log* log = nullptr;
    auto progress = [](int64_t, int, double, double, void* user) { ++*static_cast<int*>(user); };
    REQUIRE(hsie_train(ds, &tc, &cfg, nullptr, progress, &calls, &model, &log) == HSIE_OK);
    CHECK(calls == 3);
    CHECK(hsie_train_log_steps(log) == 3u);
    CHECK(std::isfinite(hsie_train_log_loss(log, 0)));
    CHECK(hsie_train_log_write(log, scratch("s.csv").string().c_str(), scratch("e.csv").string().c_str()) == HSIE_OK);

    hsie_model_config got{};
    hsie_model_get_config(model, &got);
    CHECK(got.mask_channels == 4);
    const std::string ck = scratch("m.ckpt").string();
    REQUIRE(hsie_model_save(model, ck.c_str()) == HSIE_OK);
    hsie_model* loaded = nullptr;
    REQUIRE(hsie_model_load(ck.c_str(), &cfg, &loaded) == HSIE_OK);
    CHECK(hsie_model_param_count(loaded) == hsie_model_param_count(model));
    hsie_model_config other = cfg;
    other.growth = 8;
    hsie_model* wrong = nullptr;
    CHECK(hsie_model_load(ck.c_str(), &other, &wrong) == HSIE_ERR_VALIDATION);
    CHECK(last_error_mentions("cab0.dense0"));

    hsie_cube *e1 = nullptr, *e2 = nullptr;
    REQUIRE(hsie_enhance(model, low, &e1) == HSIE_OK);
    REQUIRE(hsie_enhance(loaded, low, &e2) == HSIE_OK);
    CHECK(std::memcmp(hsie_cube_data_const(e1), hsie_cube_data_const(e2), 32 * 32 * 6 * sizeof(float)) == 0);

    hsie_dataset* mismatched = nullptr;
    REQUIRE(hsie_dataset_create(3, 16, &mismatched) == HSIE_OK);
    REQUIRE(hsie_dataset_add_pair(mismatched, low, clean) == HSIE_OK);
    hsie_model* none = nullptr;
    CHECK(hsie_train(mismatched, &tc, &cfg, nullptr, nullptr, nullptr, &none, nullptr) == HSIE_ERR_VALIDATION);

    for (hsie_cube* c : {clean, low, e1, e2}) hsie_cube_free(c);
    hsie_dataset_free(mismatched);
    hsie_dataset_free(ds);
    hsie_train_log_free(log);
    hsie_model_free(model);
    hsie_model_free(loaded);
}

TEST_CASE("verify and previews") {
    int suites = 0;
    auto sink = [](const char*, int, double, double, const char*, double, void* user) { ++*static_cast<int*>(user); };
    CHECK(hsie_verify(0, sink, &suites) == HSIE_OK);
    CHECK(suites == 3);
    CHECK(hsie_verify(1, nullptr, nullptr) == HSIE_ERR_VERIFY);
    CHECK(last_error_mentions("pyramid"));

    hsie_cube* cube = nullptr;
    REQUIRE(hsie_synth_scene(8, 8, 60, 1, &cube) == HSIE_OK);
    const std::string ppm = scratch("p.ppm").string();
    REQUIRE(hsie_write_preview_ppm(cube, 57, 27, 17, ppm.c_str()) == HSIE_OK);
    CHECK(fs::file_size(ppm) == std::string("P6\n8 8\n255\n").size() + 8 * 8 * 3);
    CHECK(hsie_write_preview_ppm(cube, 60, 27, 17, ppm.c_str()) == HSIE_ERR_VALIDATION);
    hsie_cube_free(cube);
}
