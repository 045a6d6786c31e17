/* HSIE: low-light hyperspectral image enhancement — C interface.
 *
 * All objects are opaque handles owned by the caller and released with the matching
 * *_free function (passing NULL is allowed). Functions return hsie_status; on failure
 * hsie_last_error() describes the problem for the calling thread until its next call.
 * Cube data is band-sequential 32-bit float: index = (band * height + row) * width + col.
 */
#ifndef HSIE_HSIE_H
#define HSIE_HSIE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(HSIE_BUILDING_LIBRARY)
#    define HSIE_API __declspec(dllexport)
#  else
#    define HSIE_API __declspec(dllimport)
#  endif
#else
#  define HSIE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hsie_status {
    HSIE_OK = 0,
    HSIE_ERR_VALIDATION = 1, /* bad arguments, shapes, configs, incompatible checkpoints */
    HSIE_ERR_IO = 2,         /* unreadable/unwritable or corrupt files */
    HSIE_ERR_NUMERIC = 3,    /* non-finite values during training */
    HSIE_ERR_VERIFY = 4,     /* a self-check suite failed */
    HSIE_ERR_INTERNAL = 5    /* unexpected failure (bug or out of memory) */
} hsie_status;

HSIE_API const char* hsie_last_error(void);
HSIE_API const char* hsie_version(void);

/* ---- cubes ---------------------------------------------------------------- */

typedef struct hsie_cube hsie_cube;

/* values may be NULL (zero-filled); otherwise height*width*bands floats are copied. */
HSIE_API hsie_status hsie_cube_create(int height, int width, int bands, const float* values, hsie_cube** out);
HSIE_API void hsie_cube_free(hsie_cube* cube);
HSIE_API hsie_status hsie_cube_dims(const hsie_cube* cube, int* height, int* width, int* bands);
/* Borrowed pointer into the cube, valid until it is freed. */
HSIE_API float* hsie_cube_data(hsie_cube* cube);
HSIE_API const float* hsie_cube_data_const(const hsie_cube* cube);

/* ENVI-style <stem>.hdr + <stem>.raw; path may be the stem or either file. */
HSIE_API hsie_status hsie_cube_read(const char* path, hsie_cube** out);
HSIE_API hsie_status hsie_cube_write(const hsie_cube* cube, const char* path);

HSIE_API hsie_status hsie_select_bands(const hsie_cube* cube, int drop_front, int drop_back, int stride,
                                       hsie_cube** out);
/* Global min-max scaling to [0,1]; a constant cube becomes all zeros. */
HSIE_API hsie_status hsie_normalize(const hsie_cube* cube, hsie_cube** out);
/* Indices of the k bands stacked with band `band_index` (writes k ints). */
HSIE_API hsie_status hsie_adjacent_window(int band_index, int total_bands, int k, int* out_indices);
/* Number of training patches cut from an h x w x b cube at the given patch size. */
HSIE_API hsie_status hsie_patch_count(int height, int width, int bands, int patch, size_t* out);

typedef struct hsie_degrade_config {
    float gain;
    float gain_variation;
    float gaussian_sigma;
    float impulse_fraction;
    float stripe_fraction;
    float stripe_amplitude;
    uint64_t seed;
} hsie_degrade_config;

HSIE_API hsie_degrade_config hsie_degrade_config_default(void);
HSIE_API hsie_status hsie_synth_scene(int height, int width, int bands, uint64_t seed, hsie_cube** out);
HSIE_API hsie_status hsie_degrade(const hsie_cube* clean, const hsie_degrade_config* cfg, hsie_cube** out);

/* Per-band single-level Laplacian split: high is h x w x b, low is h/2 x w/2 x b. */
HSIE_API hsie_status hsie_decompose(const hsie_cube* cube, hsie_cube** high, hsie_cube** low);
HSIE_API hsie_status hsie_reconstruct(const hsie_cube* high, const hsie_cube* low, hsie_cube** out);

/* ---- classical baselines ------------------------------------------------- */

/* method: "he", "clahe", "msr" or "mr". */
HSIE_API hsie_status hsie_baseline(const hsie_cube* cube, const char* method, hsie_cube** out);

/* ---- metrics ------------------------------------------------------------- */

typedef struct hsie_report hsie_report;

HSIE_API hsie_status hsie_evaluate(const hsie_cube* ref, const hsie_cube* test, hsie_report** out);
HSIE_API void hsie_report_free(hsie_report* report);
HSIE_API double hsie_report_mpsnr(const hsie_report* report);
HSIE_API double hsie_report_mssim(const hsie_report* report);
HSIE_API double hsie_report_sam(const hsie_report* report);
HSIE_API size_t hsie_report_band_count(const hsie_report* report);
HSIE_API double hsie_report_band_psnr(const hsie_report* report, size_t band);
HSIE_API hsie_status hsie_report_write_json(const hsie_report* report, const char* path);
HSIE_API hsie_status hsie_report_write_curve(const hsie_report* report, const char* path);

/* ---- model --------------------------------------------------------------- */

typedef struct hsie_model_config {
    int k;
    int feat;
    int n_cab;
    int n_dense;
    int eca_kernel;
    int mask_channels;
    int growth;
} hsie_model_config;

typedef struct hsie_model hsie_model;

HSIE_API hsie_model_config hsie_model_config_default(void); /* full-size network */
HSIE_API hsie_model_config hsie_model_config_desk(void);    /* reduced desk-scale network */
HSIE_API hsie_status hsie_model_config_validate(const hsie_model_config* cfg);

HSIE_API hsie_status hsie_model_init(const hsie_model_config* cfg, uint64_t seed, hsie_model** out);
/* expected may be NULL; otherwise the checkpoint must match it layer by layer. */
HSIE_API hsie_status hsie_model_load(const char* path, const hsie_model_config* expected, hsie_model** out);
HSIE_API hsie_status hsie_model_save(const hsie_model* model, const char* path);
HSIE_API void hsie_model_free(hsie_model* model);
HSIE_API hsie_status hsie_model_get_config(const hsie_model* model, hsie_model_config* out);
HSIE_API size_t hsie_model_param_count(const hsie_model* model);

/* Enhances every band (parallel over bands); output is clamped to [0,1]. */
HSIE_API hsie_status hsie_enhance(const hsie_model* model, const hsie_cube* cube, hsie_cube** out);

/* ---- training ------------------------------------------------------------ */

typedef enum hsie_loss { HSIE_LOSS_L1 = 0, HSIE_LOSS_L2 = 1 } hsie_loss;

typedef struct hsie_train_config {
    double lr0;
    int lr_step_epochs;
    int epochs;
    int max_steps; /* 0: run all epochs */
    int batch_size;
    hsie_loss loss;
    uint64_t seed;
    int validate_every;
    int checkpoint_every;
    const char* checkpoint_path; /* may be NULL */
} hsie_train_config;

typedef struct hsie_dataset hsie_dataset;
typedef struct hsie_train_log hsie_train_log;

typedef void (*hsie_progress_fn)(int64_t step, int epoch, double loss, double lr, void* user);

HSIE_API hsie_train_config hsie_train_config_default(void);
HSIE_API double hsie_lr_at(int epoch, const hsie_train_config* cfg);

HSIE_API hsie_status hsie_dataset_create(int k, int patch, hsie_dataset** out);
HSIE_API void hsie_dataset_free(hsie_dataset* dataset);
/* Cuts patches from a (low-light, clean) pair and appends them. */
HSIE_API hsie_status hsie_dataset_add_pair(hsie_dataset* dataset, const hsie_cube* low, const hsie_cube* clean);
/* Whole-cube pair evaluated after each validation epoch. */
HSIE_API hsie_status hsie_dataset_add_validation(hsie_dataset* dataset, const hsie_cube* low, const hsie_cube* clean);
HSIE_API size_t hsie_dataset_size(const hsie_dataset* dataset);

/* initial may be NULL (fresh Kaiming init from cfg->seed). On HSIE_ERR_NUMERIC the last
 * good parameters are written to cfg->checkpoint_path when one is set. */
HSIE_API hsie_status hsie_train(const hsie_dataset* dataset, const hsie_train_config* cfg,
                                const hsie_model_config* model_cfg, const hsie_model* initial,
                                hsie_progress_fn progress, void* user, hsie_model** out_model,
                                hsie_train_log** out_log);
HSIE_API void hsie_train_log_free(hsie_train_log* log);
HSIE_API size_t hsie_train_log_steps(const hsie_train_log* log);
HSIE_API double hsie_train_log_loss(const hsie_train_log* log, size_t step);
HSIE_API hsie_status hsie_train_log_write(const hsie_train_log* log, const char* steps_csv, const char* epochs_csv);

/* ---- self-checks and previews -------------------------------------------- */

typedef void (*hsie_verify_sink)(const char* suite, int passed, double max_error, double tolerance,
                                 const char* detail, double seconds, void* user);

/* Runs the gradient, pyramid and metrics suites. Returns HSIE_ERR_VERIFY if any fails;
 * hsie_last_error() then names the first failing suite. inject_fault corrupts a blur tap. */
HSIE_API hsie_status hsie_verify(int inject_fault, hsie_verify_sink sink, void* user);

/* 8-bit binary PPM from three bands (0-based indices), values clamped to [0,1]. */
HSIE_API hsie_status hsie_write_preview_ppm(const hsie_cube* cube, int red, int green, int blue, const char* path);

#ifdef __cplusplus
}
#endif

#endif /* HSIE_HSIE_H */
