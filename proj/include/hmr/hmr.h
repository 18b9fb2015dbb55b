/*
 * C interface to the hyperbox mixture regression library.
 *
 * Objects are opaque handles created by hmr_* functions and released with the
 * matching *_free function. Every fallible call returns an hmr_status; on
 * failure a description is available from hmr_last_error() on the same
 * thread until the next failing call on that thread.
 *
 * Trained models are immutable: hmr_model_predict and
 * hmr_model_predict_recursive may be called on one handle from many threads.
 */
#ifndef HMR_HMR_H
#define HMR_HMR_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HMR_API __declspec(dllexport)
#elif defined(__GNUC__)
#define HMR_API __attribute__((visibility("default")))
#else
#define HMR_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hmr_status {
  HMR_OK = 0,
  HMR_ERR_INVALID_ARGUMENT = 1,
  HMR_ERR_DATA = 2,
  HMR_ERR_NUMERIC = 3,
  HMR_ERR_IO = 4,
  HMR_ERR_STATE = 5,
  HMR_ERR_INTERNAL = 6
} hmr_status;

typedef enum hmr_dataset_kind {
  HMR_DATASET_BIOPROCESS = 0, /* 23 bioprocess parameters */
  HMR_DATASET_BENCHMARK = 1   /* piecewise-nonlinear benchmark u1, u2, u3, y */
} hmr_dataset_kind;

typedef enum hmr_format {
  HMR_FORMAT_TEXT = 0,
  HMR_FORMAT_JSON = 1,
  HMR_FORMAT_TABLE = 2 /* CSV, one row per fold and configuration */
} hmr_format;

typedef struct hmr_dataset hmr_dataset;
typedef struct hmr_model hmr_model;
typedef struct hmr_text hmr_text;
typedef struct hmr_report hmr_report;

typedef struct hmr_synth_options {
  size_t cultures;
  size_t days;
  double noise;
  uint64_t seed;
  hmr_dataset_kind kind;
} hmr_synth_options;

/* Which columns feed a model and what it forecasts. */
typedef struct hmr_task {
  const char* target;
  const char* const* features; /* NULL or empty: every parameter */
  size_t feature_count;
  int horizon;              /* 1 or 2 */
  int include_intermediate; /* horizon 2: append target(t+1) as last input */
} hmr_task;

typedef struct hmr_fit_options {
  double theta;
  size_t top_k;
  double expansion_fraction;
  double lambda;
} hmr_fit_options;

typedef struct hmr_train_metrics {
  double train_rmse; /* scaled target space */
  size_t boxes;
  size_t rows;
  size_t features;
  double seconds;
} hmr_train_metrics;

typedef struct hmr_experiment_options {
  size_t folds;
  size_t inner_folds;
  uint64_t seed;
  size_t jobs;
  const double* grid; /* NULL: 0.1, 0.2, ..., 0.7 */
  size_t grid_size;
  int tune;         /* cross-validation: pick theta per fold by inner CV */
  size_t min_folds; /* feature selection consensus threshold */
  int include_timings;
  /* Resolved configuration echoed verbatim into the report header. */
  const char* const* config_keys;
  const char* const* config_values;
  size_t config_count;
} hmr_experiment_options;

HMR_API const char* hmr_version(void);
HMR_API const char* hmr_last_error(void);
HMR_API const char* hmr_status_name(hmr_status status);

HMR_API hmr_synth_options hmr_synth_options_default(void);
HMR_API hmr_fit_options hmr_fit_options_default(void);
HMR_API hmr_experiment_options hmr_experiment_options_default(void);

/* Datasets */
HMR_API hmr_status hmr_dataset_synthesize(const hmr_synth_options* options, hmr_dataset** out);
HMR_API hmr_status hmr_dataset_load(const char* path, int carry_forward, hmr_dataset** out);
HMR_API hmr_status hmr_dataset_save(const hmr_dataset* dataset, const char* path);
HMR_API void hmr_dataset_free(hmr_dataset* dataset);
HMR_API size_t hmr_dataset_culture_count(const hmr_dataset* dataset);
HMR_API size_t hmr_dataset_day_count(const hmr_dataset* dataset);
HMR_API size_t hmr_dataset_parameter_count(const hmr_dataset* dataset);
HMR_API const char* hmr_dataset_parameter_name(const hmr_dataset* dataset, size_t index);

/* Supervised windows as CSV (culture_id, day, inputs..., target). */
HMR_API hmr_status hmr_dataset_window(const hmr_dataset* dataset, const hmr_task* task, hmr_text** out,
                                      size_t* rows);

/* Models */
HMR_API hmr_status hmr_model_train(const hmr_dataset* dataset, const hmr_task* task,
                                   const hmr_fit_options* options, hmr_model** out,
                                   hmr_train_metrics* metrics);
HMR_API hmr_status hmr_model_load(const char* path, hmr_model** out);
HMR_API hmr_status hmr_model_save(const hmr_model* model, const char* path);
HMR_API void hmr_model_free(hmr_model* model);
HMR_API size_t hmr_model_box_count(const hmr_model* model);
HMR_API size_t hmr_model_feature_count(const hmr_model* model);
HMR_API const char* hmr_model_feature_name(const hmr_model* model, size_t index);
HMR_API const char* hmr_model_target(const hmr_model* model);
HMR_API int hmr_model_horizon(const hmr_model* model);

/* Raw (unscaled) inputs and outputs. */
HMR_API hmr_status hmr_model_predict(const hmr_model* model, const double* x, size_t n, double* y);
HMR_API hmr_status hmr_model_predict_recursive(const hmr_model* first, const hmr_model* second,
                                               const double* x, size_t n, double* y_next,
                                               double* y_after);

/* Predictions for every window of a dataset as CSV. With `second` NULL the
 * first model's own forecast is written (horizon 1, or horizon 2 trained
 * without the intermediate input); otherwise the two-day chain. */
HMR_API hmr_status hmr_predict_dataset(const hmr_model* first, const hmr_model* second,
                                       const hmr_dataset* dataset, hmr_text** out, size_t* rows);

/* Experiments. The resulting report can be rendered in any format. */
HMR_API hmr_status hmr_cross_validate(const hmr_dataset* dataset, const hmr_task* task,
                                      const hmr_fit_options* fit, const hmr_experiment_options* options,
                                      hmr_report** report);
HMR_API hmr_status hmr_tune(const hmr_dataset* dataset, const hmr_task* task, const hmr_fit_options* fit,
                            const hmr_experiment_options* options, hmr_report** report);
HMR_API hmr_status hmr_select_features(const hmr_dataset* dataset, const hmr_task* task,
                                       const hmr_fit_options* fit, const hmr_experiment_options* options,
                                       hmr_report** report);
HMR_API hmr_status hmr_report_render(const hmr_report* report, hmr_format format, hmr_text** out);
HMR_API void hmr_report_free(hmr_report* report);

HMR_API const char* hmr_text_data(const hmr_text* text);
HMR_API size_t hmr_text_size(const hmr_text* text);
HMR_API void hmr_text_free(hmr_text* text);

#ifdef __cplusplus
}
#endif

#endif /* HMR_HMR_H */
