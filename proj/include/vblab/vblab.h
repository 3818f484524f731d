/*
 * Copyright 2026 The vblab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the vblab core: robust-loss analysis, label-noise
 * generation, datasets and training runs.
 *
 * Conventions:
 *  - every fallible call returns vblab_status; VBLAB_OK is 0;
 *  - on failure, vblab_last_error() returns a message for the calling thread;
 *  - objects are opaque handles created by *_create / *_load / *_gen calls and
 *    released with the matching *_destroy (NULL is accepted);
 *  - strings returned through char** are released with vblab_string_free.
 */
#ifndef VBLAB_VBLAB_H
#define VBLAB_VBLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(VBLAB_BUILDING_LIBRARY)
#define VBLAB_API __attribute__((visibility("default")))
#else
#define VBLAB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vblab_status {
  VBLAB_OK = 0,
  VBLAB_ERR_INVALID_ARGUMENT = 1,
  VBLAB_ERR_CONTRACT = 2,
  VBLAB_ERR_UNSUPPORTED_FAMILY = 3,
  VBLAB_ERR_UNBOUNDED_LOSS = 4,
  VBLAB_ERR_PRECONDITION = 5,
  VBLAB_ERR_NOT_CLEAN_DOMINANT = 6,
  VBLAB_ERR_INVALID_WEIGHTS = 7,
  VBLAB_ERR_RESOURCE = 8,
  VBLAB_ERR_FORMAT = 9,
  VBLAB_ERR_CONSISTENCY = 10,
  VBLAB_ERR_IO = 11,
  VBLAB_ERR_DEGENERATE_CLASS = 12,
  VBLAB_ERR_STRATIFICATION = 13,
  VBLAB_ERR_DIVERGENCE = 14,
  VBLAB_ERR_INTERNAL = 99
} vblab_status;

VBLAB_API const char* vblab_version(void);
VBLAB_API const char* vblab_status_name(vblab_status status);
VBLAB_API const char* vblab_last_error(void);
VBLAB_API void vblab_string_free(char* str);

/* A value that may be +infinity; `value` is 0 when is_infinite is set. */
typedef struct vblab_ext_real {
  double value;
  int is_infinite;
} vblab_ext_real;

/* ---- losses ------------------------------------------------------------ */

typedef enum vblab_loss_family {
  VBLAB_LOSS_CE = 0,
  VBLAB_LOSS_MAE,
  VBLAB_LOSS_EL,
  VBLAB_LOSS_SL,
  VBLAB_LOSS_VCE,
  VBLAB_LOSS_VEL,
  VBLAB_LOSS_VSL,
  VBLAB_LOSS_NCE,
  VBLAB_LOSS_COMBINED
} vblab_loss_family;

typedef struct vblab_loss vblab_loss;

VBLAB_API vblab_status vblab_loss_family_parse(const char* name, vblab_loss_family* out);
/* Single family; `a` is ignored by CE, MAE, EL, SL and NCE. */
VBLAB_API vblab_status vblab_loss_create(vblab_loss_family family, double a, vblab_loss** out);
/* alpha * NCE + beta * passive, passive in {VCE, VEL, VSL}. */
VBLAB_API vblab_status vblab_loss_create_combined(double alpha, double beta, vblab_loss_family passive,
                                                  double passive_a, vblab_loss** out);
VBLAB_API void vblab_loss_destroy(vblab_loss* loss);
/* Writes a description such as "vce(a=4)". */
VBLAB_API vblab_status vblab_loss_describe(const vblab_loss* loss, char** out);

VBLAB_API vblab_status vblab_loss_value(const vblab_loss* loss, const double* probs, size_t k, size_t label,
                                        double* out);
/* grad_out receives k entries: dL/du. */
VBLAB_API vblab_status vblab_loss_grad(const vblab_loss* loss, const double* probs, size_t k, size_t label,
                                       double* grad_out);
/* n_points samples of |l'(u)| on [1e-7, 1 - 1e-7]. */
VBLAB_API vblab_status vblab_loss_grad_curve(const vblab_loss* loss, size_t n_points, double* u_out,
                                             double* grad_abs_out);
VBLAB_API vblab_status vblab_loss_write_curve_csv(const vblab_loss* loss, size_t n_points, const char* path);

/* ---- analysis ---------------------------------------------------------- */

typedef struct vblab_variation_report {
  double grad_abs_min;
  vblab_ext_real grad_abs_max;
  vblab_ext_real variation_ratio;
  vblab_ext_real normalization_c;
  int numeric; /* 0 closed form, 1 numeric grid */
} vblab_variation_report;

typedef enum vblab_bound_theorem { VBLAB_BOUND_SYMMETRIC = 0, VBLAB_BOUND_GENERAL = 1 } vblab_bound_theorem;

typedef struct vblab_bound_report {
  vblab_bound_theorem theorem;
  double risk_gap_bound;
  double c_const;
  double a_const; /* general bound only */
  double variation_ratio;
} vblab_bound_report;

typedef enum vblab_certificate {
  VBLAB_CERT_BY_RATIO = 0,
  VBLAB_CERT_BY_CONCAVITY = 1,
  VBLAB_CERT_NONE = 2
} vblab_certificate;

typedef enum vblab_noise_kind {
  VBLAB_NOISE_SYMMETRIC = 0,
  VBLAB_NOISE_ASYMMETRIC_CIRCULAR = 1,
  VBLAB_NOISE_INSTANCE_DEPENDENT = 2
} vblab_noise_kind;

typedef struct vblab_noise_model {
  vblab_noise_kind kind;
  double eta;
  double rate_std; /* instance-dependent only; 0.1 by default */
} vblab_noise_model;

typedef struct vblab_corruption vblab_corruption;

VBLAB_API vblab_status vblab_noise_kind_parse(const char* name, vblab_noise_kind* out);

VBLAB_API vblab_status vblab_variation_ratio_closed(const vblab_loss* loss, vblab_variation_report* out);
VBLAB_API vblab_status vblab_variation_ratio_numeric(const vblab_loss* loss, size_t grid_steps,
                                                     vblab_variation_report* out);
VBLAB_API vblab_status vblab_symmetric_defect(const vblab_loss* loss, size_t k, size_t n_pairs, uint64_t seed,
                                              double* out);
VBLAB_API vblab_status vblab_bound_symmetric(const vblab_loss* loss, size_t k, double eta, vblab_bound_report* out);
/* `realized` is required for instance-dependent noise and ignored otherwise. */
VBLAB_API vblab_status vblab_bound_general(const vblab_loss* loss, const vblab_noise_model* noise, size_t k,
                                           const vblab_corruption* realized, vblab_bound_report* out);
VBLAB_API vblab_status vblab_asymmetry_threshold(const vblab_noise_model* noise, size_t k,
                                                 const vblab_corruption* realized, vblab_ext_real* out);
VBLAB_API vblab_status vblab_certify_asymmetric(const vblab_loss* loss, const double* weights, size_t k,
                                                vblab_certificate* out);
/* point_out receives k entries. */
VBLAB_API vblab_status vblab_argmin_weighted_risk(const vblab_loss* loss, const double* weights, size_t k,
                                                  double resolution, double* point_out, double* value_out);

/* ---- datasets ---------------------------------------------------------- */

typedef struct vblab_dataset vblab_dataset;

VBLAB_API vblab_status vblab_dataset_gen_blobs(size_t k, size_t per_class, size_t dim, double separation,
                                               uint64_t seed, vblab_dataset** out);
VBLAB_API vblab_status vblab_dataset_load_idx(const char* images_path, const char* labels_path, vblab_dataset** out);
/* num_classes == 0 infers K from the labels. */
VBLAB_API vblab_status vblab_dataset_load_csv(const char* path, size_t num_classes, vblab_dataset** out);
VBLAB_API vblab_status vblab_dataset_save_csv(const vblab_dataset* ds, const char* path);
VBLAB_API vblab_status vblab_dataset_split(const vblab_dataset* ds, double test_fraction, uint64_t seed,
                                           vblab_dataset** train_out, vblab_dataset** test_out);
VBLAB_API void vblab_dataset_destroy(vblab_dataset* ds);
VBLAB_API size_t vblab_dataset_size(const vblab_dataset* ds);
VBLAB_API size_t vblab_dataset_dim(const vblab_dataset* ds);
VBLAB_API size_t vblab_dataset_num_classes(const vblab_dataset* ds);
VBLAB_API const int32_t* vblab_dataset_labels(const vblab_dataset* ds);
/* Row-major N x d. */
VBLAB_API const double* vblab_dataset_features(const vblab_dataset* ds);

/* Label list from an IDX labels file, a dataset CSV or a one-per-line text file. */
typedef struct vblab_labels vblab_labels;
VBLAB_API vblab_status vblab_labels_load(const char* path, vblab_labels** out);
VBLAB_API void vblab_labels_destroy(vblab_labels* labels);
VBLAB_API size_t vblab_labels_size(const vblab_labels* labels);
VBLAB_API const int32_t* vblab_labels_data(const vblab_labels* labels);

/* ---- label noise ------------------------------------------------------- */

/* Symmetric or circular noise from labels alone. */
VBLAB_API vblab_status vblab_corrupt_labels(const vblab_noise_model* noise, const int32_t* labels, size_t n, size_t k,
                                            uint64_t seed, vblab_corruption** out);
/* Any noise kind; instance-dependent noise uses the dataset features. */
VBLAB_API vblab_status vblab_corrupt_dataset(const vblab_noise_model* noise, const vblab_dataset* ds, uint64_t seed,
                                             vblab_corruption** out);
VBLAB_API void vblab_corruption_destroy(vblab_corruption* c);
VBLAB_API size_t vblab_corruption_size(const vblab_corruption* c);
VBLAB_API const int32_t* vblab_corruption_noisy_labels(const vblab_corruption* c);
VBLAB_API const uint8_t* vblab_corruption_flip_mask(const vblab_corruption* c);
/* NULL unless the corruption is instance-dependent. */
VBLAB_API const double* vblab_corruption_realized_rates(const vblab_corruption* c);
VBLAB_API double vblab_corruption_flip_fraction(const vblab_corruption* c);
VBLAB_API vblab_status vblab_corruption_write_csv(const vblab_corruption* c, const int32_t* clean_labels,
                                                  const char* path);
/* matrix_out receives k * k row-major entries. */
VBLAB_API vblab_status vblab_transition_matrix(const int32_t* clean, const int32_t* noisy, size_t n, size_t k,
                                               double* matrix_out);

/* ---- experiments ------------------------------------------------------- */

typedef struct vblab_experiment vblab_experiment;
typedef struct vblab_run vblab_run;

typedef struct vblab_metrics_record {
  size_t epoch;
  double train_loss;
  double test_accuracy;
  double test_ece;
  double lr;
} vblab_metrics_record;

typedef struct vblab_run_summary {
  double best_acc;
  double last_acc;
  double gap;
  size_t best_epoch;
  double wall_seconds;
  int diverged;
} vblab_run_summary;

typedef struct vblab_sweep_row {
  double value;
  uint64_t seed;
  vblab_run_summary summary;
} vblab_sweep_row;

/* Parses a version-1 run configuration document. */
VBLAB_API vblab_status vblab_experiment_from_json(const char* json_text, vblab_experiment** out);
VBLAB_API void vblab_experiment_destroy(vblab_experiment* exp);
/* Fully-resolved configuration document. */
VBLAB_API vblab_status vblab_experiment_to_json(const vblab_experiment* exp, char** out);
/* Sweepable parameters (loss.a, loss.alpha, loss.beta, noise.eta) plus
 * "seed", "epochs", "optimizer.lr" and "deterministic" (0 or 1). */
VBLAB_API vblab_status vblab_experiment_set(vblab_experiment* exp, const char* parameter, double value);
/* Output path named in the config ("metrics", "summary", "reliability",
 * "checkpoint", "resolved_config"); "" when unset, NULL for unknown names. */
VBLAB_API const char* vblab_experiment_output(const vblab_experiment* exp, const char* name);
VBLAB_API vblab_status vblab_experiment_set_output(vblab_experiment* exp, const char* name, const char* path);

/* On divergence returns VBLAB_ERR_DIVERGENCE and still hands back the partial
 * run through *out. */
VBLAB_API vblab_status vblab_run_experiment(const vblab_experiment* exp, vblab_run** out);
VBLAB_API void vblab_run_destroy(vblab_run* run);
VBLAB_API size_t vblab_run_record_count(const vblab_run* run);
VBLAB_API vblab_status vblab_run_record(const vblab_run* run, size_t index, vblab_metrics_record* out);
VBLAB_API vblab_status vblab_run_summary_get(const vblab_run* run, vblab_run_summary* out);
VBLAB_API const char* vblab_run_diagnostic(const vblab_run* run);
VBLAB_API vblab_status vblab_run_write_metrics_csv(const vblab_run* run, const char* path);
VBLAB_API vblab_status vblab_run_write_reliability_csv(const vblab_run* run, const char* path);
VBLAB_API vblab_status vblab_run_write_summary_json(const vblab_run* run, const vblab_experiment* exp,
                                                    const char* path);
VBLAB_API vblab_status vblab_run_save_checkpoint(const vblab_run* run, const char* path);

/* rows_out receives n_values rows in value order. */
VBLAB_API vblab_status vblab_sweep(const vblab_experiment* exp, const char* parameter, const double* values,
                                   size_t n_values, size_t jobs, vblab_sweep_row* rows_out);
VBLAB_API vblab_status vblab_sweep_write_csv(const vblab_sweep_row* rows, size_t n_rows, const char* path);

#ifdef __cplusplus
}
#endif

#endif /* VBLAB_VBLAB_H */
