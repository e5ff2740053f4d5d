/* Copyright 2026 The guidelab Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to guidelab. Every call returns a gl_status; on failure the
 * thread's last error message is available through gl_last_error().
 * Objects are opaque handles released with their matching *_free call.
 * Point batches are column-major: point j occupies x[j*d .. j*d + d).
 */
#ifndef GUIDELAB_GUIDELAB_H_
#define GUIDELAB_GUIDELAB_H_

#include <stddef.h>
#include <stdint.h>

#if defined(GUIDELAB_BUILDING)
#define GL_API __attribute__((visibility("default")))
#else
#define GL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gl_status {
  GL_OK = 0,
  GL_ERR_INVALID_ARGUMENT = 1,
  GL_ERR_SHAPE = 2,
  GL_ERR_IO = 3,
  GL_ERR_FORMAT = 4,
  GL_ERR_VERSION = 5,
  GL_ERR_TRUNCATED = 6,
  GL_ERR_CONFIG = 7,
  GL_ERR_MISSING_HANDLE = 8,
  GL_ERR_PRECONDITION = 9,
  GL_ERR_INTERNAL = 10
} gl_status;

GL_API const char* gl_version(void);
GL_API const char* gl_status_name(gl_status status);
/* Message of the last failed call on this thread; "" after a success. */
GL_API const char* gl_last_error(void);

/* ---- configuration ---- */
typedef struct gl_config gl_config;

GL_API gl_status gl_config_default(gl_config** out);
GL_API gl_status gl_config_load(const char* path, gl_config** out);
GL_API gl_status gl_config_parse(const char* text, gl_config** out);
GL_API gl_status gl_config_set(gl_config* cfg, const char* key, const char* value);
/* Writes the canonical text (NUL-terminated) when cap is large enough;
 * *needed always receives the required size including the NUL. */
GL_API gl_status gl_config_to_text(const gl_config* cfg, char* buf, size_t cap,
                                   size_t* needed);
GL_API void gl_config_free(gl_config* cfg);

/* ---- pipeline ---- */
typedef struct gl_cell_row {
  int cell;
  int robust;
  int x0pred;
  int adam;
  double fid;
  double accuracy;
  uint64_t seed;
  double mean_cosine;
} gl_cell_row;

typedef struct gl_sweep_row {
  double scale;
  double fid;
  double accuracy;
  uint64_t seed;
} gl_sweep_row;

GL_API gl_status gl_gen_data(const gl_config* cfg);
/* Either accuracy pointer may be NULL. */
GL_API gl_status gl_train_classifiers(const gl_config* cfg, double* clean_val_accuracy,
                                      double* noisy_val_accuracy);
GL_API gl_status gl_train_denoiser(const gl_config* cfg, double* final_loss);
GL_API gl_status gl_sample(const gl_config* cfg, gl_cell_row* row);
/* Runs the grid and writes its outputs. rows may be NULL when cap is 0;
 * *count receives the number of cells run. */
GL_API gl_status gl_run_grid(const gl_config* cfg, gl_cell_row* rows, size_t cap,
                             size_t* count);
/* Sweeps the config's cell over n scales, or over its sweep_scales when n
 * is 0. Up to cap rows are written, sorted by scale; *count receives the
 * number of scales run. */
GL_API gl_status gl_run_sweep(const gl_config* cfg, const double* scales, size_t n,
                              gl_sweep_row* rows, size_t cap, size_t* count);

/* ---- schedule ---- */
typedef struct gl_schedule gl_schedule;
enum { GL_VARIANCE_POSTERIOR = 0, GL_VARIANCE_BETA = 1 };

GL_API gl_status gl_schedule_linear(int steps, double beta_start, double beta_end,
                                    int variance_kind, gl_schedule** out);
GL_API gl_status gl_schedule_from_config(const gl_config* cfg, gl_schedule** out);
GL_API int gl_schedule_steps(const gl_schedule* sched);
/* t in 0..T; alpha_bar(0) = 1. */
GL_API gl_status gl_schedule_alpha_bar(const gl_schedule* sched, int t, double* out);
GL_API gl_status gl_schedule_sigma2(const gl_schedule* sched, int t, double* out);
GL_API void gl_schedule_free(gl_schedule* sched);

/* ---- analytic Gaussian-mixture world ---- */
typedef struct gl_gmm gl_gmm;
enum { GL_CLASSIFIER_ROBUST = 0, GL_CLASSIFIER_NONROBUST = 1 };

GL_API gl_status gl_gmm_from_config(const gl_config* cfg, gl_gmm** out);
GL_API int gl_gmm_dim(const gl_gmm* gmm);
GL_API int gl_gmm_num_classes(const gl_gmm* gmm);
/* out: num_classes entries of log p(y|x). */
GL_API gl_status gl_gmm_log_posterior(const gl_gmm* gmm, const gl_schedule* sched,
                                      const double* x, int t, int kind, double* out);
/* out: dim entries of the gradient of log p(y|x). */
GL_API gl_status gl_gmm_grad_log_posterior(const gl_gmm* gmm, const gl_schedule* sched,
                                           const double* x, int t, int y, int kind,
                                           double* out);
GL_API gl_status gl_gmm_exact_eps(const gl_gmm* gmm, const gl_schedule* sched,
                                  const double* x, int t, double* out);
GL_API gl_status gl_gmm_posterior_mean(const gl_gmm* gmm, const gl_schedule* sched,
                                       const double* x, int t, double* out);
GL_API void gl_gmm_free(gl_gmm* gmm);

/* ---- trained networks ---- */
typedef struct gl_mlp gl_mlp;

GL_API gl_status gl_mlp_load(const char* path, gl_mlp** out);
GL_API int gl_mlp_input_dim(const gl_mlp* mlp);
GL_API int gl_mlp_output_dim(const gl_mlp* mlp);
GL_API int gl_mlp_time_conditioned(const gl_mlp* mlp);
/* x: n points of input_dim; tfeat: n pairs (t/T, alpha_bar) or NULL for
 * unconditioned nets; out: n points of output_dim. */
GL_API gl_status gl_mlp_forward(const gl_mlp* mlp, const double* x, size_t n,
                                const double* tfeat, double* out);
GL_API void gl_mlp_free(gl_mlp* mlp);

/* ---- metrics ---- */
GL_API gl_status gl_frechet_distance(const double* a, size_t na, const double* b,
                                     size_t nb, int dim, double* out);

#ifdef __cplusplus
}
#endif

#endif /* GUIDELAB_GUIDELAB_H_ */
