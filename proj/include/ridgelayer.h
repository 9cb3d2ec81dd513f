/* ridgelayer - closed-form ridge regression as a differentiable layer,
 * with shrinkage losses, grid sampling utilities, an online tracking loop
 * and a toy embedding-training harness.
 *
 * Plain C interface over the C++ core: opaque handles, status codes, and
 * rl_last_error() for the most recent failure message on the calling thread.
 * Every function that produces a handle transfers ownership to the caller;
 * release with the matching *_free().
 */

#ifndef RIDGELAYER_H
#define RIDGELAYER_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RL_API __declspec(dllexport)
#else
#define RL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rl_status {
  RL_OK = 0,
  RL_ERR_NULL_ARGUMENT = 1,
  RL_ERR_CONTRACT = 2,        /* shape or argument contract broken */
  RL_ERR_INVALID_CONFIG = 3,  /* configuration value out of range */
  RL_ERR_EMPTY_PROBLEM = 4,   /* zero samples or zero features */
  RL_ERR_SINGULAR = 5,        /* factorization hit a non-positive pivot */
  RL_ERR_FORMAT = 6,          /* malformed tensor file */
  RL_ERR_IO = 7,              /* filesystem failure */
  RL_ERR_INTERNAL = 8
} rl_status;

typedef enum rl_path {
  RL_PATH_AUTO = 0,   /* dual iff features > samples */
  RL_PATH_PRIMAL = 1, /* factor the features x features system */
  RL_PATH_DUAL = 2    /* factor the samples x samples system */
} rl_path;

typedef enum rl_loss_kind {
  RL_LOSS_SHRINKAGE_MODIFIED = 0, /* sigmoid weight on |residual| */
  RL_LOSS_SHRINKAGE_ORIGIN = 1,   /* sigmoid weight on signed residual */
  RL_LOSS_MSE = 2
} rl_loss_kind;

typedef enum rl_reduction { RL_REDUCE_MEAN = 0, RL_REDUCE_SUM = 1 } rl_reduction;

RL_API const char* rl_version(void);

/* Message for the most recent error on this thread; empty string if none. */
RL_API const char* rl_last_error(void);

/* Out-of-the-box configuration. */
typedef struct rl_defaults_t {
  double lambda;       /* 0.1  ridge regularization */
  double shrink_a;     /* 10   shrinkage speed */
  double shrink_c;     /* 0.2  shrinkage localization */
  double update_rate;  /* 0.01 tracker data-matrix blend */
  double learn_rate;   /* 0.005 optimizer step size */
  double sigma_factor; /* 0.1  label bandwidth / target size */
  int32_t grid_side;   /* 31   i.e. 961 samples per region */
} rl_defaults_t;

RL_API void rl_get_defaults(rl_defaults_t* out);

/* Caps kernel parallelism; 0 restores auto (hardware, RIDGELAYER_THREADS). */
RL_API void rl_set_threads(int32_t n);

/* ---- tensors ----------------------------------------------------------
 * Rank-1 (vector) or rank-2 (row-major matrix) real64 arrays. Files use the
 * RLT1 container: "RLT1" | dtype u8 (0=f64) | rank u8 | dims u64*rank |
 * little-endian payload. Round-trips are bit-exact.
 */
typedef struct rl_tensor rl_tensor;

RL_API rl_status rl_tensor_new_matrix(int64_t rows, int64_t cols,
                                      const double* data /* nullable: zeros */,
                                      rl_tensor** out);
RL_API rl_status rl_tensor_new_vector(int64_t len,
                                      const double* data /* nullable: zeros */,
                                      rl_tensor** out);
RL_API rl_status rl_tensor_read(const char* path, rl_tensor** out);
RL_API rl_status rl_tensor_write(const char* path, const rl_tensor* t);
RL_API int32_t rl_tensor_rank(const rl_tensor* t);
/* dim(t, 0) = rows or length, dim(t, 1) = cols; -1 on bad axis. */
RL_API int64_t rl_tensor_dim(const rl_tensor* t, int32_t axis);
RL_API const double* rl_tensor_data(const rl_tensor* t);
RL_API void rl_tensor_free(rl_tensor* t);

RL_API rl_status rl_matmul(const rl_tensor* a, const rl_tensor* b, rl_tensor** out);
/* Solve a x = b for symmetric positive-definite a (rank-2) and b (rank-1). */
RL_API rl_status rl_spd_solve(const rl_tensor* a, const rl_tensor* b, rl_tensor** out);

/* ---- ridge layer ------------------------------------------------------
 * Forward solve of min |X w - y|^2 + lambda |w|^2 with automatic primal /
 * dual switching, plus the analytic backward pass reusing the cached
 * factorization.
 */
typedef struct rl_solve_record rl_solve_record;

RL_API rl_status rl_ridge_solve(const rl_tensor* x /* n x d */,
                                const rl_tensor* y /* n */, double lambda,
                                rl_path path, rl_solve_record** out);
RL_API rl_status rl_solve_record_weights(const rl_solve_record* rec, rl_tensor** out);
RL_API rl_path rl_solve_record_path(const rl_solve_record* rec);
/* Max-norm of (XT X + lambda I) w - XT y. */
RL_API rl_status rl_solve_record_residual(const rl_solve_record* rec, double* out);
/* Gradients of a scalar loss with upstream grad_w (length d):
 * d_x is n x d, d_y is length n. */
RL_API rl_status rl_ridge_backward(const rl_solve_record* rec,
                                   const rl_tensor* grad_w, rl_tensor** d_x,
                                   rl_tensor** d_y);
RL_API void rl_solve_record_free(rl_solve_record* rec);

/* yhat = Z w. */
RL_API rl_status rl_predict(const rl_tensor* z, const rl_tensor* w, rl_tensor** out);

/* ---- losses ----------------------------------------------------------- */
/* Loss value plus dloss/dpred. a and c are ignored for RL_LOSS_MSE. */
RL_API rl_status rl_loss(rl_loss_kind kind, const rl_tensor* pred,
                         const rl_tensor* y, double a, double c,
                         rl_reduction reduction, double* loss_out,
                         rl_tensor** d_pred_out);

/* ---- sampling grid, labels, features ----------------------------------- */
typedef struct rl_grid rl_grid;

/* grid_side must be odd; samples form a grid_side^2 lattice spanning a
 * square region of side region_size centered at (cx, cy). */
RL_API rl_status rl_grid_make(double cx, double cy, double region_size,
                              double target_w, double target_h,
                              int32_t grid_side, rl_grid** out);
RL_API int64_t rl_grid_count(const rl_grid* g);
RL_API double rl_grid_spacing(const rl_grid* g);
RL_API rl_status rl_grid_center(const rl_grid* g, int64_t index, double* x, double* y);
RL_API void rl_grid_free(rl_grid* g);

/* Labels exp(-dist^2 / (2 sigma^2)), sigma = sigma_factor * sqrt(tw * th). */
RL_API rl_status rl_gaussian_labels(const rl_grid* g, double target_x,
                                    double target_y, double sigma_factor,
                                    rl_tensor** out);

/* Seeded synthetic features: a fixed random projection of a smooth radial
 * encoding of each sample's displacement from the target, plus Gaussian
 * noise. Deterministic per seed. */
RL_API rl_status rl_synthetic_features(const rl_grid* g, double target_x,
                                       double target_y, int64_t dim, double noise,
                                       uint64_t seed, rl_tensor** out);

/* ---- online tracker ----------------------------------------------------
 * Train on frame one, blend X_t = (1-delta) X_{t-1} + delta X~_t per frame,
 * localize at the argmax of Z w (lowest index on ties).
 */
typedef struct rl_tracker rl_tracker;

RL_API rl_status rl_tracker_init(const rl_tensor* features, const rl_tensor* labels,
                                 double cx, double cy, double lambda, double delta,
                                 rl_path path, rl_tracker** out);
RL_API rl_status rl_tracker_update(rl_tracker* t, const rl_tensor* features);
RL_API rl_status rl_tracker_localize(rl_tracker* t, const rl_tensor* features,
                                     const rl_grid* grid, int64_t* index,
                                     double* score, double* cx, double* cy);
RL_API rl_status rl_tracker_weights(const rl_tracker* t, rl_tensor** out);
RL_API rl_status rl_tracker_data_matrix(const rl_tracker* t, rl_tensor** out);
RL_API int64_t rl_tracker_frame_index(const rl_tracker* t);
RL_API void rl_tracker_free(rl_tracker* t);

/* ---- sequence runners, gradcheck, bench (CLI backends) ----------------- */

typedef struct rl_track_synth_config {
  int64_t frames;      /* 100 */
  int32_t grid_side;   /* 31 */
  int64_t dim;         /* 32 */
  double noise;        /* 0.05 */
  double drift;        /* 0.3 grid cells per frame */
  double target_w;     /* 40 */
  double target_h;     /* 40 */
  double region_scale; /* 5 */
  double sigma_factor; /* 0.1 */
  double lambda;       /* 0.1 */
  double delta;        /* 0.01 */
  uint64_t seed;       /* 1 */
  double start_x;      /* 200 */
  double start_y;      /* 150 */
} rl_track_synth_config;

RL_API void rl_track_synth_config_default(rl_track_synth_config* cfg);

typedef struct rl_track_summary {
  int64_t frames;
  double mean_error; /* over frames with ground truth */
  double spacing;    /* grid cell size */
} rl_track_summary;

/* Runs the drifting-target synthetic sequence; optionally writes the
 * per-frame trajectory as TSV to traj_path. */
RL_API rl_status rl_track_synthetic(const rl_track_synth_config* cfg,
                                    const char* traj_path /* nullable */,
                                    rl_track_summary* out);

/* Tracks over per-frame RLT1 matrices in frames_dir (sorted by name); each
 * frame's matrix drives the localization and then the update. gt_path, when
 * given, holds one "cx cy" line per frame for error reporting. */
RL_API rl_status rl_track_files(const char* frames_dir,
                                const char* gt_path /* nullable */, double init_x,
                                double init_y, int32_t grid_side, double region_size,
                                double target_w, double target_h,
                                double sigma_factor, double lambda, double delta,
                                const char* traj_path /* nullable */,
                                rl_track_summary* out);

/* Backward-pass check against central finite differences: the solver-level
 * probe on both paths and the end-to-end embedding chain with the given
 * loss. Both maxima must stay at or below 1e-4 to count as a pass. */
RL_API rl_status rl_gradcheck(int64_t n, int64_t d, rl_loss_kind kind,
                              uint64_t seed, double lambda,
                              double* max_rel_ridge, double* max_rel_end2end);

typedef struct rl_bench_times {
  double gram_ms;  /* normal-system assembly */
  double solve_ms; /* factor + substitutions (+ dual back-map) */
  double total_ms;
} rl_bench_times;

/* Median stage timings for both paths on one seeded n x d problem. */
RL_API rl_status rl_bench_cell(int64_t n, int64_t d, double lambda, int32_t reps,
                               uint64_t seed, rl_bench_times* primal,
                               rl_bench_times* dual, int32_t* auto_is_dual);

/* ---- training harness --------------------------------------------------- */

typedef struct rl_train_config {
  int64_t steps;        /* 200 */
  double lr;            /* 0.005 */
  int64_t batch_pairs;  /* 1 */
  int32_t loss;         /* rl_loss_kind, modified */
  uint64_t seed;        /* 1 */
  int32_t grid_side;    /* 31 */
  int64_t dim_in;       /* 16 */
  int64_t dim_out;      /* 4 */
  double noise;         /* 0.05 */
  double lambda;        /* 0.1 */
  double sigma_factor;  /* 0.1 */
  double shrink_a;      /* 10 */
  double shrink_c;      /* 0.2 */
  int64_t num_pairs;    /* 8 */
  int64_t checkpoint_every; /* 50 */
} rl_train_config;

RL_API void rl_train_config_default(rl_train_config* cfg);

typedef struct rl_train_summary {
  double initial_loss;
  double final_loss;
} rl_train_summary;

/* Writes metrics.tsv (step, loss, grad_norm) and RLT1 embedding checkpoints
 * under out_dir. echo_wall != 0 prints "# wall ..." timing lines to stdout. */
RL_API rl_status rl_train_run(const rl_train_config* cfg, const char* out_dir,
                              int32_t echo_wall, rl_train_summary* out);

typedef struct rl_compare_summary {
  int64_t steps_to_threshold_mse;      /* steps+1 when never reached */
  int64_t steps_to_threshold_origin;
  int64_t steps_to_threshold_modified;
  double threshold;
  int32_t modified_not_slower_than_mse;
} rl_compare_summary;

/* Trains one identically-seeded embedding per loss on the same task; writes
 * aligned curves.tsv and report.txt under out_dir. */
RL_API rl_status rl_compare_losses(const rl_train_config* cfg, double val_threshold,
                                   const char* out_dir, rl_compare_summary* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* RIDGELAYER_H */
