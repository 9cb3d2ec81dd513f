#include "ridgelayer.h"

#include <cstring>
#include <exception>
#include <iostream>
#include <new>
#include <optional>
#include <string>
#include <utility>
#include <variant>

#include "core/bench.hpp"
#include "core/defaults.hpp"
#include "core/gradcheck.hpp"
#include "core/loss.hpp"
#include "core/parallel.hpp"
#include "core/ridge.hpp"
#include "core/sampling.hpp"
#include "core/tensor_io.hpp"
#include "core/tracker.hpp"
#include "core/train.hpp"

namespace rl = ridgelayer;

struct rl_tensor {
  rl::Tensor value;
};

struct rl_solve_record {
  rl::SolveRecord rec;
};

struct rl_grid {
  rl::SampleGrid grid;
};

struct rl_tracker {
  rl::Tracker tracker;
};

namespace {

thread_local std::string g_last_error;

void set_error(const char* what) { g_last_error = what != nullptr ? what : ""; }

template <typename Fn>
rl_status wrap(Fn&& fn) noexcept {
  try {
    fn();
    g_last_error.clear();
    return RL_OK;
  } catch (const rl::FormatError& e) {
    set_error(e.what());
    return RL_ERR_FORMAT;
  } catch (const rl::IoError& e) {
    set_error(e.what());
    return RL_ERR_IO;
  } catch (const rl::SingularSystem& e) {
    set_error(e.what());
    return RL_ERR_SINGULAR;
  } catch (const rl::EmptyProblem& e) {
    set_error(e.what());
    return RL_ERR_EMPTY_PROBLEM;
  } catch (const rl::InvalidConfig& e) {
    set_error(e.what());
    return RL_ERR_INVALID_CONFIG;
  } catch (const rl::ContractViolation& e) {
    set_error(e.what());
    return RL_ERR_CONTRACT;
  } catch (const std::bad_alloc&) {
    set_error("out of memory");
    return RL_ERR_INTERNAL;
  } catch (const std::exception& e) {
    set_error(e.what());
    return RL_ERR_INTERNAL;
  }
}

rl_status require(bool ok, const char* what) {
  if (ok) return RL_OK;
  set_error(what);
  return RL_ERR_NULL_ARGUMENT;
}

#define RL_REQUIRE(cond, what)                              \
  if (const rl_status s = require((cond), (what)); s != RL_OK) return s

const rl::Matrix& as_matrix(const rl_tensor* t) {
  if (const auto* m = std::get_if<rl::Matrix>(&t->value)) return *m;
  throw rl::ContractViolation("expected a rank-2 tensor");
}

const rl::Vector& as_vector(const rl_tensor* t) {
  if (const auto* v = std::get_if<rl::Vector>(&t->value)) return *v;
  throw rl::ContractViolation("expected a rank-1 tensor");
}

rl_tensor* make_tensor(rl::Tensor value) {
  return new rl_tensor{std::move(value)};
}

rl_path to_c_path(rl::RidgePath p) {
  return p == rl::RidgePath::kDual ? RL_PATH_DUAL : RL_PATH_PRIMAL;
}

rl::RidgePath from_c_path(rl_path p) {
  switch (p) {
    case RL_PATH_PRIMAL:
      return rl::RidgePath::kPrimal;
    case RL_PATH_DUAL:
      return rl::RidgePath::kDual;
    default:
      return rl::RidgePath::kAuto;
  }
}

rl::LossKind from_c_loss(int32_t kind) {
  switch (kind) {
    case RL_LOSS_SHRINKAGE_ORIGIN:
      return rl::LossKind::kShrinkageOrigin;
    case RL_LOSS_MSE:
      return rl::LossKind::kMse;
    default:
      return rl::LossKind::kShrinkageModified;
  }
}

void require_non_negative(long long value, const char* what) {
  if (value < 0)
    throw rl::InvalidConfig(std::string(what) + " must be non-negative");
}

rl::TrainConfig from_c_train(const rl_train_config& c) {
  require_non_negative(c.steps, "steps");
  require_non_negative(c.batch_pairs, "batch_pairs");
  require_non_negative(c.grid_side, "grid_side");
  require_non_negative(c.dim_in, "dim_in");
  require_non_negative(c.dim_out, "dim_out");
  require_non_negative(c.num_pairs, "num_pairs");
  require_non_negative(c.checkpoint_every, "checkpoint_every");
  rl::TrainConfig cfg;
  cfg.steps = static_cast<std::size_t>(c.steps);
  cfg.lr = c.lr;
  cfg.batch_pairs = static_cast<std::size_t>(c.batch_pairs);
  cfg.loss = from_c_loss(c.loss);
  cfg.seed = c.seed;
  cfg.grid_side = static_cast<std::size_t>(c.grid_side);
  cfg.dim_in = static_cast<std::size_t>(c.dim_in);
  cfg.dim_out = static_cast<std::size_t>(c.dim_out);
  cfg.noise = c.noise;
  cfg.lambda = c.lambda;
  cfg.sigma_factor = c.sigma_factor;
  cfg.shrink.a = c.shrink_a;
  cfg.shrink.c = c.shrink_c;
  cfg.num_pairs = static_cast<std::size_t>(c.num_pairs);
  cfg.checkpoint_every = static_cast<std::size_t>(c.checkpoint_every);
  return cfg;
}

}  // namespace

extern "C" {

const char* rl_version(void) { return "0.1.0"; }

const char* rl_last_error(void) { return g_last_error.c_str(); }

void rl_get_defaults(rl_defaults_t* out) {
  if (out == nullptr) return;
  out->lambda = rl::Defaults::kLambda;
  out->shrink_a = rl::Defaults::kShrinkA;
  out->shrink_c = rl::Defaults::kShrinkC;
  out->update_rate = rl::Defaults::kUpdateRate;
  out->learn_rate = rl::Defaults::kLearnRate;
  out->sigma_factor = rl::Defaults::kSigmaFactor;
  out->grid_side = static_cast<int32_t>(rl::Defaults::kGridSide);
}

void rl_set_threads(int32_t n) {
  rl::set_thread_count(n > 0 ? static_cast<std::size_t>(n) : 0);
}

/* ---- tensors ---- */

rl_status rl_tensor_new_matrix(int64_t rows, int64_t cols, const double* data,
                               rl_tensor** out) {
  RL_REQUIRE(out != nullptr, "out is null");
  RL_REQUIRE(rows >= 0 && cols >= 0, "dimensions must be non-negative");
  return wrap([&] {
    rl::Matrix m(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
    if (data != nullptr)
      std::memcpy(m.data(), data, sizeof(double) * m.size());
    *out = make_tensor(std::move(m));
  });
}

rl_status rl_tensor_new_vector(int64_t len, const double* data, rl_tensor** out) {
  RL_REQUIRE(out != nullptr, "out is null");
  RL_REQUIRE(len >= 0, "length must be non-negative");
  return wrap([&] {
    rl::Vector v(static_cast<std::size_t>(len));
    if (data != nullptr)
      std::memcpy(v.data(), data, sizeof(double) * v.size());
    *out = make_tensor(std::move(v));
  });
}

rl_status rl_tensor_read(const char* path, rl_tensor** out) {
  RL_REQUIRE(path != nullptr && out != nullptr, "path and out must be non-null");
  return wrap([&] { *out = make_tensor(rl::read_tensor(path)); });
}

rl_status rl_tensor_write(const char* path, const rl_tensor* t) {
  RL_REQUIRE(path != nullptr && t != nullptr, "path and tensor must be non-null");
  return wrap([&] { rl::write_tensor(path, t->value); });
}

int32_t rl_tensor_rank(const rl_tensor* t) {
  if (t == nullptr) return 0;
  return std::holds_alternative<rl::Matrix>(t->value) ? 2 : 1;
}

int64_t rl_tensor_dim(const rl_tensor* t, int32_t axis) {
  if (t == nullptr || axis < 0) return -1;
  if (const auto* m = std::get_if<rl::Matrix>(&t->value)) {
    if (axis == 0) return static_cast<int64_t>(m->rows());
    if (axis == 1) return static_cast<int64_t>(m->cols());
    return -1;
  }
  if (axis == 0) return static_cast<int64_t>(std::get<rl::Vector>(t->value).size());
  return -1;
}

const double* rl_tensor_data(const rl_tensor* t) {
  if (t == nullptr) return nullptr;
  if (const auto* m = std::get_if<rl::Matrix>(&t->value)) return m->data();
  return std::get<rl::Vector>(t->value).data();
}

void rl_tensor_free(rl_tensor* t) { delete t; }

rl_status rl_matmul(const rl_tensor* a, const rl_tensor* b, rl_tensor** out) {
  RL_REQUIRE(a != nullptr && b != nullptr && out != nullptr, "arguments must be non-null");
  return wrap([&] { *out = make_tensor(rl::matmul(as_matrix(a), as_matrix(b))); });
}

rl_status rl_spd_solve(const rl_tensor* a, const rl_tensor* b, rl_tensor** out) {
  RL_REQUIRE(a != nullptr && b != nullptr && out != nullptr, "arguments must be non-null");
  return wrap([&] { *out = make_tensor(rl::spd_solve(as_matrix(a), as_vector(b))); });
}

/* ---- ridge layer ---- */

rl_status rl_ridge_solve(const rl_tensor* x, const rl_tensor* y, double lambda,
                         rl_path path, rl_solve_record** out) {
  RL_REQUIRE(x != nullptr && y != nullptr && out != nullptr, "arguments must be non-null");
  return wrap([&] {
    *out = new rl_solve_record{
        rl::ridge_forward(as_matrix(x), as_vector(y), {lambda, from_c_path(path)})};
  });
}

rl_status rl_solve_record_weights(const rl_solve_record* rec, rl_tensor** out) {
  RL_REQUIRE(rec != nullptr && out != nullptr, "arguments must be non-null");
  return wrap([&] { *out = make_tensor(rec->rec.weights()); });
}

rl_path rl_solve_record_path(const rl_solve_record* rec) {
  return rec != nullptr ? to_c_path(rec->rec.path_taken()) : RL_PATH_PRIMAL;
}

rl_status rl_solve_record_residual(const rl_solve_record* rec, double* out) {
  RL_REQUIRE(rec != nullptr && out != nullptr, "arguments must be non-null");
  return wrap([&] { *out = rec->rec.normal_equation_residual(); });
}

rl_status rl_ridge_backward(const rl_solve_record* rec, const rl_tensor* grad_w,
                            rl_tensor** d_x, rl_tensor** d_y) {
  RL_REQUIRE(rec != nullptr && grad_w != nullptr && d_x != nullptr && d_y != nullptr,
             "arguments must be non-null");
  return wrap([&] {
    rl::RidgeGradients g = rl::ridge_backward(rec->rec, as_vector(grad_w));
    *d_x = make_tensor(std::move(g.d_x));
    *d_y = make_tensor(std::move(g.d_y));
  });
}

void rl_solve_record_free(rl_solve_record* rec) { delete rec; }

rl_status rl_predict(const rl_tensor* z, const rl_tensor* w, rl_tensor** out) {
  RL_REQUIRE(z != nullptr && w != nullptr && out != nullptr, "arguments must be non-null");
  return wrap([&] { *out = make_tensor(rl::predict(as_matrix(z), as_vector(w))); });
}

/* ---- losses ---- */

rl_status rl_loss(rl_loss_kind kind, const rl_tensor* pred, const rl_tensor* y,
                  double a, double c, rl_reduction reduction, double* loss_out,
                  rl_tensor** d_pred_out) {
  RL_REQUIRE(pred != nullptr && y != nullptr && loss_out != nullptr &&
                 d_pred_out != nullptr,
             "arguments must be non-null");
  return wrap([&] {
    rl::ShrinkageParams params;
    params.a = a;
    params.c = c;
    params.reduction =
        reduction == RL_REDUCE_SUM ? rl::Reduction::kSum : rl::Reduction::kMean;
    rl::LossResult res =
        rl::evaluate_loss(from_c_loss(kind), as_vector(pred), as_vector(y), params);
    *loss_out = res.loss;
    *d_pred_out = make_tensor(std::move(res.d_pred));
  });
}

/* ---- sampling ---- */

rl_status rl_grid_make(double cx, double cy, double region_size, double target_w,
                       double target_h, int32_t grid_side, rl_grid** out) {
  RL_REQUIRE(out != nullptr, "out is null");
  RL_REQUIRE(grid_side >= 0, "grid_side must be non-negative");
  return wrap([&] {
    *out = new rl_grid{rl::SampleGrid({cx, cy}, region_size, target_w, target_h,
                                      static_cast<std::size_t>(grid_side))};
  });
}

int64_t rl_grid_count(const rl_grid* g) {
  return g != nullptr ? static_cast<int64_t>(g->grid.count()) : 0;
}

double rl_grid_spacing(const rl_grid* g) {
  return g != nullptr ? g->grid.spacing() : 0.0;
}

rl_status rl_grid_center(const rl_grid* g, int64_t index, double* x, double* y) {
  RL_REQUIRE(g != nullptr && x != nullptr && y != nullptr, "arguments must be non-null");
  return wrap([&] {
    if (index < 0 || static_cast<std::size_t>(index) >= g->grid.count())
      throw rl::ContractViolation("grid index out of range");
    const rl::Point p = g->grid.center(static_cast<std::size_t>(index));
    *x = p.x;
    *y = p.y;
  });
}

void rl_grid_free(rl_grid* g) { delete g; }

rl_status rl_gaussian_labels(const rl_grid* g, double target_x, double target_y,
                             double sigma_factor, rl_tensor** out) {
  RL_REQUIRE(g != nullptr && out != nullptr, "arguments must be non-null");
  return wrap([&] {
    *out = make_tensor(
        rl::gaussian_labels(g->grid, {target_x, target_y}, {sigma_factor}));
  });
}

rl_status rl_synthetic_features(const rl_grid* g, double target_x, double target_y,
                                int64_t dim, double noise, uint64_t seed,
                                rl_tensor** out) {
  RL_REQUIRE(g != nullptr && out != nullptr, "arguments must be non-null");
  RL_REQUIRE(dim >= 0, "dim must be non-negative");
  return wrap([&] {
    *out = make_tensor(rl::synthetic_features(
        g->grid, {target_x, target_y}, static_cast<std::size_t>(dim), noise, seed));
  });
}

/* ---- tracker ---- */

rl_status rl_tracker_init(const rl_tensor* features, const rl_tensor* labels,
                          double cx, double cy, double lambda, double delta,
                          rl_path path, rl_tracker** out) {
  RL_REQUIRE(features != nullptr && labels != nullptr && out != nullptr,
             "arguments must be non-null");
  return wrap([&] {
    *out = new rl_tracker{rl::Tracker(as_matrix(features), as_vector(labels),
                                      {cx, cy},
                                      {lambda, delta, from_c_path(path)})};
  });
}

rl_status rl_tracker_update(rl_tracker* t, const rl_tensor* features) {
  RL_REQUIRE(t != nullptr && features != nullptr, "arguments must be non-null");
  return wrap([&] { t->tracker.update(as_matrix(features)); });
}

rl_status rl_tracker_localize(rl_tracker* t, const rl_tensor* features,
                              const rl_grid* grid, int64_t* index, double* score,
                              double* cx, double* cy) {
  RL_REQUIRE(t != nullptr && features != nullptr && grid != nullptr &&
                 index != nullptr && score != nullptr && cx != nullptr && cy != nullptr,
             "arguments must be non-null");
  return wrap([&] {
    const auto loc = t->tracker.localize(as_matrix(features), grid->grid);
    *index = static_cast<int64_t>(loc.index);
    *score = loc.score;
    *cx = loc.center.x;
    *cy = loc.center.y;
  });
}

rl_status rl_tracker_weights(const rl_tracker* t, rl_tensor** out) {
  RL_REQUIRE(t != nullptr && out != nullptr, "arguments must be non-null");
  return wrap([&] { *out = make_tensor(t->tracker.weights()); });
}

rl_status rl_tracker_data_matrix(const rl_tracker* t, rl_tensor** out) {
  RL_REQUIRE(t != nullptr && out != nullptr, "arguments must be non-null");
  return wrap([&] { *out = make_tensor(t->tracker.data_matrix()); });
}

int64_t rl_tracker_frame_index(const rl_tracker* t) {
  return t != nullptr ? static_cast<int64_t>(t->tracker.frame_index()) : 0;
}

void rl_tracker_free(rl_tracker* t) { delete t; }

/* ---- runners ---- */

void rl_track_synth_config_default(rl_track_synth_config* cfg) {
  if (cfg == nullptr) return;
  const rl::SyntheticTrackConfig d;
  cfg->frames = static_cast<int64_t>(d.frames);
  cfg->grid_side = static_cast<int32_t>(d.grid_side);
  cfg->dim = static_cast<int64_t>(d.dim);
  cfg->noise = d.noise;
  cfg->drift = d.drift;
  cfg->target_w = d.target_w;
  cfg->target_h = d.target_h;
  cfg->region_scale = d.region_scale;
  cfg->sigma_factor = d.sigma_factor;
  cfg->lambda = d.lambda;
  cfg->delta = d.delta;
  cfg->seed = d.seed;
  cfg->start_x = d.start.x;
  cfg->start_y = d.start.y;
}

rl_status rl_track_synthetic(const rl_track_synth_config* cfg, const char* traj_path,
                             rl_track_summary* out) {
  RL_REQUIRE(cfg != nullptr && out != nullptr, "arguments must be non-null");
  return wrap([&] {
    require_non_negative(cfg->frames, "frames");
    require_non_negative(cfg->grid_side, "grid_side");
    require_non_negative(cfg->dim, "dim");
    rl::SyntheticTrackConfig c;
    c.frames = static_cast<std::size_t>(cfg->frames);
    c.grid_side = static_cast<std::size_t>(cfg->grid_side);
    c.dim = static_cast<std::size_t>(cfg->dim);
    c.noise = cfg->noise;
    c.drift = cfg->drift;
    c.target_w = cfg->target_w;
    c.target_h = cfg->target_h;
    c.region_scale = cfg->region_scale;
    c.sigma_factor = cfg->sigma_factor;
    c.lambda = cfg->lambda;
    c.delta = cfg->delta;
    c.seed = cfg->seed;
    c.start = {cfg->start_x, cfg->start_y};
    const rl::TrackSummary summary = rl::track_synthetic(c);
    if (traj_path != nullptr) rl::write_trajectory(summary, traj_path);
    out->frames = static_cast<int64_t>(summary.frames.size());
    out->mean_error = summary.mean_error;
    out->spacing = summary.spacing;
  });
}

rl_status rl_track_files(const char* frames_dir, const char* gt_path, double init_x,
                         double init_y, int32_t grid_side, double region_size,
                         double target_w, double target_h, double sigma_factor,
                         double lambda, double delta, const char* traj_path,
                         rl_track_summary* out) {
  RL_REQUIRE(frames_dir != nullptr && out != nullptr, "arguments must be non-null");
  return wrap([&] {
    require_non_negative(grid_side, "grid_side");
    rl::FileTrackConfig c;
    c.frames_dir = frames_dir;
    if (gt_path != nullptr) c.ground_truth = std::filesystem::path(gt_path);
    c.init_center = {init_x, init_y};
    c.grid_side = static_cast<std::size_t>(grid_side);
    c.region_size = region_size;
    c.target_w = target_w;
    c.target_h = target_h;
    c.sigma_factor = sigma_factor;
    c.lambda = lambda;
    c.delta = delta;
    const rl::TrackSummary summary = rl::track_files(c);
    if (traj_path != nullptr) rl::write_trajectory(summary, traj_path);
    out->frames = static_cast<int64_t>(summary.frames.size());
    out->mean_error = summary.mean_error;
    out->spacing = summary.spacing;
  });
}

rl_status rl_gradcheck(int64_t n, int64_t d, rl_loss_kind kind, uint64_t seed,
                       double lambda, double* max_rel_ridge, double* max_rel_end2end) {
  RL_REQUIRE(max_rel_ridge != nullptr && max_rel_end2end != nullptr,
             "arguments must be non-null");
  RL_REQUIRE(n >= 0 && d >= 0, "n and d must be non-negative");
  return wrap([&] {
    const rl::GradCheckReport report =
        rl::gradcheck_run(static_cast<std::size_t>(n), static_cast<std::size_t>(d),
                          from_c_loss(kind), seed, lambda);
    *max_rel_ridge = report.max_rel_ridge;
    *max_rel_end2end = report.max_rel_end2end;
  });
}

rl_status rl_bench_cell(int64_t n, int64_t d, double lambda, int32_t reps,
                        uint64_t seed, rl_bench_times* primal, rl_bench_times* dual,
                        int32_t* auto_is_dual) {
  RL_REQUIRE(primal != nullptr && dual != nullptr && auto_is_dual != nullptr,
             "arguments must be non-null");
  RL_REQUIRE(n >= 0 && d >= 0, "n and d must be non-negative");
  return wrap([&] {
    const rl::BenchCell cell = rl::bench_cell(
        static_cast<std::size_t>(n), static_cast<std::size_t>(d), lambda, reps, seed);
    *primal = {cell.primal.gram_ms, cell.primal.solve_ms, cell.primal.total_ms};
    *dual = {cell.dual.gram_ms, cell.dual.solve_ms, cell.dual.total_ms};
    *auto_is_dual = cell.auto_is_dual ? 1 : 0;
  });
}

/* ---- training ---- */

void rl_train_config_default(rl_train_config* cfg) {
  if (cfg == nullptr) return;
  const rl::TrainConfig d;
  cfg->steps = static_cast<int64_t>(d.steps);
  cfg->lr = d.lr;
  cfg->batch_pairs = static_cast<int64_t>(d.batch_pairs);
  cfg->loss = RL_LOSS_SHRINKAGE_MODIFIED;
  cfg->seed = d.seed;
  cfg->grid_side = static_cast<int32_t>(d.grid_side);
  cfg->dim_in = static_cast<int64_t>(d.dim_in);
  cfg->dim_out = static_cast<int64_t>(d.dim_out);
  cfg->noise = d.noise;
  cfg->lambda = d.lambda;
  cfg->sigma_factor = d.sigma_factor;
  cfg->shrink_a = d.shrink.a;
  cfg->shrink_c = d.shrink.c;
  cfg->num_pairs = static_cast<int64_t>(d.num_pairs);
  cfg->checkpoint_every = static_cast<int64_t>(d.checkpoint_every);
}

rl_status rl_train_run(const rl_train_config* cfg, const char* out_dir,
                       int32_t echo_wall, rl_train_summary* out) {
  RL_REQUIRE(cfg != nullptr && out_dir != nullptr && out != nullptr,
             "arguments must be non-null");
  return wrap([&] {
    const rl::TrainSummary summary = rl::train_run(
        from_c_train(*cfg), out_dir, echo_wall != 0 ? &std::cout : nullptr);
    out->initial_loss = summary.initial_loss;
    out->final_loss = summary.final_loss;
  });
}

rl_status rl_compare_losses(const rl_train_config* cfg, double val_threshold,
                            const char* out_dir, rl_compare_summary* out) {
  RL_REQUIRE(cfg != nullptr && out_dir != nullptr && out != nullptr,
             "arguments must be non-null");
  return wrap([&] {
    const rl::CompareSummary summary = rl::compare_losses_run(
        from_c_train(*cfg), val_threshold, out_dir, &std::cout);
    out->steps_to_threshold_mse =
        static_cast<int64_t>(summary.curves[0].steps_to_threshold);
    out->steps_to_threshold_origin =
        static_cast<int64_t>(summary.curves[1].steps_to_threshold);
    out->steps_to_threshold_modified =
        static_cast<int64_t>(summary.curves[2].steps_to_threshold);
    out->threshold = summary.threshold;
    out->modified_not_slower_than_mse = summary.modified_not_slower_than_mse ? 1 : 0;
  });
}

} /* extern "C" */
