#include "core/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>

#include "core/rng.hpp"
#include "core/tensor_io.hpp"

namespace ridgelayer {

void adam_update(Matrix& param, const Matrix& grad, AdamState& state, double lr,
                 const AdamConfig& cfg) {
  if (!grad.same_shape(param))
    throw ContractViolation("adam: gradient shape does not match parameter");
  if (state.m.size() == 0) {
    state.m = Matrix(param.rows(), param.cols());
    state.v = Matrix(param.rows(), param.cols());
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  double* p = param.data();
  double* m = state.m.data();
  double* v = state.v.data();
  const double* g = grad.data();
  for (std::size_t i = 0; i < param.size(); ++i) {
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
  }
}

LinearEmbedding::LinearEmbedding(std::size_t dim_in, std::size_t dim_out,
                                 std::uint64_t seed)
    : weight_(dim_in, dim_out) {
  if (dim_in == 0 || dim_out == 0)
    throw InvalidConfig("embedding dimensions must be positive");
  // Zero-mean Gaussian init, scaled by fan-in.
  Rng rng(Rng::derive(seed, 0x77696e69ULL));
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim_in));
  for (std::size_t i = 0; i < weight_.size(); ++i)
    weight_.data()[i] = scale * rng.normal();
}

TrainTask make_synthetic_task(const TrainConfig& cfg) {
  if (cfg.num_pairs == 0) throw InvalidConfig("task needs at least one pair");
  const double region_size =
      cfg.region_scale * std::sqrt(cfg.target_w * cfg.target_h);
  const Point origin{0.0, 0.0};
  const SampleGrid grid(origin, region_size, cfg.target_w, cfg.target_h,
                        cfg.grid_side);
  const SyntheticWorld world(cfg.dim_in, cfg.seed);
  Rng offsets(Rng::derive(cfg.seed, 0x6f666673ULL));

  auto make_pair = [&](std::uint64_t stream) {
    TrainPair pair;
    // Training image: target dead center, labels peaked at the middle.
    pair.x_raw = world.features(grid, origin, cfg.noise, Rng::derive(cfg.seed, stream));
    pair.y_train = gaussian_labels(grid, origin, {cfg.sigma_factor});
    // Test image: same appearance, target displaced inside the region.
    const double bound = cfg.max_offset_cells * grid.spacing();
    const Point shifted{(2.0 * offsets.uniform() - 1.0) * bound,
                        (2.0 * offsets.uniform() - 1.0) * bound};
    pair.z_raw =
        world.features(grid, shifted, cfg.noise, Rng::derive(cfg.seed, stream + 1));
    pair.y_test = gaussian_labels(grid, shifted, {cfg.sigma_factor});
    return pair;
  };

  TrainTask task;
  task.pairs.reserve(cfg.num_pairs);
  for (std::size_t p = 0; p < cfg.num_pairs; ++p)
    task.pairs.push_back(make_pair(0x2000 + 2 * p));
  task.validation = make_pair(0x2000 + 2 * cfg.num_pairs);
  return task;
}

Matrix train_gradient(const LinearEmbedding& emb, const TrainPair& pair,
                      const TrainConfig& cfg, double* loss_out) {
  if (pair.x_raw.cols() != emb.dim_in() || pair.z_raw.cols() != emb.dim_in())
    throw ContractViolation("train: raw feature dimension does not match embedding");

  // Forward.
  const Matrix x = matmul(pair.x_raw, emb.weight());
  const Matrix z = matmul(pair.z_raw, emb.weight());
  const SolveRecord rec = ridge_forward(x, pair.y_train, {cfg.lambda});
  const Vector pred = predict(z, rec.weights());
  ShrinkageParams shrink = cfg.shrink;
  const LossResult loss = evaluate_loss(cfg.loss, pred, pair.y_test, shrink);
  if (loss_out != nullptr) *loss_out = loss.loss;

  // Backward: through predict into the solver, then into both embeddings.
  const Vector d_w = tmatvec(z, loss.d_pred);
  Matrix d_z(z.rows(), z.cols());
  for (std::size_t i = 0; i < z.rows(); ++i) {
    const double gi = loss.d_pred[i];
    double* row = d_z.row(i);
    const double* w = rec.weights().data();
    for (std::size_t j = 0; j < z.cols(); ++j) row[j] = gi * w[j];
  }
  const RidgeGradients rg = ridge_backward(rec, d_w);  // d_y_train unused: labels fixed

  Matrix d_weight = matmul(transpose(pair.x_raw), rg.d_x);
  const Matrix d_weight_z = matmul(transpose(pair.z_raw), d_z);
  for (std::size_t i = 0; i < d_weight.size(); ++i)
    d_weight.data()[i] += d_weight_z.data()[i];
  return d_weight;
}

StepResult train_step(LinearEmbedding& emb, const TrainTask& task,
                      std::size_t step_index, const TrainConfig& cfg) {
  const std::size_t batch = std::max<std::size_t>(1, cfg.batch_pairs);
  Matrix grad(emb.dim_in(), emb.dim_out());
  double loss_total = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t idx = (step_index * batch + b) % task.pairs.size();
    double pair_loss = 0.0;
    const Matrix g = train_gradient(emb, task.pairs[idx], cfg, &pair_loss);
    for (std::size_t i = 0; i < grad.size(); ++i) grad.data()[i] += g.data()[i];
    loss_total += pair_loss;
  }
  const double inv = 1.0 / static_cast<double>(batch);
  for (std::size_t i = 0; i < grad.size(); ++i) grad.data()[i] *= inv;

  double lr = cfg.lr;
  if (cfg.lr_decay_every > 0 && cfg.lr_decay_factor != 1.0)
    lr *= std::pow(cfg.lr_decay_factor,
                   static_cast<double>(step_index / cfg.lr_decay_every));
  adam_update(emb.weight(), grad, emb.adam(), lr, cfg.adam);
  return {loss_total * inv, max_abs(grad.span())};
}

double validation_error(const LinearEmbedding& emb, const TrainPair& validation,
                        const TrainConfig& cfg, double fg_threshold) {
  const Matrix x = matmul(validation.x_raw, emb.weight());
  const Matrix z = matmul(validation.z_raw, emb.weight());
  const SolveRecord rec = ridge_forward(x, validation.y_train, {cfg.lambda});
  const Vector pred = predict(z, rec.weights());
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (validation.y_test[i] < fg_threshold) continue;
    const double e = pred[i] - validation.y_test[i];
    sum += e * e;
    ++count;
  }
  return count > 0 ? std::sqrt(sum / static_cast<double>(count)) : 0.0;
}

namespace {

std::string format_row(std::size_t step, double loss, double grad_norm) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu\t%.17g\t%.17g\n", step, loss, grad_norm);
  return buf;
}

void write_checkpoint(const std::filesystem::path& dir, const std::string& name,
                      const Matrix& weight) {
  write_tensor(dir / name, weight);
}

}  // namespace

TrainSummary train_run(const TrainConfig& cfg, const std::filesystem::path& out_dir,
                       std::ostream* console) {
  std::filesystem::create_directories(out_dir);
  const TrainTask task = make_synthetic_task(cfg);
  LinearEmbedding emb(cfg.dim_in, cfg.dim_out, cfg.seed);

  std::ofstream metrics(out_dir / "metrics.tsv", std::ios::trunc);
  if (!metrics) throw IoError("cannot open metrics file in " + out_dir.string());
  metrics << "step\tloss\tgrad_norm\n";

  TrainSummary summary;
  summary.steps = cfg.steps;
  auto clock_start = std::chrono::steady_clock::now();
  std::size_t wall_window = 0;
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    const StepResult res = train_step(emb, task, step, cfg);
    if (step == 0) summary.initial_loss = res.loss;
    summary.final_loss = res.loss;
    metrics << format_row(step, res.loss, res.grad_norm);
    ++wall_window;

    const bool checkpoint_due =
        cfg.checkpoint_every > 0 && (step + 1) % cfg.checkpoint_every == 0;
    if (checkpoint_due) {
      char name[64];
      std::snprintf(name, sizeof name, "ckpt_%06zu.rlt", step + 1);
      write_checkpoint(out_dir, name, emb.weight());
    }
    if (console != nullptr && (checkpoint_due || step + 1 == cfg.steps)) {
      const auto now = std::chrono::steady_clock::now();
      const double ms =
          std::chrono::duration<double, std::milli>(now - clock_start).count();
      char line[128];
      std::snprintf(line, sizeof line, "# wall step=%zu ms_per_step=%.3f\n", step + 1,
                    ms / static_cast<double>(wall_window));
      *console << line;
      clock_start = now;
      wall_window = 0;
    }
  }
  write_checkpoint(out_dir, "ckpt_final.rlt", emb.weight());
  if (!metrics) throw IoError("short write: metrics.tsv");
  return summary;
}

CompareSummary compare_losses_run(const TrainConfig& cfg, double val_threshold,
                                  const std::filesystem::path& out_dir,
                                  std::ostream* console) {
  std::filesystem::create_directories(out_dir);
  const TrainTask task = make_synthetic_task(cfg);

  CompareSummary summary;
  summary.threshold = val_threshold;
  const LossKind kinds[3] = {LossKind::kMse, LossKind::kShrinkageOrigin,
                             LossKind::kShrinkageModified};
  for (const LossKind kind : kinds) {
    TrainConfig run_cfg = cfg;
    run_cfg.loss = kind;
    LinearEmbedding emb(cfg.dim_in, cfg.dim_out, cfg.seed);
    LossCurve curve;
    curve.kind = kind;
    curve.steps_to_threshold = cfg.steps + 1;
    for (std::size_t step = 0; step < cfg.steps; ++step) {
      const StepResult res = train_step(emb, task, step, run_cfg);
      curve.train_loss.push_back(res.loss);
      const double err = validation_error(emb, task.validation, run_cfg);
      curve.val_error.push_back(err);
      if (curve.steps_to_threshold > cfg.steps && err <= val_threshold)
        curve.steps_to_threshold = step + 1;
    }
    summary.curves.push_back(std::move(curve));
  }

  const std::size_t mse_steps = summary.curves[0].steps_to_threshold;
  const std::size_t modified_steps = summary.curves[2].steps_to_threshold;
  summary.modified_not_slower_than_mse = modified_steps <= mse_steps;

  std::ofstream curves(out_dir / "curves.tsv", std::ios::trunc);
  if (!curves) throw IoError("cannot open curves file in " + out_dir.string());
  curves << "step\tloss_mse\tloss_origin\tloss_modified"
            "\tval_mse\tval_origin\tval_modified\n";
  char buf[256];
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    std::snprintf(buf, sizeof buf, "%zu\t%.17g\t%.17g\t%.17g\t%.17g\t%.17g\t%.17g\n",
                  step, summary.curves[0].train_loss[step],
                  summary.curves[1].train_loss[step],
                  summary.curves[2].train_loss[step],
                  summary.curves[0].val_error[step],
                  summary.curves[1].val_error[step],
                  summary.curves[2].val_error[step]);
    curves << buf;
  }

  std::ofstream report(out_dir / "report.txt", std::ios::trunc);
  report << "validation threshold: " << val_threshold << "\n";
  for (const auto& curve : summary.curves) {
    report << loss_kind_name(curve.kind) << ": steps_to_threshold=";
    if (curve.steps_to_threshold > cfg.steps)
      report << "not reached in " << cfg.steps << " steps";
    else
      report << curve.steps_to_threshold;
    report << " final_val_error=" << curve.val_error.back() << "\n";
  }
  report << "modified_not_slower_than_mse: "
         << (summary.modified_not_slower_than_mse ? "yes" : "no") << "\n";

  if (console != nullptr) {
    for (const auto& curve : summary.curves)
      *console << "# " << loss_kind_name(curve.kind) << " steps_to_threshold="
               << (curve.steps_to_threshold > cfg.steps
                       ? std::string("none")
                       : std::to_string(curve.steps_to_threshold))
               << "\n";
  }
  return summary;
}

}  // namespace ridgelayer
