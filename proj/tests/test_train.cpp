#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "core/train.hpp"
#include "test_support.hpp"

using namespace ridgelayer;
using namespace testsupport;

namespace {

// Independent end-to-end forward pass: naive matmuls, Gaussian elimination,
// scalar loss formulas. Shares nothing with the library's compute path.
double oracle_end2end_loss(const Matrix& weight, const TrainPair& pair,
                           LossKind kind, double lambda, double a, double c) {
  const Matrix x = naive_matmul(pair.x_raw, weight);
  const Matrix z = naive_matmul(pair.z_raw, weight);
  const Vector w = naive_ridge(x, pair.y_train, lambda);
  const Vector pred = naive_matvec(z, w);
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double r = pred[i] - pair.y_test[i];
    switch (kind) {
      case LossKind::kMse:
        total += r * r;
        break;
      case LossKind::kShrinkageModified:
        total += std::exp(pair.y_test[i]) * r * r /
                 (1.0 + std::exp(a * (c - std::abs(r))));
        break;
      case LossKind::kShrinkageOrigin:
        total += std::exp(pair.y_test[i]) * r * r / (1.0 + std::exp(a * (c - r)));
        break;
    }
  }
  return total / static_cast<double>(pred.size());
}

TrainPair random_pair(std::size_t n, std::size_t dim_in, Rng& rng) {
  TrainPair pair;
  pair.x_raw = random_matrix(n, dim_in, rng);
  pair.z_raw = random_matrix(n, dim_in, rng);
  pair.y_train = random_vector(n, rng);
  pair.y_test = random_vector(n, rng);
  for (std::size_t i = 0; i < n; ++i) {
    pair.y_train[i] = std::abs(pair.y_train[i]) * 0.4;
    pair.y_test[i] = std::abs(pair.y_test[i]) * 0.4;
  }
  return pair;
}

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.grid_side = 9;
  cfg.dim_in = 12;
  cfg.dim_out = 4;
  cfg.num_pairs = 4;
  cfg.steps = 50;
  cfg.checkpoint_every = 0;
  return cfg;
}

}  // namespace

TEST_CASE("adam leaves parameters alone under zero gradients") {
  Rng rng(90);
  Matrix param = random_matrix(3, 4, rng);
  const Matrix before = param;
  AdamState state;
  for (int step = 0; step < 5; ++step)
    adam_update(param, Matrix(3, 4), state, 0.1);
  CHECK(bitwise_equal(param.span(), before.span()));
}

TEST_CASE("first adam step moves by about lr in the gradient's direction") {
  Matrix param(1, 2);
  param(0, 0) = 1.0;
  param(0, 1) = -2.0;
  Matrix grad(1, 2);
  grad(0, 0) = 0.7;
  grad(0, 1) = -1.3;
  AdamState state;
  const double lr = 0.05;
  adam_update(param, grad, state, lr);
  CHECK(param(0, 0) == doctest::Approx(1.0 - lr).epsilon(1e-6));
  CHECK(param(0, 1) == doctest::Approx(-2.0 + lr).epsilon(1e-6));
}

TEST_CASE("adam minimizes x^2 from x=1") {
  Matrix x(1, 1);
  x(0, 0) = 1.0;
  AdamState state;
  for (int step = 0; step < 100; ++step) {
    Matrix grad(1, 1);
    grad(0, 0) = 2.0 * x(0, 0);
    adam_update(x, grad, state, 0.1);
  }
  CHECK(std::abs(x(0, 0)) < 0.05);
}

TEST_CASE("adam rejects mismatched gradients") {
  Matrix param(2, 2);
  AdamState state;
  CHECK_THROWS_AS(adam_update(param, Matrix(2, 3), state, 0.1), ContractViolation);
}

TEST_CASE("zero learning rate keeps the embedding bitwise intact") {
  TrainConfig cfg = small_config();
  cfg.lr = 0.0;
  const TrainTask task = make_synthetic_task(cfg);
  LinearEmbedding emb(cfg.dim_in, cfg.dim_out, cfg.seed);
  const Matrix before = emb.weight();
  const StepResult res = train_step(emb, task, 0, cfg);
  CHECK(res.loss > 0.0);
  CHECK(bitwise_equal(emb.weight().span(), before.span()));
}

TEST_CASE("embedding gradient matches finite differences of the oracle") {
  Rng rng(91);
  const std::size_t n = 10;
  TrainConfig cfg;
  cfg.dim_in = 6;
  cfg.lambda = 0.1;

  // dim_out < n forces the primal path; dim_out > n the dual path
  for (const std::size_t dim_out : {4u, 12u}) {
    cfg.dim_out = dim_out;
    const TrainPair pair = random_pair(n, cfg.dim_in, rng);
    for (const LossKind kind :
         {LossKind::kShrinkageModified, LossKind::kShrinkageOrigin, LossKind::kMse}) {
      cfg.loss = kind;
      LinearEmbedding emb(cfg.dim_in, cfg.dim_out, 7);
      double loss_out = 0.0;
      const Matrix grad = train_gradient(emb, pair, cfg, &loss_out);
      const double scale = max_abs(grad.span());

      const double h = 1e-6;
      double worst = 0.0;
      for (std::size_t i = 0; i < emb.dim_in(); ++i)
        for (std::size_t j = 0; j < emb.dim_out(); ++j) {
          Matrix wp = emb.weight(), wm = emb.weight();
          wp(i, j) += h;
          wm(i, j) -= h;
          const double fd =
              (oracle_end2end_loss(wp, pair, kind, cfg.lambda, cfg.shrink.a,
                                   cfg.shrink.c) -
               oracle_end2end_loss(wm, pair, kind, cfg.lambda, cfg.shrink.a,
                                   cfg.shrink.c)) /
              (2.0 * h);
          worst = std::max(worst, rel_err(fd, grad(i, j), scale));
        }
      CAPTURE(dim_out);
      CAPTURE(loss_kind_name(kind));
      CHECK(worst <= 1e-4);
    }
  }
}

TEST_CASE("a small step with heavy regularization decreases the loss") {
  TrainConfig cfg = small_config();
  cfg.lambda = 10.0;
  cfg.lr = 1e-4;
  const TrainTask task = make_synthetic_task(cfg);
  LinearEmbedding emb(cfg.dim_in, cfg.dim_out, cfg.seed);
  double before = 0.0;
  train_gradient(emb, task.pairs[0], cfg, &before);
  TrainConfig one_pair = cfg;
  one_pair.batch_pairs = 1;
  train_step(emb, task, 0, one_pair);  // consumes pair 0
  double after = 0.0;
  train_gradient(emb, task.pairs[0], cfg, &after);
  CHECK(after < before);
}

TEST_CASE("200 steps halve the training loss on the default toy task") {
  TrainConfig cfg = small_config();
  cfg.steps = 200;
  cfg.seed = 7;
  const TrainTask task = make_synthetic_task(cfg);
  LinearEmbedding emb(cfg.dim_in, cfg.dim_out, cfg.seed);
  double initial = 0.0, final_loss = 0.0;
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    const StepResult res = train_step(emb, task, step, cfg);
    if (step == 0) initial = res.loss;
    final_loss = res.loss;
  }
  CHECK(final_loss < 0.5 * initial);
}

TEST_CASE("train_run is deterministic per seed, metrics and checkpoints") {
  TrainConfig cfg = small_config();
  cfg.steps = 30;
  cfg.checkpoint_every = 10;
  const auto dir_a = temp_dir("train_a");
  const auto dir_b = temp_dir("train_b");
  const TrainSummary sa = train_run(cfg, dir_a, nullptr);
  const TrainSummary sb = train_run(cfg, dir_b, nullptr);
  CHECK(sa.initial_loss == sb.initial_loss);
  CHECK(sa.final_loss == sb.final_loss);

  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  CHECK(slurp(dir_a / "metrics.tsv") == slurp(dir_b / "metrics.tsv"));
  CHECK(slurp(dir_a / "ckpt_final.rlt") == slurp(dir_b / "ckpt_final.rlt"));
  CHECK(std::filesystem::exists(dir_a / "ckpt_000010.rlt"));

  // metrics has a header plus one row per step
  std::ifstream metrics(dir_a / "metrics.tsv");
  std::string line;
  std::size_t rows = 0;
  while (std::getline(metrics, line)) ++rows;
  CHECK(rows == cfg.steps + 1);
}

TEST_CASE("compare_losses runs aligned deterministic curves") {
  TrainConfig cfg = small_config();
  cfg.steps = 40;
  const auto dir_a = temp_dir("cmp_a");
  const auto dir_b = temp_dir("cmp_b");
  const CompareSummary a = compare_losses_run(cfg, 0.12, dir_a, nullptr);
  const CompareSummary b = compare_losses_run(cfg, 0.12, dir_b, nullptr);
  REQUIRE(a.curves.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    REQUIRE(a.curves[k].train_loss.size() == cfg.steps);
    REQUIRE(a.curves[k].val_error.size() == cfg.steps);
    CHECK(a.curves[k].steps_to_threshold == b.curves[k].steps_to_threshold);
    for (std::size_t s = 0; s < cfg.steps; ++s)
      CHECK(a.curves[k].train_loss[s] == b.curves[k].train_loss[s]);
  }
  std::ifstream curves(dir_a / "curves.tsv");
  std::string header;
  std::getline(curves, header);
  CHECK(header ==
        "step\tloss_mse\tloss_origin\tloss_modified\tval_mse\tval_origin\tval_modified");
  CHECK(std::filesystem::exists(dir_a / "report.txt"));
}

TEST_CASE("imbalanced task has mostly easy negatives") {
  TrainConfig cfg;  // default grid_side 31
  const TrainTask task = make_synthetic_task(cfg);
  std::size_t easy = 0;
  for (std::size_t i = 0; i < task.pairs[0].y_test.size(); ++i)
    if (task.pairs[0].y_test[i] < 0.1) ++easy;
  CHECK(static_cast<double>(easy) >=
        0.9 * static_cast<double>(task.pairs[0].y_test.size()));
}
