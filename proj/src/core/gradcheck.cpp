#include "core/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "core/rng.hpp"
#include "core/train.hpp"

namespace ridgelayer {

double gradient_rel_error(double reference, double value, double scale) {
  const double denom =
      std::max(std::abs(reference) + std::abs(value), 1e-3 * (1.0 + scale));
  return std::abs(reference - value) / denom;
}

namespace {

constexpr double kFdStep = 1e-6;

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

Vector random_vector(std::size_t len, Rng& rng) {
  Vector v(len);
  for (std::size_t i = 0; i < len; ++i) v[i] = rng.normal();
  return v;
}

double linear_probe(const Matrix& x, const Vector& y, const Vector& g,
                    double lambda, RidgePath path) {
  const SolveRecord rec = ridge_forward(x, y, {lambda, path});
  double s = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) s += g[j] * rec.weights()[j];
  return s;
}

// Max relative error of ridge_backward against central differences of the
// probe <g, w(X, y)> on one forced path.
double check_ridge_path(std::size_t n, std::size_t d, double lambda, RidgePath path,
                        Rng& rng) {
  const Matrix x = random_matrix(n, d, rng);
  const Vector y = random_vector(n, rng);
  const Vector g = random_vector(d, rng);

  const SolveRecord rec = ridge_forward(x, y, {lambda, path});
  const RidgeGradients grads = ridge_backward(rec, g);

  double scale = max_abs(grads.d_x.span());
  scale = std::max(scale, max_abs(grads.d_y.span()));

  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      Matrix xp = x, xm = x;
      xp(i, j) += kFdStep;
      xm(i, j) -= kFdStep;
      const double fd = (linear_probe(xp, y, g, lambda, path) -
                         linear_probe(xm, y, g, lambda, path)) /
                        (2.0 * kFdStep);
      worst = std::max(worst, gradient_rel_error(fd, grads.d_x(i, j), scale));
    }
  for (std::size_t i = 0; i < n; ++i) {
    Vector yp = y, ym = y;
    yp[i] += kFdStep;
    ym[i] -= kFdStep;
    const double fd = (linear_probe(x, yp, g, lambda, path) -
                       linear_probe(x, ym, g, lambda, path)) /
                      (2.0 * kFdStep);
    worst = std::max(worst, gradient_rel_error(fd, grads.d_y[i], scale));
  }
  return worst;
}

double end2end_loss(const Matrix& weight, const TrainPair& pair,
                    const TrainConfig& cfg) {
  const Matrix x = matmul(pair.x_raw, weight);
  const Matrix z = matmul(pair.z_raw, weight);
  const SolveRecord rec = ridge_forward(x, pair.y_train, {cfg.lambda});
  const Vector pred = predict(z, rec.weights());
  return evaluate_loss(cfg.loss, pred, pair.y_test, cfg.shrink).loss;
}

double check_end2end(std::size_t n, std::size_t d, LossKind kind, double lambda,
                     Rng& rng, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.loss = kind;
  cfg.lambda = lambda;
  cfg.dim_in = d + 2;
  cfg.dim_out = d;
  cfg.seed = seed;

  TrainPair pair;
  pair.x_raw = random_matrix(n, cfg.dim_in, rng);
  pair.z_raw = random_matrix(n, cfg.dim_in, rng);
  pair.y_train = random_vector(n, rng);
  pair.y_test = random_vector(n, rng);
  // Labels in the usual (0, 1] band; keeps exp(y) weighting realistic.
  for (std::size_t i = 0; i < n; ++i) {
    pair.y_train[i] = std::abs(pair.y_train[i]) * 0.4;
    pair.y_test[i] = std::abs(pair.y_test[i]) * 0.4;
  }

  LinearEmbedding emb(cfg.dim_in, cfg.dim_out, seed);
  double loss0 = 0.0;
  const Matrix grad = train_gradient(emb, pair, cfg, &loss0);
  const double scale = max_abs(grad.span());

  double worst = 0.0;
  Matrix weight = emb.weight();
  for (std::size_t i = 0; i < weight.rows(); ++i)
    for (std::size_t j = 0; j < weight.cols(); ++j) {
      Matrix wp = weight, wm = weight;
      wp(i, j) += kFdStep;
      wm(i, j) -= kFdStep;
      const double fd =
          (end2end_loss(wp, pair, cfg) - end2end_loss(wm, pair, cfg)) /
          (2.0 * kFdStep);
      worst = std::max(worst, gradient_rel_error(fd, grad(i, j), scale));
    }
  return worst;
}

}  // namespace

GradCheckReport gradcheck_run(std::size_t n, std::size_t d, LossKind kind,
                              std::uint64_t seed, double lambda) {
  if (n == 0 || d == 0) throw InvalidConfig("gradcheck needs n >= 1 and d >= 1");
  Rng rng(Rng::derive(seed, 0x67636bULL));
  GradCheckReport report;
  report.max_rel_ridge =
      std::max(check_ridge_path(n, d, lambda, RidgePath::kPrimal, rng),
               check_ridge_path(n, d, lambda, RidgePath::kDual, rng));
  report.max_rel_end2end = check_end2end(n, d, kind, lambda, rng, seed);
  return report;
}

}  // namespace ridgelayer
