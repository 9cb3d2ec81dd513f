#include "core/ridge.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace ridgelayer {

double SolveRecord::normal_equation_residual() const {
  const Vector xw = matvec(x_, w_);
  const Vector lhs = tmatvec(x_, xw);   // XT X w
  const Vector rhs = tmatvec(x_, y_);   // XT y
  double m = 0.0;
  for (std::size_t j = 0; j < w_.size(); ++j)
    m = std::max(m, std::abs(lhs[j] + lambda_ * w_[j] - rhs[j]));
  return m;
}

SolveRecord ridge_forward(const Matrix& x, const Vector& y, const RidgeConfig& cfg) {
  const std::size_t n = x.rows(), d = x.cols();
  if (n == 0 || d == 0)
    throw EmptyProblem("ridge solve needs at least one sample and one feature, got " +
                       std::to_string(n) + "x" + std::to_string(d));
  if (y.size() != n)
    throw ContractViolation("ridge solve: label length " + std::to_string(y.size()) +
                            " does not match sample count " + std::to_string(n));
  if (!(cfg.lambda > 0.0) || !std::isfinite(cfg.lambda))
    throw InvalidConfig("ridge solve: lambda must be a positive real");

  RidgePath path = cfg.path;
  if (path == RidgePath::kAuto)
    path = d > n ? RidgePath::kDual : RidgePath::kPrimal;

  if (path == RidgePath::kPrimal) {
    Matrix gram = gram_xtx(x);
    add_to_diagonal(gram, cfg.lambda);
    CholeskyFactor factor(std::move(gram));
    Vector w = factor.solve(tmatvec(x, y));
    return SolveRecord(x, y, std::move(w), cfg.lambda, path, std::move(factor));
  }

  Matrix gram = gram_xxt(x);
  add_to_diagonal(gram, cfg.lambda);
  CholeskyFactor factor(std::move(gram));
  Vector alpha = factor.solve(y);
  Vector w = tmatvec(x, alpha);
  return SolveRecord(x, y, std::move(w), cfg.lambda, path, std::move(factor));
}

RidgeGradients ridge_backward(const SolveRecord& rec, const Vector& grad_w) {
  const Matrix& x = rec.x();
  const std::size_t n = x.rows(), d = x.cols();
  if (grad_w.size() != d)
    throw ContractViolation("ridge backward: upstream gradient length " +
                            std::to_string(grad_w.size()) + " does not match " +
                            std::to_string(d) + " weights");

  Vector v(d);
  if (rec.path_taken() == RidgePath::kPrimal) {
    v = rec.factorization().solve(grad_w);
  } else {
    // Woodbury: (XT X + lI)^-1 g = (g - XT (X XT + lI)^-1 X g) / l,
    // reusing the cached rows x rows factorization.
    const Vector u = rec.factorization().solve(matvec(x, grad_w));
    const Vector xtu = tmatvec(x, u);
    const double inv_lambda = 1.0 / rec.lambda();
    for (std::size_t j = 0; j < d; ++j) v[j] = (grad_w[j] - xtu[j]) * inv_lambda;
  }

  const Vector xv = matvec(x, v);
  const Vector xw = matvec(x, rec.weights());
  const Vector& y = rec.y();
  const Vector& w = rec.weights();

  RidgeGradients g{Matrix(n, d), Vector(n)};
  g.d_y = xv;
  for (std::size_t i = 0; i < n; ++i) {
    double* row = g.d_x.row(i);
    const double yi = y[i], xvi = xv[i], xwi = xw[i];
    for (std::size_t j = 0; j < d; ++j)
      row[j] = yi * v[j] - xvi * w[j] - xwi * v[j];
  }
  return g;
}

Vector predict(const Matrix& z, const Vector& w) {
  if (z.cols() != w.size())
    throw ContractViolation("predict: feature dimension " + std::to_string(z.cols()) +
                            " does not match weight length " + std::to_string(w.size()));
  return matvec(z, w);
}

double ridge_objective(const Matrix& x, const Vector& y, const Vector& w,
                       double lambda) {
  const Vector r = matvec(x, w);
  double obj = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double e = r[i] - y[i];
    obj += e * e;
  }
  for (std::size_t j = 0; j < w.size(); ++j) obj += lambda * w[j] * w[j];
  return obj;
}

}  // namespace ridgelayer
