#pragma once

#include "core/cholesky.hpp"
#include "core/defaults.hpp"
#include "core/tensor.hpp"

namespace ridgelayer {

enum class RidgePath { kAuto, kPrimal, kDual };

struct RidgeConfig {
  double lambda = Defaults::kLambda;
  RidgePath path = RidgePath::kAuto;
};

// Result of a forward ridge solve. Keeps the inputs and the factorization so
// the backward pass costs four triangular substitutions instead of a fresh
// factorization.
class SolveRecord {
 public:
  const Vector& weights() const { return w_; }
  RidgePath path_taken() const { return path_; }
  const Matrix& x() const { return x_; }
  const Vector& y() const { return y_; }
  double lambda() const { return lambda_; }
  const CholeskyFactor& factorization() const { return factor_; }

  // Max-norm of (XT X + lambda I) w - XT y, evaluated without forming XT X.
  double normal_equation_residual() const;

 private:
  friend SolveRecord ridge_forward(const Matrix&, const Vector&, const RidgeConfig&);
  SolveRecord(Matrix x, Vector y, Vector w, double lambda, RidgePath path,
              CholeskyFactor factor)
      : x_(std::move(x)), y_(std::move(y)), w_(std::move(w)), lambda_(lambda),
        path_(path), factor_(std::move(factor)) {}

  Matrix x_;
  Vector y_;
  Vector w_;
  double lambda_;
  RidgePath path_;  // kPrimal or kDual
  CholeskyFactor factor_;
};

// Minimizer of |X w - y|^2 + lambda |w|^2.
//
// The primal path factors the cols x cols system (XT X + lambda I); the dual
// path factors the rows x rows system (X XT + lambda I) and maps back with
// w = XT alpha. Auto picks the dual exactly when cols > rows; both paths
// agree up to factorization accuracy.
SolveRecord ridge_forward(const Matrix& x, const Vector& y,
                          const RidgeConfig& cfg = {});

struct RidgeGradients {
  Matrix d_x;  // same shape as x
  Vector d_y;  // same length as y
};

// Gradients of any scalar loss with upstream grad_w = dL/dw, obtained by
// differentiating the normal equations at the solution:
//   v   = (XT X + lambda I)^-1 grad_w
//   d_y = X v
//   d_x = y vT - (X v) wT - (X w) vT
// On the dual path v is recovered from the cached rows x rows factorization
// as v = (grad_w - XT u) / lambda with u = (X XT + lambda I)^-1 (X grad_w).
RidgeGradients ridge_backward(const SolveRecord& rec, const Vector& grad_w);

// yhat = Z w.
Vector predict(const Matrix& z, const Vector& w);

// |X w - y|^2 + lambda |w|^2, handy for optimality checks.
double ridge_objective(const Matrix& x, const Vector& y, const Vector& w,
                       double lambda);

}  // namespace ridgelayer
