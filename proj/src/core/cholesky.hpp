#pragma once

#include <span>

#include "core/tensor.hpp"

namespace ridgelayer {

// Lower-triangular Cholesky factorization of a symmetric positive-definite
// matrix, kept around for repeated solves. Factoring costs one half of a
// general elimination; each solve is two triangular substitutions.
// Throws SingularSystem when a pivot is not strictly positive.
class CholeskyFactor {
 public:
  explicit CholeskyFactor(Matrix a);  // consumes a, factors in place

  std::size_t dim() const { return l_.rows(); }
  Vector solve(const Vector& b) const;
  void solve_inplace(std::span<double> b) const;

  // L in the lower triangle; the strictly upper triangle is untouched input.
  const Matrix& factor() const { return l_; }

 private:
  Matrix l_;
};

// One-shot solve a·x = b for SPD a.
Vector spd_solve(const Matrix& a, const Vector& b);

}  // namespace ridgelayer
