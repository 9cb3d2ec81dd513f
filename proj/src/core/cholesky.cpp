#include "core/cholesky.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "core/parallel.hpp"

namespace ridgelayer {

namespace {

constexpr std::size_t kBlock = 128;  // panel width
constexpr std::size_t kTile = 64;    // trailing-update tile

void check_symmetric(const Matrix& a) {
  const double tol = 1e-10 * (1.0 + max_abs(a.span()));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      if (std::abs(a(i, j) - a(j, i)) > tol)
        throw ContractViolation("spd factorization requires a symmetric matrix (entry " +
                                std::to_string(i) + "," + std::to_string(j) + ")");
}

// Blocked right-looking factorization over the lower triangle. Row-major
// storage makes every inner product a contiguous prefix dot.
void factor_in_place(Matrix& m) {
  const std::size_t n = m.rows();
  for (std::size_t k0 = 0; k0 < n; k0 += kBlock) {
    const std::size_t kb = std::min(kBlock, n - k0);

    // Diagonal block: trailing updates from earlier panels are already
    // applied, so only columns within the block participate.
    for (std::size_t j = k0; j < k0 + kb; ++j) {
      double* rj = m.row(j);
      const double pivot = rj[j] - dot(rj + k0, rj + k0, j - k0);
      if (!(pivot > 0.0))
        throw SingularSystem("non-positive pivot at index " + std::to_string(j));
      const double ljj = std::sqrt(pivot);
      rj[j] = ljj;
      const double inv = 1.0 / ljj;
      for (std::size_t i = j + 1; i < k0 + kb; ++i) {
        double* ri = m.row(i);
        ri[j] = (ri[j] - dot(ri + k0, rj + k0, j - k0)) * inv;
      }
    }
    const std::size_t t0 = k0 + kb;
    if (t0 >= n) break;

    // Panel: forward-substitute every row below the block against L11.
    for (std::size_t i = t0; i < n; ++i) {
      double* ri = m.row(i);
      for (std::size_t j = k0; j < k0 + kb; ++j) {
        const double* rj = m.row(j);
        ri[j] = (ri[j] - dot(ri + k0, rj + k0, j - k0)) / rj[j];
      }
    }

    // Trailing update A22 -= L21 L21T, tiled; each row is owned by exactly
    // one worker and reads only panel columns, so the result is identical
    // for any thread count.
    const std::size_t tiles = (n - t0 + kTile - 1) / kTile;
    parallel_blocks(tiles, [&](std::size_t tbegin, std::size_t tend) {
      for (std::size_t t = tbegin; t < tend; ++t) {
        const std::size_t i0 = t0 + t * kTile;
        const std::size_t imax = std::min(i0 + kTile, n);
        for (std::size_t j0 = t0; j0 <= i0; j0 += kTile) {
          const std::size_t jcap = std::min(j0 + kTile, n);
          for (std::size_t i = i0; i < imax; ++i) {
            double* ri = m.row(i);
            const std::size_t jmax = std::min(jcap, i + 1);
            for (std::size_t j = j0; j < jmax; ++j)
              ri[j] -= dot(ri + k0, m.row(j) + k0, kb);
          }
        }
      }
    });
  }
}

}  // namespace

CholeskyFactor::CholeskyFactor(Matrix a) : l_(std::move(a)) {
  if (l_.rows() != l_.cols())
    throw ContractViolation("spd factorization requires a square matrix, got " +
                            std::to_string(l_.rows()) + "x" + std::to_string(l_.cols()));
  check_symmetric(l_);
  factor_in_place(l_);
}

Vector CholeskyFactor::solve(const Vector& b) const {
  if (b.size() != dim())
    throw ContractViolation("spd solve: rhs length " + std::to_string(b.size()) +
                            " does not match system dimension " + std::to_string(dim()));
  Vector x = b;
  solve_inplace(x.span());
  return x;
}

void CholeskyFactor::solve_inplace(std::span<double> b) const {
  const std::size_t n = dim();
  // L y = b
  for (std::size_t i = 0; i < n; ++i) {
    const double* ri = l_.row(i);
    b[i] = (b[i] - dot(ri, b.data(), i)) / ri[i];
  }
  // LT x = y, column sweep keeps row accesses contiguous
  for (std::size_t j = n; j-- > 0;) {
    const double* rj = l_.row(j);
    b[j] /= rj[j];
    const double xj = b[j];
    for (std::size_t i = 0; i < j; ++i) b[i] -= rj[i] * xj;
  }
}

Vector spd_solve(const Matrix& a, const Vector& b) {
  return CholeskyFactor(a).solve(b);
}

}  // namespace ridgelayer
