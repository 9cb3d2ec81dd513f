#include "core/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "core/parallel.hpp"

namespace ridgelayer {

namespace {

constexpr std::size_t kTile = 64;
// Below this many multiply-adds a parallel dispatch costs more than it saves.
constexpr std::size_t kParallelGrain = 1u << 21;

std::string shape_str(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  double s = (s0 + s1) + (s2 + s3);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw ContractViolation("matmul: inner dimensions differ (" +
                            shape_str(a.rows(), a.cols()) + " vs " +
                            shape_str(b.rows(), b.cols()) + ")");
  Matrix c(a.rows(), b.cols());
  const std::size_t inner = a.cols(), width = b.cols();
  auto rows = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const double* arow = a.row(i);
      double* crow = c.row(i);
      for (std::size_t k = 0; k < inner; ++k) {
        const double aik = arow[k];
        const double* brow = b.row(k);
        for (std::size_t j = 0; j < width; ++j) crow[j] += aik * brow[j];
      }
    }
  };
  if (a.rows() * inner * width >= kParallelGrain)
    parallel_blocks(a.rows(), rows);
  else
    rows(0, a.rows());
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i0 = 0; i0 < a.rows(); i0 += kTile)
    for (std::size_t j0 = 0; j0 < a.cols(); j0 += kTile) {
      const std::size_t imax = std::min(i0 + kTile, a.rows());
      const std::size_t jmax = std::min(j0 + kTile, a.cols());
      for (std::size_t i = i0; i < imax; ++i)
        for (std::size_t j = j0; j < jmax; ++j) t(j, i) = a(i, j);
    }
  return t;
}

Vector matvec(const Matrix& a, const Vector& x) {
  if (a.cols() != x.size())
    throw ContractViolation("matvec: matrix has " + std::to_string(a.cols()) +
                            " cols, vector has " + std::to_string(x.size()));
  Vector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x.data(), a.cols());
  return y;
}

Vector tmatvec(const Matrix& a, const Vector& u) {
  if (a.rows() != u.size())
    throw ContractViolation("tmatvec: matrix has " + std::to_string(a.rows()) +
                            " rows, vector has " + std::to_string(u.size()));
  Vector y(a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double ui = u[i];
    const double* arow = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += ui * arow[j];
  }
  return y;
}

namespace {

// Lower triangle of rows x rows with entry (i,j) = dot(rows i and j of m),
// tiled so the j-side rows stay cache resident; mirrored to the upper half.
Matrix row_gram(const Matrix& m) {
  const std::size_t n = m.rows(), len = m.cols();
  Matrix g(n, n);
  const std::size_t tiles = (n + kTile - 1) / kTile;
  auto tile_range = [&](std::size_t tbegin, std::size_t tend) {
    for (std::size_t ti = tbegin; ti < tend; ++ti) {
      const std::size_t i0 = ti * kTile;
      const std::size_t imax = std::min(i0 + kTile, n);
      for (std::size_t j0 = 0; j0 <= i0; j0 += kTile) {
        const std::size_t jcap = std::min(j0 + kTile, n);
        for (std::size_t i = i0; i < imax; ++i) {
          const double* ri = m.row(i);
          double* grow = g.row(i);
          const std::size_t jmax = std::min(jcap, i + 1);
          for (std::size_t j = j0; j < jmax; ++j)
            grow[j] = dot(ri, m.row(j), len);
        }
      }
    }
  };
  if (n * n * len >= kParallelGrain)
    parallel_blocks(tiles, tile_range);
  else
    tile_range(0, tiles);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) g(i, j) = g(j, i);
  return g;
}

}  // namespace

Matrix gram_xtx(const Matrix& x) { return row_gram(transpose(x)); }

Matrix gram_xxt(const Matrix& x) { return row_gram(x); }

void add_to_diagonal(Matrix& a, double value) {
  const std::size_t n = std::min(a.rows(), a.cols());
  for (std::size_t i = 0; i < n; ++i) a(i, i) += value;
}

double max_abs(std::span<const double> values) {
  double m = 0.0;
  for (const double v : values) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw ContractViolation("max_abs_diff: length mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

bool all_finite(std::span<const double> values) {
  for (const double v : values)
    if (!std::isfinite(v)) return false;
  return true;
}

std::size_t argmax_first(std::span<const double> values) {
  if (values.empty()) throw ContractViolation("argmax of empty range");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

}  // namespace ridgelayer
