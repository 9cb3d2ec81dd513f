#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "core/errors.hpp"

namespace ridgelayer {

// Dense row-major real64 matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  static Matrix from_data(std::size_t rows, std::size_t cols,
                          std::vector<double> data) {
    if (data.size() != rows * cols)
      throw ContractViolation("matrix data length must equal rows*cols");
    Matrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.data_ = std::move(data);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<const double> span() const { return {data_.data(), data_.size()}; }
  std::span<double> span() { return {data_.data(), data_.size()}; }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Dense real64 vector.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t len) : data_(len, 0.0) {}
  explicit Vector(std::vector<double> data) : data_(std::move(data)) {}

  std::size_t size() const { return data_.size(); }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<const double> span() const { return {data_.data(), data_.size()}; }
  std::span<double> span() { return {data_.data(), data_.size()}; }

 private:
  std::vector<double> data_;
};

// Dot product with a fixed four-way accumulation order: deterministic per
// build and wide enough for the vectorizer.
double dot(const double* a, const double* b, std::size_t n);

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

// a * x and aT * u.
Vector matvec(const Matrix& a, const Vector& x);
Vector tmatvec(const Matrix& a, const Vector& u);

// Gram products, exactly symmetric by construction (lower triangle computed,
// upper mirrored).
Matrix gram_xtx(const Matrix& x);  // xT x, cols x cols
Matrix gram_xxt(const Matrix& x);  // x xT, rows x rows

void add_to_diagonal(Matrix& a, double value);

double max_abs(std::span<const double> values);
double max_abs_diff(std::span<const double> a, std::span<const double> b);
bool all_finite(std::span<const double> values);

// First index of the maximum value; ties resolve to the lowest index.
std::size_t argmax_first(std::span<const double> values);

}  // namespace ridgelayer
