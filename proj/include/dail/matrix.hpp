#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dail {

/// Dense row-major matrix of doubles. The universal value carrier for
/// batches, weights and gradients.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  static Matrix zeros(std::size_t r, std::size_t c) { return Matrix(r, c, 0.0); }

  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * cols, cols};
  }

  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
  std::size_t size() const { return data.size(); }
};

/// a * b
Matrix matmul(const Matrix& a, const Matrix& b);
/// a * b^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);
/// a^T * b
Matrix matmul_tn(const Matrix& a, const Matrix& b);

/// y += alpha * x; shapes must agree.
void axpy(double alpha, const Matrix& x, Matrix& y);

/// Column sums, length m.cols.
std::vector<double> col_sums(const Matrix& m);

/// Adds v to every row of m in place.
void add_row_vector(Matrix& m, std::span<const double> v);

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);

bool all_finite(std::span<const double> v);
bool all_finite(const Matrix& m);

}  // namespace dail
