#pragma once

// Small dense matrices over ScalarTraits fields, with the handful of
// factorizations the identification pipeline needs. Rational instances use
// exact elimination; double instances delegate to Eigen (SVD / QR).

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gom/scalar.hpp"

namespace gom {

template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  // Builds a matrix whose columns are the given vectors (all of equal length).
  static Matrix from_columns(const std::vector<std::vector<T>>& columns);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::vector<T> column(std::size_t c) const;
  std::vector<T> row(std::size_t r) const;
  void set_column(std::size_t c, std::span<const T> values);

  Matrix transpose() const;
  Matrix operator*(const Matrix& rhs) const;
  std::vector<T> operator*(std::span<const T> v) const;

  // Submatrix on the given row and column index lists.
  Matrix select(std::span<const std::size_t> rows, std::span<const std::size_t> cols) const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

// Numerical rank. Exact for Rational; for double, the number of singular
// values strictly above rel_tol times the largest one (0 for a zero matrix).
template <typename T>
std::size_t matrix_rank(const Matrix<T>& a, double rel_tol);

// Ratio of smallest to largest singular value for double; for Rational,
// 1 when nonsingular and 0 otherwise. Square matrices only.
template <typename T>
double conditioning(const Matrix<T>& a);

template <typename T>
T determinant(const Matrix<T>& a);

// Solves A X = B for square A with partial (max-magnitude) pivoting.
// Returns nullopt when a pivot is zero (Rational) or below
// tol * max|A| (double).
template <typename T>
std::optional<Matrix<T>> solve(const Matrix<T>& a, const Matrix<T>& b, double tol = 1e-13);

template <typename T>
std::optional<std::vector<T>> solve(const Matrix<T>& a, std::span<const T> b, double tol = 1e-13);

template <typename T>
std::optional<Matrix<T>> inverse(const Matrix<T>& a, double tol = 1e-13);

template <typename T>
struct LeastSquaresResult {
  std::vector<T> x;
  T residual_sq{0};  // ||A x - b||^2
};

// Full-column-rank least squares. Rational instances solve the normal
// equations exactly; double instances use column-pivoted Householder QR.
// Returns nullopt on column-rank deficiency.
template <typename T>
std::optional<LeastSquaresResult<T>> least_squares(const Matrix<T>& a, std::span<const T> b, double rel_tol = 1e-12);

template <typename T>
T dot(std::span<const T> a, std::span<const T> b);

}  // namespace gom
