#include "gom/dense.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cassert>
#include <cmath>

namespace gom {

template <typename T>
Matrix<T> Matrix<T>::from_columns(const std::vector<std::vector<T>>& columns) {
  if (columns.empty()) return Matrix();
  Matrix m(columns.front().size(), columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    assert(columns[c].size() == m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) m(r, c) = columns[c][r];
  }
  return m;
}

template <typename T>
std::vector<T> Matrix<T>::column(std::size_t c) const {
  std::vector<T> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

template <typename T>
std::vector<T> Matrix<T>::row(std::size_t r) const {
  return std::vector<T>(data_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
                        data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_));
}

template <typename T>
void Matrix<T>::set_column(std::size_t c, std::span<const T> values) {
  assert(values.size() == rows_);
  for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = values[r];
}

template <typename T>
Matrix<T> Matrix<T>::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

template <typename T>
Matrix<T> Matrix<T>::operator*(const Matrix& rhs) const {
  assert(cols_ == rhs.rows_);
  Matrix out(rows_, rhs.cols_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t k = 0; k < cols_; ++k) {
      const T& a = (*this)(r, k);
      if (a == 0) continue;
      for (std::size_t c = 0; c < rhs.cols_; ++c) out(r, c) += a * rhs(k, c);
    }
  return out;
}

template <typename T>
std::vector<T> Matrix<T>::operator*(std::span<const T> v) const {
  assert(v.size() == cols_);
  std::vector<T> out(rows_, T(0));
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out[r] += (*this)(r, c) * v[c];
  return out;
}

template <typename T>
Matrix<T> Matrix<T>::select(std::span<const std::size_t> rows, std::span<const std::size_t> cols) const {
  Matrix out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = (*this)(rows[i], cols[j]);
  return out;
}

template <typename T>
T dot(std::span<const T> a, std::span<const T> b) {
  assert(a.size() == b.size());
  T s(0);
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

namespace {

Eigen::MatrixXd to_eigen(const Matrix<double>& a) {
  Eigen::MatrixXd m(a.rows(), a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = a(r, c);
  return m;
}

// Row echelon form in place; returns the rank. Exact for Rational.
std::size_t rational_echelon_rank(Matrix<Rational> m) {
  std::size_t rank = 0;
  for (std::size_t c = 0; c < m.cols() && rank < m.rows(); ++c) {
    std::size_t pivot = rank;
    while (pivot < m.rows() && sgn(m(pivot, c)) == 0) ++pivot;
    if (pivot == m.rows()) continue;
    if (pivot != rank)
      for (std::size_t k = 0; k < m.cols(); ++k) std::swap(m(pivot, k), m(rank, k));
    for (std::size_t r = rank + 1; r < m.rows(); ++r) {
      if (sgn(m(r, c)) == 0) continue;
      Rational f = m(r, c) / m(rank, c);
      for (std::size_t k = c; k < m.cols(); ++k) m(r, k) -= f * m(rank, k);
    }
    ++rank;
  }
  return rank;
}

}  // namespace

template <typename T>
std::size_t matrix_rank(const Matrix<T>& a, double rel_tol) {
  if (a.rows() == 0 || a.cols() == 0) return 0;
  if constexpr (ScalarTraits<T>::exact) {
    return rational_echelon_rank(a);
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(a));
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    std::size_t r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s(i) > rel_tol * s(0)) ++r;
    return r;
  }
}

template <typename T>
double conditioning(const Matrix<T>& a) {
  assert(a.rows() == a.cols());
  if (a.rows() == 0) return 0.0;
  if constexpr (ScalarTraits<T>::exact) {
    return rational_echelon_rank(a) == a.rows() ? 1.0 : 0.0;
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(a));
    const auto& s = svd.singularValues();
    if (s(0) == 0.0) return 0.0;
    return s(s.size() - 1) / s(0);
  }
}

template <typename T>
T determinant(const Matrix<T>& a) {
  assert(a.rows() == a.cols());
  Matrix<T> m = a;
  const std::size_t n = m.rows();
  T det(1);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (abs_value(m(r, c)) > abs_value(m(pivot, c))) pivot = r;
    if (m(pivot, c) == 0) return T(0);
    if (pivot != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(m(pivot, k), m(c, k));
      det = -det;
    }
    det *= m(c, c);
    for (std::size_t r = c + 1; r < n; ++r) {
      if (m(r, c) == 0) continue;
      T f = m(r, c) / m(c, c);
      for (std::size_t k = c; k < n; ++k) m(r, k) -= f * m(c, k);
    }
  }
  return det;
}

template <typename T>
std::optional<Matrix<T>> solve(const Matrix<T>& a, const Matrix<T>& b, double tol) {
  assert(a.rows() == a.cols() && a.rows() == b.rows());
  const std::size_t n = a.rows();
  Matrix<T> m = a;
  Matrix<T> x = b;
  double scale = 0.0;
  if constexpr (!ScalarTraits<T>::exact) {
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) scale = std::max(scale, std::fabs(to_double(m(r, c))));
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (abs_value(m(r, c)) > abs_value(m(pivot, c))) pivot = r;
    if (is_zero(m(pivot, c), tol * scale) || m(pivot, c) == 0) return std::nullopt;
    if (pivot != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(m(pivot, k), m(c, k));
      for (std::size_t k = 0; k < x.cols(); ++k) std::swap(x(pivot, k), x(c, k));
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || m(r, c) == 0) continue;
      T f = m(r, c) / m(c, c);
      for (std::size_t k = c; k < n; ++k) m(r, k) -= f * m(c, k);
      for (std::size_t k = 0; k < x.cols(); ++k) x(r, k) -= f * x(c, k);
    }
  }
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = 0; k < x.cols(); ++k) x(r, k) /= m(r, r);
  return x;
}

template <typename T>
std::optional<std::vector<T>> solve(const Matrix<T>& a, std::span<const T> b, double tol) {
  Matrix<T> rhs(b.size(), 1);
  rhs.set_column(0, b);
  auto x = solve(a, rhs, tol);
  if (!x) return std::nullopt;
  return x->column(0);
}

template <typename T>
std::optional<Matrix<T>> inverse(const Matrix<T>& a, double tol) {
  return solve(a, Matrix<T>::identity(a.rows()), tol);
}

template <typename T>
std::optional<LeastSquaresResult<T>> least_squares(const Matrix<T>& a, std::span<const T> b, double rel_tol) {
  assert(a.rows() == b.size());
  LeastSquaresResult<T> out;
  if constexpr (ScalarTraits<T>::exact) {
    Matrix<T> at = a.transpose();
    Matrix<T> normal = at * a;
    std::vector<T> rhs = at * b;
    auto x = solve(normal, std::span<const T>(rhs));
    if (!x) return std::nullopt;
    out.x = std::move(*x);
  } else {
    Eigen::MatrixXd m = to_eigen(a);
    Eigen::VectorXd v(static_cast<Eigen::Index>(b.size()));
    for (std::size_t i = 0; i < b.size(); ++i) v(static_cast<Eigen::Index>(i)) = b[i];
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
    qr.setThreshold(rel_tol);
    if (static_cast<std::size_t>(qr.rank()) < a.cols()) return std::nullopt;
    Eigen::VectorXd x = qr.solve(v);
    out.x.assign(x.data(), x.data() + x.size());
  }
  std::vector<T> fitted = a * std::span<const T>(out.x);
  out.residual_sq = T(0);
  for (std::size_t i = 0; i < b.size(); ++i) {
    T d = fitted[i] - b[i];
    out.residual_sq += d * d;
  }
  return out;
}

#define GOM_INSTANTIATE_DENSE(T)                                                                       \
  template class Matrix<T>;                                                                            \
  template std::size_t matrix_rank<T>(const Matrix<T>&, double);                                       \
  template double conditioning<T>(const Matrix<T>&);                                                   \
  template T determinant<T>(const Matrix<T>&);                                                         \
  template std::optional<Matrix<T>> solve<T>(const Matrix<T>&, const Matrix<T>&, double);              \
  template std::optional<std::vector<T>> solve<T>(const Matrix<T>&, std::span<const T>, double);       \
  template std::optional<Matrix<T>> inverse<T>(const Matrix<T>&, double);                              \
  template std::optional<LeastSquaresResult<T>> least_squares<T>(const Matrix<T>&, std::span<const T>, \
                                                                 double);                              \
  template T dot<T>(std::span<const T>, std::span<const T>);

GOM_INSTANTIATE_DENSE(double)
GOM_INSTANTIATE_DENSE(Rational)

#undef GOM_INSTANTIATE_DENSE

}  // namespace gom
