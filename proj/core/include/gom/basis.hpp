#pragma once

#include <optional>
#include <vector>

#include "gom/dense.hpp"
#include "gom/indexing.hpp"

namespace gom {

// K vectors of length |L| spanning the latent support, stored as the columns
// of an |L| x K matrix. With lambda0 set, every measurement block of every
// column sums to 1.
template <typename T>
struct Basis {
  Scheme scheme;
  Matrix<T> columns;
  // Moment-matrix column each basis vector was taken from, when known.
  std::vector<CellIndex> source_columns;
  bool lambda0 = false;

  std::size_t K() const { return columns.cols(); }
  const T& at(std::size_t j, int l, std::size_t k) const { return columns(scheme.row_index(j, l), k); }
};

// Block sums sum_l column_k[(j, l)] for every measurement j.
template <typename T>
std::vector<T> block_sums(const Basis<T>& b, std::size_t k);

// Lambda' = Lambda A.
template <typename T>
Basis<T> transform_basis(const Basis<T>& b, const Matrix<T>& a);

template <typename T>
Basis<double> to_double_basis(const Basis<T>& b);

}  // namespace gom
