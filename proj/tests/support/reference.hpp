#pragma once

// Test-side reference computations, written directly from the definitions
// and independent of the library's solvers.

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "gom/basis.hpp"
#include "gom/indexing.hpp"
#include "gom/oracle.hpp"

namespace gom::reference {

// Gaussian elimination with partial pivoting on a square system; exact for
// Rational. Throws on a singular matrix.
template <typename T>
std::vector<T> solve_square(std::vector<std::vector<T>> a, std::vector<T> b) {
  const std::size_t n = a.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (ScalarTraits<T>::abs(a[r][c]) > ScalarTraits<T>::abs(a[p][c])) p = r;
    if (ScalarTraits<T>::is_zero(a[p][c], 1e-300)) throw std::runtime_error("singular reference system");
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      T f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<T> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

// Coordinates g of beta in the basis from the normal equations.
template <typename T>
std::vector<T> coordinates(const Basis<T>& basis, const std::vector<T>& beta) {
  const std::size_t K = basis.K();
  const std::size_t n = basis.columns.rows();
  std::vector<std::vector<T>> gram(K, std::vector<T>(K, T(0)));
  std::vector<T> rhs(K, T(0));
  for (std::size_t a = 0; a < K; ++a) {
    for (std::size_t r = 0; r < n; ++r) rhs[a] += basis.columns(r, a) * beta[r];
    for (std::size_t b = 0; b < K; ++b)
      for (std::size_t r = 0; r < n; ++r) gram[a][b] += basis.columns(r, a) * basis.columns(r, b);
  }
  return solve_square(gram, rhs);
}

// P(X = cell | beta): product over observed coordinates.
template <typename T>
T likelihood(const Scheme& s, const std::vector<T>& beta, const CellIndex& cell) {
  T p(1);
  for (std::size_t j = 0; j < cell.size(); ++j)
    if (cell[j] != 0) p *= beta[s.row_index(j, cell[j])];
  return p;
}

// M_cell by summing the full-cell joint distribution over all completions of
// the cell's unobserved coordinates.
template <typename T>
T brute_force_moment(const DiscreteLatentModel<T>& model, const CellIndex& cell) {
  const Scheme& s = model.scheme();
  std::vector<int> x(cell.entries());
  std::vector<std::size_t> free;
  for (std::size_t j = 0; j < x.size(); ++j)
    if (x[j] == 0) {
      free.push_back(j);
      x[j] = 1;
    }
  T total(0);
  while (true) {
    CellIndex full(x);
    for (std::size_t i = 0; i < model.support_size(); ++i)
      total += model.weights()[i] * likelihood(s, model.points()[i], full);
    std::size_t f = 0;
    for (; f < free.size(); ++f) {
      if (x[free[f]] < s.outcomes(free[f])) {
        ++x[free[f]];
        break;
      }
      x[free[f]] = 1;
    }
    if (f == free.size()) break;
  }
  return total;
}

template <typename T>
struct ConditionalTruth {
  T mass{0};
  std::vector<T> expectation;
  // E(G_a G_b | cell).
  std::vector<std::vector<T>> second;
  std::vector<T> variance;
  // E(beta | cell).
  std::vector<T> beta;
};

template <typename T>
ConditionalTruth<T> conditional_truth(const DiscreteLatentModel<T>& model, const Basis<T>& basis,
                                      const CellIndex& cell) {
  const Scheme& s = model.scheme();
  const std::size_t K = basis.K();
  ConditionalTruth<T> t;
  t.expectation.assign(K, T(0));
  t.second.assign(K, std::vector<T>(K, T(0)));
  t.beta.assign(s.total_outcomes(), T(0));
  for (std::size_t i = 0; i < model.support_size(); ++i) {
    const auto& beta = model.points()[i];
    const std::vector<T> g = coordinates(basis, beta);
    const T w = model.weights()[i] * likelihood(s, beta, cell);
    t.mass += w;
    for (std::size_t a = 0; a < K; ++a) {
      t.expectation[a] += w * g[a];
      for (std::size_t b = 0; b < K; ++b) t.second[a][b] += w * g[a] * g[b];
    }
    for (std::size_t r = 0; r < beta.size(); ++r) t.beta[r] += w * beta[r];
  }
  for (auto& e : t.expectation) e /= t.mass;
  for (auto& row : t.second)
    for (auto& e : row) e /= t.mass;
  for (auto& e : t.beta) e /= t.mass;
  for (std::size_t a = 0; a < K; ++a) t.variance.push_back(t.second[a][a] - t.expectation[a] * t.expectation[a]);
  return t;
}

// Nonsingular K x K matrix with small integer entries and every column
// summing to 1, so lambda0 bases stay lambda0 after the transform.
template <typename T>
Matrix<T> random_affine_transform(std::size_t K, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(-3, 3);
  while (true) {
    std::vector<std::vector<T>> rows(K, std::vector<T>(K));
    Matrix<T> a(K, K);
    for (std::size_t c = 0; c < K; ++c) {
      T sum(0);
      for (std::size_t r = 0; r + 1 < K; ++r) {
        a(r, c) = T(pick(rng));
        sum += a(r, c);
      }
      a(K - 1, c) = T(1) - sum;
    }
    for (std::size_t r = 0; r < K; ++r)
      for (std::size_t c = 0; c < K; ++c) rows[r][c] = a(r, c);
    try {
      solve_square(rows, std::vector<T>(K, T(1)));
      return a;
    } catch (const std::runtime_error&) {
    }
  }
}

}  // namespace gom::reference
