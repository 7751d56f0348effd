#pragma once

// Conditional moments of the latent vector from small square subsystems of
// the main system: h^v_cell = M_cell * E(G^v | X = cell). First moments come
// from K anchor rows whose measurements the cell leaves unobserved; second
// moments solve a second anchor layer against first moments at the shifted
// cells cell + (j, l).

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gom/basis.hpp"
#include "gom/dense.hpp"
#include "gom/indexing.hpp"
#include "gom/tables.hpp"

namespace gom {

struct AnchorPair {
  std::size_t j = 0;
  int l = 1;

  friend auto operator<=>(const AnchorPair&, const AnchorPair&) = default;
};

std::string to_string(const AnchorPair& p);

template <typename T>
struct AnchorSet {
  std::vector<AnchorPair> pairs;
  std::optional<AnchorPair> extra;
  // anchor_matrix(k, k') = lambda^{k'}_{j_k l_k}.
  Matrix<T> anchor_matrix;

  // Distinct anchor measurements, ascending.
  MeasurementSet measurements() const;
  bool admissible_for(const CellIndex& cell) const;
};

// Greedy full pivoting on the rows of the basis: each step takes the row and
// column of largest remaining magnitude (first in row order on ties). The
// extra pair is the first row outside the anchor measurements for which
// every K x K submatrix of the extended matrix is nonsingular. Throws
// IdentificationError when the basis has rank < K.
template <typename T>
AnchorSet<T> select_anchors(const Basis<T>& b, double tol);

// As select_anchors, restricted to rows of the given measurements and without
// the extra search. nullopt when those rows have rank < K.
template <typename T>
std::optional<AnchorSet<T>> select_anchors_within(const Basis<T>& b, const MeasurementSet& allowed, double tol);

enum class AnchorPolicy { canonical, per_cell };

std::string to_string(AnchorPolicy p);
AnchorPolicy parse_anchor_policy(const std::string& s);

// Canonical anchors when admissible for the cell; under per_cell, otherwise
// anchors reselected within the cell's zero set.
template <typename T>
std::optional<AnchorSet<T>> anchors_for_cell(const Basis<T>& b, const AnchorSet<T>& canonical, const CellIndex& cell,
                                             AnchorPolicy policy, double tol);

template <typename T>
struct FirstMoments {
  // h^{1_k}_cell.
  std::vector<T> h;
  // E(G_k | X = cell).
  std::vector<T> expectation;
  T mass{0};
};

// Solves sum_{k'} lambda^{k'}_{j_k l_k} h^{1_{k'}} = M_{cell + l_k at j_k}.
// Throws PredictionError when an anchor measurement is observed in the cell,
// when M_cell is zero, or when the anchor matrix is singular.
template <typename T>
FirstMoments<T> conditional_expectation(const Basis<T>& b, const AnchorSet<T>& anchors, const MomentTable<T>& mt,
                                        const CellIndex& cell, double tol = 1e-12);

template <typename T>
struct SecondMoments {
  // h2(k0, k') = h^{1_{k0} + 1_{k'}}_cell, symmetrized in float mode.
  Matrix<T> h2;
  // h2 / M_cell.
  Matrix<T> second;
  T mass{0};
  // Largest |h2(a, b) - h2(b, a)| before symmetrization.
  double asymmetry = 0.0;
  // "disjoint": second-layer rows share no measurement with the first-layer
  // anchors, which are reused at every shifted cell. "per-row": the second
  // layer reuses the first-layer rows and each shifted cell gets its own
  // anchors.
  std::string route;
  AnchorSet<T> first_layer;
  AnchorSet<T> second_layer;
};

// Second moments at the cell. The first layer is anchors_for_cell; the
// disjoint route is tried before the per-row route. Throws PredictionError
// ("variance subsystem singular") when neither route has nonsingular
// systems inside the cell's zero set.
template <typename T>
SecondMoments<T> conditional_second_moments(const Basis<T>& b, const AnchorSet<T>& canonical, const MomentTable<T>& mt,
                                            const CellIndex& cell, AnchorPolicy policy, double tol = 1e-12);

template <typename T>
struct Variance {
  std::vector<T> values;
  // Float only: some value in (-clamp_tol, 0) was set to 0.
  bool clamped = false;
  // Some value below -clamp_tol (or below 0 in exact mode).
  bool inconsistent = false;
};

// D_k = E(G_k^2 | X) - E(G_k | X)^2.
template <typename T>
Variance<T> conditional_variance(const std::vector<T>& first, const Matrix<T>& second, double clamp_tol = 1e-9);

// Moments of order J' in a new basis Lambda' = Lambda A, so G' = A^{-1} G.
// `moments` must hold every v in V[J'] for a single J'. Throws InputError
// for singular A.
template <typename T>
std::map<PowerIndex, T> change_basis_moments(const std::map<PowerIndex, T>& moments, const Matrix<T>& a);

// E' = A^{-1} E.
template <typename T>
std::vector<T> change_basis_expectation(const std::vector<T>& expectation, const Matrix<T>& a);

// Lambda * eg.
template <typename T>
std::vector<T> reconstruct_beta(const Basis<T>& b, const std::vector<T>& eg);

// h^v_cell values keyed by (v, cell).
template <typename T>
class HTable {
 public:
  explicit HTable(std::string basis_id = {}) : basis_id_(std::move(basis_id)) {}

  const std::string& basis_id() const { return basis_id_; }
  void set(const PowerIndex& v, const CellIndex& cell, T value) { entries_[{v, cell}] = std::move(value); }
  bool contains(const PowerIndex& v, const CellIndex& cell) const { return entries_.count({v, cell}) != 0; }
  const T& at(const PowerIndex& v, const CellIndex& cell) const;
  const std::map<std::pair<PowerIndex, CellIndex>, T>& entries() const { return entries_; }

  // Stores h^0 = M, h^{1_k} and (when present) h^{1_a + 1_b}.
  void store(const CellIndex& cell, const FirstMoments<T>& first, const SecondMoments<T>* second);

 private:
  std::string basis_id_;
  std::map<std::pair<PowerIndex, CellIndex>, T> entries_;
};

}  // namespace gom
