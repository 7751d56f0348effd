#include "gom/conditional.hpp"

#include <algorithm>
#include <cmath>

#include "gom/error.hpp"

namespace gom {

std::string to_string(const AnchorPair& p) {
  return "(" + std::to_string(p.j + 1) + "," + std::to_string(p.l) + ")";
}

std::string to_string(AnchorPolicy p) { return p == AnchorPolicy::canonical ? "canonical" : "per-cell"; }

AnchorPolicy parse_anchor_policy(const std::string& s) {
  if (s == "canonical") return AnchorPolicy::canonical;
  if (s == "per-cell") return AnchorPolicy::per_cell;
  throw InputError("unknown anchor policy '" + s + "' (expected canonical or per-cell)");
}

template <typename T>
MeasurementSet AnchorSet<T>::measurements() const {
  MeasurementSet out;
  for (const auto& p : pairs) out.push_back(p.j);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

template <typename T>
bool AnchorSet<T>::admissible_for(const CellIndex& cell) const {
  return std::all_of(pairs.begin(), pairs.end(), [&](const AnchorPair& p) { return cell.is_zero_at(p.j); });
}

namespace {

std::string measurement_list(const MeasurementSet& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i] + 1);
  return out + "}";
}

template <typename T>
bool below_pivot_tol(const T& value, double scale, double tol) {
  if constexpr (ScalarTraits<T>::exact) {
    return value == 0;
  } else {
    return std::fabs(value) <= tol * scale;
  }
}

// Greedy full pivoting over the candidate rows; returns the chosen rows
// ascending, or nullopt when they have rank < K.
template <typename T>
std::optional<std::vector<std::size_t>> pivot_rows(const Matrix<T>& cols, const std::vector<std::size_t>& candidates,
                                                   double tol) {
  const std::size_t K = cols.cols();
  if (candidates.size() < K) return std::nullopt;
  std::vector<std::size_t> all_cols(K);
  for (std::size_t k = 0; k < K; ++k) all_cols[k] = k;
  Matrix<T> work = cols.select(candidates, all_cols);

  double scale = 0.0;
  for (std::size_t r = 0; r < work.rows(); ++r)
    for (std::size_t c = 0; c < K; ++c) scale = std::max(scale, std::fabs(to_double(work(r, c))));

  std::vector<bool> row_used(work.rows(), false);
  std::vector<bool> col_used(K, false);
  std::vector<std::size_t> picked;
  for (std::size_t step = 0; step < K; ++step) {
    std::optional<std::pair<std::size_t, std::size_t>> best;
    T best_abs(0);
    for (std::size_t r = 0; r < work.rows(); ++r) {
      if (row_used[r]) continue;
      for (std::size_t c = 0; c < K; ++c) {
        if (col_used[c]) continue;
        T a = abs_value(work(r, c));
        if (!best || a > best_abs) {
          best = {r, c};
          best_abs = a;
        }
      }
    }
    if (!best || below_pivot_tol(best_abs, scale, tol)) return std::nullopt;
    const auto [pr, pc] = *best;
    row_used[pr] = true;
    col_used[pc] = true;
    picked.push_back(candidates[pr]);
    for (std::size_t r = 0; r < work.rows(); ++r) {
      if (row_used[r]) continue;
      T f = work(r, pc) / work(pr, pc);
      for (std::size_t c = 0; c < K; ++c) work(r, c) -= f * work(pr, c);
    }
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

template <typename T>
AnchorSet<T> make_anchor_set(const Basis<T>& b, const std::vector<std::size_t>& rows) {
  AnchorSet<T> a;
  a.anchor_matrix = Matrix<T>(rows.size(), b.K());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto [j, l] = b.scheme.row_pair(rows[i]);
    a.pairs.push_back({j, l});
    for (std::size_t k = 0; k < b.K(); ++k) a.anchor_matrix(i, k) = b.columns(rows[i], k);
  }
  return a;
}

template <typename T>
bool nonsingular(const Matrix<T>& m, double tol) {
  if constexpr (ScalarTraits<T>::exact) {
    return determinant(m) != 0;
  } else {
    return matrix_rank(m, tol) == m.rows();
  }
}

// h^{1_k}_cell from the anchor system, without the mass check.
template <typename T>
std::vector<T> solve_first_h(const AnchorSet<T>& anchors, const MomentTable<T>& mt, const CellIndex& cell, double tol) {
  std::vector<T> rhs;
  for (const auto& p : anchors.pairs) rhs.push_back(mt.at(cell.with(p.j, p.l)));
  auto h = solve(anchors.anchor_matrix, std::span<const T>(rhs), tol);
  if (!h) throw PredictionError("anchor system singular at cell " + cell.to_string());
  return std::move(*h);
}

template <typename T>
T checked_mass(const MomentTable<T>& mt, const CellIndex& cell) {
  const T& m = mt.at(cell);
  if (!(m > 0)) {
    throw PredictionError("conditioning event has zero estimated probability at cell " + cell.to_string());
  }
  return m;
}

template <typename T>
void require_admissible(const AnchorSet<T>& anchors, const CellIndex& cell) {
  if (!anchors.admissible_for(cell)) {
    throw PredictionError("cell " + cell.to_string() + " is not identifiable with current anchors J0 = " +
                          measurement_list(anchors.measurements()));
  }
}

}  // namespace

template <typename T>
AnchorSet<T> select_anchors(const Basis<T>& b, double tol) {
  std::vector<std::size_t> all(b.scheme.total_outcomes());
  for (std::size_t r = 0; r < all.size(); ++r) all[r] = r;
  auto rows = pivot_rows(b.columns, all, tol);
  if (!rows) throw IdentificationError("basis has rank below K; no anchor rows exist");
  AnchorSet<T> a = make_anchor_set(b, *rows);

  const MeasurementSet j0 = a.measurements();
  const std::size_t K = b.K();
  for (std::size_t r = 0; r < b.scheme.total_outcomes() && !a.extra; ++r) {
    auto [j, l] = b.scheme.row_pair(r);
    if (std::binary_search(j0.begin(), j0.end(), j)) continue;
    bool all_ok = true;
    for (std::size_t drop = 0; drop <= K && all_ok; ++drop) {
      Matrix<T> sub(K, K);
      std::size_t i = 0;
      for (std::size_t src = 0; src <= K; ++src) {
        if (src == drop) continue;
        for (std::size_t k = 0; k < K; ++k)
          sub(i, k) = src < K ? a.anchor_matrix(src, k) : b.columns(r, k);
        ++i;
      }
      all_ok = nonsingular(sub, tol);
    }
    if (all_ok) a.extra = AnchorPair{j, l};
  }
  return a;
}

template <typename T>
std::optional<AnchorSet<T>> select_anchors_within(const Basis<T>& b, const MeasurementSet& allowed, double tol) {
  std::vector<std::size_t> rows;
  for (std::size_t j : allowed)
    for (int l = 1; l <= b.scheme.outcomes(j); ++l) rows.push_back(b.scheme.row_index(j, l));
  std::sort(rows.begin(), rows.end());
  auto picked = pivot_rows(b.columns, rows, tol);
  if (!picked) return std::nullopt;
  return make_anchor_set(b, *picked);
}

template <typename T>
std::optional<AnchorSet<T>> anchors_for_cell(const Basis<T>& b, const AnchorSet<T>& canonical, const CellIndex& cell,
                                             AnchorPolicy policy, double tol) {
  if (canonical.admissible_for(cell)) return canonical;
  if (policy == AnchorPolicy::canonical) return std::nullopt;
  return select_anchors_within(b, cell.zero_set(), tol);
}

template <typename T>
FirstMoments<T> conditional_expectation(const Basis<T>& b, const AnchorSet<T>& anchors, const MomentTable<T>& mt,
                                        const CellIndex& cell, double tol) {
  validate_cell(b.scheme, cell);
  require_admissible(anchors, cell);
  FirstMoments<T> out;
  out.mass = checked_mass(mt, cell);
  out.h = solve_first_h(anchors, mt, cell, tol);
  for (const T& h : out.h) out.expectation.push_back(h / out.mass);
  return out;
}

template <typename T>
SecondMoments<T> conditional_second_moments(const Basis<T>& b, const AnchorSet<T>& canonical, const MomentTable<T>& mt,
                                            const CellIndex& cell, AnchorPolicy policy, double tol) {
  validate_cell(b.scheme, cell);
  auto first = anchors_for_cell(b, canonical, cell, policy, tol);
  if (!first) require_admissible(canonical, cell);
  if (!first) throw PredictionError("no nonsingular anchor rows inside the zero set of cell " + cell.to_string());

  const std::size_t K = b.K();
  SecondMoments<T> out;
  out.mass = checked_mass(mt, cell);
  out.first_layer = *first;

  const MeasurementSet zeros = cell.zero_set();
  const MeasurementSet first_meas = first->measurements();
  MeasurementSet rest;
  std::set_difference(zeros.begin(), zeros.end(), first_meas.begin(), first_meas.end(), std::back_inserter(rest));

  // rhs(k, k0) = h^{1_{k0}} at the cell shifted by second-layer row k.
  Matrix<T> rhs(K, K);
  if (auto second = select_anchors_within(b, rest, tol)) {
    out.route = "disjoint";
    out.second_layer = *second;
    for (std::size_t k = 0; k < K; ++k) {
      const auto& p = second->pairs[k];
      auto h = solve_first_h(*first, mt, cell.with(p.j, p.l), tol);
      for (std::size_t k0 = 0; k0 < K; ++k0) rhs(k, k0) = h[k0];
    }
  } else {
    out.route = "per-row";
    out.second_layer = *first;
    for (std::size_t k = 0; k < K; ++k) {
      const auto& p = first->pairs[k];
      MeasurementSet shifted_zeros;
      for (std::size_t j : zeros)
        if (j != p.j) shifted_zeros.push_back(j);
      auto inner = select_anchors_within(b, shifted_zeros, tol);
      if (!inner) throw PredictionError("variance subsystem singular at cell " + cell.to_string());
      auto h = solve_first_h(*inner, mt, cell.with(p.j, p.l), tol);
      for (std::size_t k0 = 0; k0 < K; ++k0) rhs(k, k0) = h[k0];
    }
  }

  auto x = solve(out.second_layer.anchor_matrix, rhs, tol);
  if (!x) throw PredictionError("variance subsystem singular at cell " + cell.to_string());

  out.h2 = Matrix<T>(K, K);
  for (std::size_t k0 = 0; k0 < K; ++k0)
    for (std::size_t k = 0; k < K; ++k) out.h2(k0, k) = (*x)(k, k0);
  for (std::size_t a = 0; a < K; ++a) {
    for (std::size_t c = a + 1; c < K; ++c) {
      T diff = out.h2(a, c) - out.h2(c, a);
      out.asymmetry = std::max(out.asymmetry, std::fabs(to_double(diff)));
      T mean = (out.h2(a, c) + out.h2(c, a)) / T(2);
      out.h2(a, c) = mean;
      out.h2(c, a) = mean;
    }
  }
  out.second = Matrix<T>(K, K);
  for (std::size_t a = 0; a < K; ++a)
    for (std::size_t c = 0; c < K; ++c) out.second(a, c) = out.h2(a, c) / out.mass;
  return out;
}

template <typename T>
Variance<T> conditional_variance(const std::vector<T>& first, const Matrix<T>& second, double clamp_tol) {
  if (second.rows() != first.size() || second.cols() != first.size())
    throw InputError("variance: first and second moments have inconsistent shapes");
  Variance<T> out;
  for (std::size_t k = 0; k < first.size(); ++k) {
    T d = second(k, k) - first[k] * first[k];
    if (d < 0) {
      if constexpr (ScalarTraits<T>::exact) {
        out.inconsistent = true;
      } else if (d > -clamp_tol) {
        d = 0.0;
        out.clamped = true;
      } else {
        out.inconsistent = true;
      }
    }
    out.values.push_back(d);
  }
  return out;
}

template <typename T>
std::map<PowerIndex, T> change_basis_moments(const std::map<PowerIndex, T>& moments, const Matrix<T>& a) {
  if (moments.empty()) return {};
  const std::size_t K = a.rows();
  auto a_bar = inverse(a);
  if (!a_bar) throw InputError("change of basis: transform matrix is singular");
  const int order = moments.begin()->first.order();
  for (const auto& [v, value] : moments) {
    if (v.dims() != K) throw InputError("change of basis: power index dimension differs from K");
    if (v.order() != order) throw InputError("change of basis: moments of mixed orders");
  }

  std::map<PowerIndex, T> out;
  for (const auto& v : v_indices(order, K)) {
    // One representative w in W[J'] with counts v; the sum is the same for all.
    std::vector<std::size_t> w0;
    for (std::size_t k = 0; k < K; ++k)
      for (int e = 0; e < v[k]; ++e) w0.push_back(k);

    T total(0);
    std::vector<std::size_t> w(static_cast<std::size_t>(order), 0);
    while (true) {
      T coeff(1);
      std::vector<int> counts(K, 0);
      for (std::size_t i = 0; i < w.size(); ++i) {
        coeff *= (*a_bar)(w0[i], w[i]);
        ++counts[w[i]];
      }
      auto it = moments.find(PowerIndex(counts));
      if (it == moments.end()) throw InputError("change of basis: missing moment " + PowerIndex(counts).to_string());
      total += coeff * it->second;

      std::size_t pos = w.size();
      while (pos > 0 && ++w[pos - 1] == K) w[--pos] = 0;
      if (pos == 0) break;
    }
    out[v] = total;
  }
  return out;
}

template <typename T>
std::vector<T> change_basis_expectation(const std::vector<T>& expectation, const Matrix<T>& a) {
  auto a_bar = inverse(a);
  if (!a_bar) throw InputError("change of basis: transform matrix is singular");
  return *a_bar * std::span<const T>(expectation);
}

template <typename T>
std::vector<T> reconstruct_beta(const Basis<T>& b, const std::vector<T>& eg) {
  if (eg.size() != b.K()) throw InputError("expectation vector has wrong length");
  return b.columns * std::span<const T>(eg);
}

template <typename T>
const T& HTable<T>::at(const PowerIndex& v, const CellIndex& cell) const {
  auto it = entries_.find({v, cell});
  if (it == entries_.end()) throw Error("h" + v.to_string() + " at cell " + cell.to_string() + " not stored");
  return it->second;
}

template <typename T>
void HTable<T>::store(const CellIndex& cell, const FirstMoments<T>& first, const SecondMoments<T>* second) {
  const std::size_t K = first.h.size();
  set(PowerIndex(std::vector<int>(K, 0)), cell, first.mass);
  for (std::size_t k = 0; k < K; ++k) set(PowerIndex::unit(K, k), cell, first.h[k]);
  if (second == nullptr) return;
  for (std::size_t a = 0; a < K; ++a)
    for (std::size_t c = a; c < K; ++c) set(PowerIndex::unit(K, a).plus_unit(c), cell, second->h2(a, c));
}

#define GOM_INSTANTIATE_CONDITIONAL(T)                                                                              \
  template struct AnchorSet<T>;                                                                                     \
  template AnchorSet<T> select_anchors<T>(const Basis<T>&, double);                                                 \
  template std::optional<AnchorSet<T>> select_anchors_within<T>(const Basis<T>&, const MeasurementSet&, double);    \
  template std::optional<AnchorSet<T>> anchors_for_cell<T>(const Basis<T>&, const AnchorSet<T>&, const CellIndex&,  \
                                                           AnchorPolicy, double);                                   \
  template FirstMoments<T> conditional_expectation<T>(const Basis<T>&, const AnchorSet<T>&, const MomentTable<T>&,  \
                                                      const CellIndex&, double);                                    \
  template SecondMoments<T> conditional_second_moments<T>(const Basis<T>&, const AnchorSet<T>&,                     \
                                                          const MomentTable<T>&, const CellIndex&, AnchorPolicy,    \
                                                          double);                                                  \
  template Variance<T> conditional_variance<T>(const std::vector<T>&, const Matrix<T>&, double);                    \
  template std::map<PowerIndex, T> change_basis_moments<T>(const std::map<PowerIndex, T>&, const Matrix<T>&);       \
  template std::vector<T> change_basis_expectation<T>(const std::vector<T>&, const Matrix<T>&);                     \
  template std::vector<T> reconstruct_beta<T>(const Basis<T>&, const std::vector<T>&);                              \
  template class HTable<T>;

GOM_INSTANTIATE_CONDITIONAL(double)
GOM_INSTANTIATE_CONDITIONAL(Rational)

#undef GOM_INSTANTIATE_CONDITIONAL

}  // namespace gom
