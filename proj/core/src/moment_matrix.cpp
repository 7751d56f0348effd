#include "gom/moment_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "gom/error.hpp"

namespace gom {

template <typename T>
std::vector<T> block_sums(const Basis<T>& b, std::size_t k) {
  const Scheme& s = b.scheme;
  std::vector<T> sums(s.measurements(), T(0));
  for (std::size_t j = 0; j < s.measurements(); ++j)
    for (int l = 1; l <= s.outcomes(j); ++l) sums[j] += b.columns(s.row_index(j, l), k);
  return sums;
}

template <typename T>
Basis<T> transform_basis(const Basis<T>& b, const Matrix<T>& a) {
  Basis<T> out = b;
  out.columns = b.columns * a;
  out.source_columns.clear();
  return out;
}

template <typename T>
Basis<double> to_double_basis(const Basis<T>& b) {
  Basis<double> out;
  out.scheme = b.scheme;
  out.columns = Matrix<double>(b.columns.rows(), b.columns.cols());
  for (std::size_t r = 0; r < b.columns.rows(); ++r)
    for (std::size_t c = 0; c < b.columns.cols(); ++c) out.columns(r, c) = to_double(b.columns(r, c));
  out.source_columns = b.source_columns;
  out.lambda0 = b.lambda0;
  return out;
}

template <typename T>
MomentMatrix<T>::MomentMatrix(Scheme scheme, std::vector<CellIndex> columns)
    : scheme_(std::move(scheme)), columns_(std::move(columns)), entries_(scheme_.total_outcomes() * columns_.size()) {}

template <typename T>
std::size_t MomentMatrix<T>::column_of(const CellIndex& cell) const {
  auto it = std::lower_bound(columns_.begin(), columns_.end(), cell);
  if (it == columns_.end() || *it != cell) throw InputError("cell " + cell.to_string() + " is not a moment-matrix column");
  return static_cast<std::size_t>(std::distance(columns_.begin(), it));
}

template <typename T>
std::size_t MomentMatrix<T>::known_count(std::size_t c) const {
  std::size_t n = 0;
  for (std::size_t r = 0; r < rows(); ++r) n += known(r, c) ? 1 : 0;
  return n;
}

template <typename T>
std::vector<std::size_t> MomentMatrix<T>::known_rows(std::size_t c) const {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < rows(); ++r)
    if (known(r, c)) out.push_back(r);
  return out;
}

template <typename T>
std::vector<std::size_t> MomentMatrix<T>::unknown_rows(std::size_t c) const {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < rows(); ++r)
    if (!known(r, c)) out.push_back(r);
  return out;
}

template <typename T>
std::vector<T> MomentMatrix<T>::column_values(std::size_t c) const {
  std::vector<T> out;
  out.reserve(rows());
  for (std::size_t r = 0; r < rows(); ++r) {
    if (!known(r, c)) throw Error("column " + columns_[c].to_string() + " has unknown entries");
    out.push_back(*entry(r, c));
  }
  return out;
}

template <typename T>
MomentMatrix<T> build_moment_matrix(const MomentTable<T>& mt, std::size_t column_order_cap) {
  const Scheme& scheme = mt.scheme();
  const std::size_t J = scheme.measurements();
  const std::size_t cap = std::min(column_order_cap, J - 1);
  MomentMatrix<T> m(scheme, cells_up_to_order(scheme, cap));
  for (std::size_t c = 0; c < m.cols(); ++c) {
    const CellIndex& cell = m.column_cell(c);
    for (std::size_t j = 0; j < J; ++j) {
      if (!cell.is_zero_at(j)) continue;
      for (int l = 1; l <= scheme.outcomes(j); ++l) m.set(scheme.row_index(j, l), c, mt.at(cell.with(j, l)));
    }
  }
  return m;
}

template <typename T>
std::size_t estimate_rank(const MomentMatrix<T>& m, double rel_tol, std::size_t k_cap) {
  const Scheme& scheme = m.scheme();
  const std::size_t J = scheme.measurements();
  if (J >= 63) throw InputError("rank search supports at most 62 measurements");
  std::size_t best = 0;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << J); ++mask) {
    std::vector<std::size_t> rows;
    for (std::size_t j = 0; j < J; ++j)
      if (mask & (std::uint64_t{1} << j))
        for (int l = 1; l <= scheme.outcomes(j); ++l) rows.push_back(scheme.row_index(j, l));
    if (rows.size() <= best) continue;
    std::vector<std::size_t> cols;
    for (std::size_t c = 0; c < m.cols(); ++c) {
      bool ok = std::all_of(rows.begin(), rows.end(), [&](std::size_t r) { return m.known(r, c); });
      if (ok) cols.push_back(c);
    }
    if (cols.size() <= best) continue;
    Matrix<T> block(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t k = 0; k < cols.size(); ++k) block(i, k) = *m.entry(rows[i], cols[k]);
    best = std::max(best, matrix_rank(block, rel_tol));
    if (best >= k_cap) return k_cap;
  }
  return std::min(best, k_cap);
}

template <typename T>
const ColumnCompletion<T>* CompletedMatrix<T>::completion_for(std::size_t column) const {
  for (const auto& c : completions)
    if (c.column == column) return &c;
  return nullptr;
}

namespace {

// Rows where target and every regressor are known.
template <typename T>
std::vector<std::size_t> common_rows(const MomentMatrix<T>& m, std::size_t target,
                                     const std::vector<std::size_t>& regressors) {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (!m.known(r, target)) continue;
    if (std::all_of(regressors.begin(), regressors.end(), [&](std::size_t c) { return m.known(r, c); }))
      out.push_back(r);
  }
  return out;
}

template <typename T>
Matrix<T> gather(const MomentMatrix<T>& m, const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
  Matrix<T> out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < cols.size(); ++k) out(i, k) = *m.entry(rows[i], cols[k]);
  return out;
}

// Column-rank test on the regression rows; double instances report the
// singular-value ratio so callers can pick the best-conditioned candidate.
template <typename T>
std::optional<double> regression_quality(const MomentMatrix<T>& m, std::size_t target,
                                         const std::vector<std::size_t>& regressors, double rel_tol) {
  auto rows = common_rows(m, target, regressors);
  if (rows.size() < regressors.size()) return std::nullopt;
  Matrix<T> a = gather(m, rows, regressors);
  if (matrix_rank(a, rel_tol) < regressors.size()) return std::nullopt;
  if constexpr (ScalarTraits<T>::exact) {
    return 1.0;
  } else {
    Matrix<T> gram = a.transpose() * a;
    return std::sqrt(std::max(0.0, conditioning(gram)));
  }
}

}  // namespace

template <typename T>
std::optional<ColumnCompletion<T>> complete_column(MomentMatrix<T>& state, std::size_t target,
                                                   const std::vector<std::size_t>& regressors,
                                                   const CompletionOptions& opts) {
  const auto unknown = state.unknown_rows(target);
  for (std::size_t r : unknown)
    for (std::size_t c : regressors)
      if (!state.known(r, c)) return std::nullopt;

  const auto rows = common_rows(state, target, regressors);
  if (rows.size() < regressors.size()) return std::nullopt;
  Matrix<T> a = gather(state, rows, regressors);
  std::vector<T> b;
  b.reserve(rows.size());
  for (std::size_t r : rows) b.push_back(*state.entry(r, target));
  auto ls = least_squares(a, std::span<const T>(b), opts.rel_tol);
  if (!ls) return std::nullopt;

  ColumnCompletion<T> out;
  out.column = target;
  out.regressors = regressors;
  out.coefficients = ls->x;
  out.fit_rows = rows;
  out.filled_rows = unknown;
  out.residual_norm = std::sqrt(std::max(0.0, to_double(ls->residual_sq)));
  if constexpr (ScalarTraits<T>::exact) {
    out.residual_flagged = ls->residual_sq != 0;
  } else {
    double norm = 0.0;
    for (const T& v : b) norm += to_double(v) * to_double(v);
    out.residual_flagged = out.residual_norm > opts.residual_factor * opts.rel_tol * std::sqrt(norm);
  }
  for (std::size_t r : unknown) {
    T v(0);
    for (std::size_t k = 0; k < regressors.size(); ++k) v += out.coefficients[k] * *state.entry(r, regressors[k]);
    state.set(r, target, v);
  }
  return out;
}

template <typename T>
CompletedMatrix<T> complete(const MomentMatrix<T>& m, std::size_t K, const CompletionOptions& opts) {
  if (K < 1) throw InputError("completion rank K must be at least 1");
  CompletedMatrix<T> cm{m, m, {}, {}, {}, K};
  MomentMatrix<T>& state = cm.filled;

  std::vector<std::size_t> order(m.cols());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return m.known_count(a) > m.known_count(b); });

  bool progress = true;
  while (progress) {
    progress = false;
    for (std::size_t target : order) {
      if (state.column_complete(target)) continue;
      const auto unknown = state.unknown_rows(target);

      // Candidates known wherever the target is unknown, most-known first.
      std::vector<std::size_t> candidates;
      for (std::size_t c = 0; c < state.cols(); ++c) {
        if (c == target) continue;
        if (std::all_of(unknown.begin(), unknown.end(), [&](std::size_t r) { return state.known(r, c); }))
          candidates.push_back(c);
      }
      std::stable_sort(candidates.begin(), candidates.end(),
                       [&](std::size_t a, std::size_t b) { return state.known_count(a) > state.known_count(b); });

      // Greedy pivoted growth of a rank-K regressor set.
      std::vector<std::size_t> chosen;
      while (chosen.size() < K) {
        std::optional<std::size_t> pick;
        double pick_quality = -1.0;
        for (std::size_t c : candidates) {
          if (std::find(chosen.begin(), chosen.end(), c) != chosen.end()) continue;
          auto trial = chosen;
          trial.push_back(c);
          auto q = regression_quality(state, target, trial, opts.rel_tol);
          if (!q) continue;
          if (*q > pick_quality) {
            pick = c;
            pick_quality = *q;
          }
          if constexpr (ScalarTraits<T>::exact) break;
        }
        if (!pick) break;
        chosen.push_back(*pick);
      }
      if (chosen.size() < K) continue;
      std::sort(chosen.begin(), chosen.end());
      if (auto done = complete_column(state, target, chosen, opts)) {
        cm.completions.push_back(std::move(*done));
        progress = true;
      }
    }
  }

  for (std::size_t c = 0; c < state.cols(); ++c) {
    if (state.column_complete(c)) {
      cm.kappa.push_back(c);
    } else {
      cm.failed.push_back(c);
    }
  }
  std::vector<std::size_t> all_rows(state.rows());
  std::iota(all_rows.begin(), all_rows.end(), 0);
  const std::size_t rank = matrix_rank(gather(state, all_rows, cm.kappa), opts.rel_tol);
  if (rank < K) {
    throw IdentificationError("support not identifiable at rank K=" + std::to_string(K) + ": completed columns have rank " +
                              std::to_string(rank) + " (" + std::to_string(cm.failed.size()) +
                              " columns could not be completed)");
  }
  return cm;
}

template <typename T>
Basis<T> extract_basis(const CompletedMatrix<T>& cm, const std::vector<CellIndex>& preferred, double rel_tol) {
  const auto& state = cm.filled;
  std::vector<std::size_t> order;
  for (const auto& cell : preferred) {
    std::size_t c = state.column_of(cell);
    if (!state.column_complete(c)) throw InputError("preferred column " + cell.to_string() + " is not complete");
    order.push_back(c);
  }
  for (std::size_t c : cm.kappa)
    if (std::find(order.begin(), order.end(), c) == order.end()) order.push_back(c);

  std::vector<std::size_t> all_rows(state.rows());
  std::iota(all_rows.begin(), all_rows.end(), 0);
  std::vector<std::size_t> chosen;
  for (std::size_t c : order) {
    if (chosen.size() == cm.K) break;
    auto trial = chosen;
    trial.push_back(c);
    if (matrix_rank(gather(state, all_rows, trial), rel_tol) == trial.size()) chosen = std::move(trial);
  }
  if (chosen.size() < cm.K) throw IdentificationError("completed columns do not contain K independent vectors");

  Basis<T> b;
  b.scheme = state.scheme();
  b.columns = gather(state, all_rows, chosen);
  for (std::size_t c : chosen) b.source_columns.push_back(state.column_cell(c));
  return b;
}

template <typename T>
Basis<T> normalize_lambda0(const Basis<T>& b, double tol) {
  Basis<T> out = b;
  const Scheme& s = b.scheme;
  const std::size_t J = s.measurements();
  for (std::size_t k = 0; k < b.K(); ++k) {
    std::vector<T> sums = block_sums(b, k);
    T mean(0);
    for (const T& v : sums) mean += v;
    mean /= T(static_cast<long>(J));
    for (std::size_t j = 0; j < J; ++j) {
      T dev = sums[j] - mean;
      const bool bad = ScalarTraits<T>::exact && tol == 0.0
                           ? dev != 0
                           : to_double(abs_value(dev)) > tol * std::max(1.0, std::fabs(to_double(mean)));
      if (bad) {
        throw IdentificationError("column " + std::to_string(k + 1) +
                                  " not in a scaled copy of the probability plane: block sums disagree (measurement " +
                                  std::to_string(j + 1) + ")");
      }
    }
    if (mean == 0) throw IdentificationError("column " + std::to_string(k + 1) + " has zero block sums");
    for (std::size_t r = 0; r < s.total_outcomes(); ++r) out.columns(r, k) /= mean;
    // Absorb the tolerated disagreement so every block sums to exactly 1.
    for (std::size_t j = 0; j < J; ++j) {
      T sum(0);
      for (int l = 1; l <= s.outcomes(j); ++l) sum += out.columns(s.row_index(j, l), k);
      if (sum == 1) continue;
      T shift = (sum - T(1)) / T(static_cast<long>(s.outcomes(j)));
      for (int l = 1; l <= s.outcomes(j); ++l) out.columns(s.row_index(j, l), k) -= shift;
    }
  }
  out.lambda0 = true;
  return out;
}

template <typename T>
std::pair<Basis<T>, Matrix<T>> normalize_lambda1(const Basis<T>& b, const std::vector<T>& eg) {
  if (!b.lambda0) throw InputError("lambda1 normalization requires a lambda0 basis");
  const std::size_t K = b.K();
  if (eg.size() != K) throw InputError("expectation vector has wrong length");
  const T target = T(1) / T(static_cast<long>(K));
  bool centered = true;
  for (std::size_t k = 0; k < K; ++k)
    if (eg[k] != target) centered = false;
  if (centered) return {b, Matrix<T>::identity(K)};

  // A^{-1} = I + (t - u) 1^T: a translation of the affine plane sum g = 1,
  // so column sums stay 1 and det = 2 - sum u.
  Matrix<T> a_inv = Matrix<T>::identity(K);
  for (std::size_t r = 0; r < K; ++r)
    for (std::size_t c = 0; c < K; ++c) a_inv(r, c) += target - eg[r];
  auto a = inverse(a_inv);
  if (!a) throw IdentificationError("lambda1 rank-one update singular");
  Basis<T> out = transform_basis(b, *a);
  out.lambda0 = true;
  return {out, *a};
}

template <typename T>
std::string moment_matrix_csv(const CompletedMatrix<T>& cm) {
  std::ostringstream out;
  const auto& m = cm.filled;
  out << "row";
  for (const auto& cell : m.columns()) out << ",\"" << cell.to_string() << "\"";
  out << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out << '"' << m.scheme().row_label(r) << '"';
    for (std::size_t c = 0; c < m.cols(); ++c) {
      out << ',';
      if (cm.base.known(r, c)) {
        out << scalar_to_string(*cm.base.entry(r, c));
      } else if (m.known(r, c)) {
        out << '[' << scalar_to_string(*m.entry(r, c)) << ']';
      } else {
        out << '?';
      }
    }
    out << '\n';
  }
  return out.str();
}

#define GOM_INSTANTIATE_MM(T)                                                                                  \
  template std::vector<T> block_sums<T>(const Basis<T>&, std::size_t);                                         \
  template Basis<T> transform_basis<T>(const Basis<T>&, const Matrix<T>&);                                     \
  template Basis<double> to_double_basis<T>(const Basis<T>&);                                                  \
  template class MomentMatrix<T>;                                                                              \
  template struct CompletedMatrix<T>;                                                                          \
  template MomentMatrix<T> build_moment_matrix<T>(const MomentTable<T>&, std::size_t);                         \
  template std::size_t estimate_rank<T>(const MomentMatrix<T>&, double, std::size_t);                          \
  template std::optional<ColumnCompletion<T>> complete_column<T>(MomentMatrix<T>&, std::size_t,                \
                                                                 const std::vector<std::size_t>&,              \
                                                                 const CompletionOptions&);                    \
  template CompletedMatrix<T> complete<T>(const MomentMatrix<T>&, std::size_t, const CompletionOptions&);      \
  template Basis<T> extract_basis<T>(const CompletedMatrix<T>&, const std::vector<CellIndex>&, double);        \
  template Basis<T> normalize_lambda0<T>(const Basis<T>&, double);                                             \
  template std::pair<Basis<T>, Matrix<T>> normalize_lambda1<T>(const Basis<T>&, const std::vector<T>&);        \
  template std::string moment_matrix_csv<T>(const CompletedMatrix<T>&);

GOM_INSTANTIATE_MM(double)
GOM_INSTANTIATE_MM(Rational)

#undef GOM_INSTANTIATE_MM

}  // namespace gom
