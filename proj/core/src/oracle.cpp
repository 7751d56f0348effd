#include "gom/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gom/error.hpp"
#include "gom/moment_matrix.hpp"

namespace gom {

template <typename T>
DiscreteLatentModel<T>::DiscreteLatentModel(Scheme scheme, std::vector<std::vector<T>> points, std::vector<T> weights,
                                            double tol)
    : scheme_(std::move(scheme)), points_(std::move(points)), weights_(std::move(weights)) {
  if (points_.empty()) throw InputError("latent model needs at least one support point");
  if (points_.size() != weights_.size()) throw InputError("latent model: one weight per support point required");
  T total(0);
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto& p = points_[i];
    if (p.size() != scheme_.total_outcomes()) {
      throw InputError("support point " + std::to_string(i + 1) + " has length " + std::to_string(p.size()) +
                       ", expected " + std::to_string(scheme_.total_outcomes()));
    }
    if (weights_[i] < 0) throw InputError("negative weight for support point " + std::to_string(i + 1));
    total += weights_[i];
    for (std::size_t j = 0; j < scheme_.measurements(); ++j) {
      T block(0);
      for (int l = 1; l <= scheme_.outcomes(j); ++l) {
        const T& v = p[scheme_.row_index(j, l)];
        if (v < 0) throw InputError("support point " + std::to_string(i + 1) + " has a negative probability");
        block += v;
      }
      T dev = block - T(1);
      if (!is_zero(dev, tol)) {
        throw InputError("support point " + std::to_string(i + 1) + ": probabilities of measurement " +
                         std::to_string(j + 1) + " do not sum to 1");
      }
    }
  }
  T dev = total - T(1);
  if (!is_zero(dev, tol)) throw InputError("latent model weights do not sum to 1");
}

template <typename T>
DiscreteLatentModel<double> to_double_model(const DiscreteLatentModel<T>& model) {
  std::vector<std::vector<double>> pts;
  for (const auto& p : model.points()) {
    std::vector<double> q;
    for (const T& v : p) q.push_back(to_double(v));
    pts.push_back(std::move(q));
  }
  std::vector<double> w;
  for (const T& v : model.weights()) w.push_back(to_double(v));
  return DiscreteLatentModel<double>(model.scheme(), std::move(pts), std::move(w), 1e-9);
}

template <typename T>
T exact_ell_moment(const DiscreteLatentModel<T>& model, const CellIndex& cell) {
  validate_cell(model.scheme(), cell);
  T sum(0);
  for (std::size_t i = 0; i < model.support_size(); ++i) {
    T term = model.weights()[i];
    for (std::size_t j = 0; j < cell.size(); ++j)
      if (cell[j] != 0) term *= model.prob(i, j, cell[j]);
    sum += term;
  }
  return sum;
}

template <typename T>
MomentTable<T> exact_ell_moments(const DiscreteLatentModel<T>& model, std::size_t max_order) {
  MomentTable<T> mt(model.scheme(), MomentSource::exact_oracle);
  for (const auto& cell : cells_up_to_order(model.scheme(), max_order)) mt.set(cell, exact_ell_moment(model, cell));
  return mt;
}

template <typename T>
std::vector<std::vector<T>> latent_coordinates(const DiscreteLatentModel<T>& model, const Basis<T>& basis,
                                               double tol) {
  std::vector<std::vector<T>> out;
  for (std::size_t i = 0; i < model.support_size(); ++i) {
    const auto& beta = model.points()[i];
    auto ls = least_squares(basis.columns, std::span<const T>(beta));
    if (!ls) throw IdentificationError("model/basis mismatch: basis columns are dependent");
    bool inside = ScalarTraits<T>::exact ? ls->residual_sq == 0 : std::sqrt(to_double(ls->residual_sq)) <= tol;
    if (!inside) {
      throw IdentificationError("model/basis mismatch: support point " + std::to_string(i + 1) +
                                " lies outside the span of the basis");
    }
    out.push_back(std::move(ls->x));
  }
  return out;
}

template <typename T>
T exact_conditional_moment(const DiscreteLatentModel<T>& model, const Basis<T>& basis, const CellIndex& cell,
                           const PowerIndex& v, double tol) {
  if (v.dims() != basis.K()) throw InputError("power index dimension differs from basis dimension");
  const auto coords = latent_coordinates(model, basis, tol);
  T mass(0);
  T moment(0);
  for (std::size_t i = 0; i < model.support_size(); ++i) {
    const auto& g = coords[i];
    // Density numerator prod_{j observed} sum_k g_k lambda^k_{j, cell_j}.
    T density = model.weights()[i];
    for (std::size_t j = 0; j < cell.size(); ++j) {
      if (cell[j] == 0) continue;
      T beta(0);
      for (std::size_t k = 0; k < basis.K(); ++k) beta += g[k] * basis.at(j, cell[j], k);
      density *= beta;
    }
    T power(1);
    for (std::size_t k = 0; k < v.dims(); ++k)
      for (int e = 0; e < v[k]; ++e) power *= g[k];
    mass += density;
    moment += density * power;
  }
  if (mass == 0) throw PredictionError("conditioning event " + cell.to_string() + " has zero probability");
  return moment / mass;
}

template <typename T>
Sample sample(const DiscreteLatentModel<T>& model, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw InputError("sample size N must be at least 1");
  const Scheme& s = model.scheme();
  std::mt19937_64 rng(seed);

  std::vector<double> w;
  for (const T& v : model.weights()) w.push_back(to_double(v));
  std::discrete_distribution<std::size_t> pick_point(w.begin(), w.end());

  // Per point and measurement, the outcome distribution.
  std::vector<std::vector<std::discrete_distribution<int>>> outcome(model.support_size());
  for (std::size_t i = 0; i < model.support_size(); ++i) {
    for (std::size_t j = 0; j < s.measurements(); ++j) {
      std::vector<double> p;
      for (int l = 1; l <= s.outcomes(j); ++l) p.push_back(to_double(model.prob(i, j, l)));
      outcome[i].emplace_back(p.begin(), p.end());
    }
  }

  std::vector<std::vector<int>> rows(n, std::vector<int>(s.measurements()));
  for (auto& row : rows) {
    const std::size_t i = pick_point(rng);
    for (std::size_t j = 0; j < s.measurements(); ++j) row[j] = outcome[i][j](rng) + 1;
  }
  return Sample(s, std::move(rows));
}

DiscreteLatentModel<Rational> random_model(const Scheme& scheme, std::size_t K, std::uint64_t seed,
                                           bool general_position, int max_attempts) {
  const std::size_t J = scheme.measurements();
  if (K < 1 || K > scheme.total_outcomes() - J + 1) {
    throw InputError("random model: K must lie in 1.." + std::to_string(scheme.total_outcomes() - J + 1));
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long> draw(1, 12);
  const std::size_t column_cap = std::min<std::size_t>(2, J - 1);

  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    std::vector<std::vector<Rational>> points;
    for (std::size_t i = 0; i < K; ++i) {
      std::vector<Rational> p(scheme.total_outcomes());
      for (std::size_t j = 0; j < J; ++j) {
        std::vector<long> raw;
        long total = 0;
        for (int l = 1; l <= scheme.outcomes(j); ++l) {
          raw.push_back(draw(rng));
          total += raw.back();
        }
        for (int l = 1; l <= scheme.outcomes(j); ++l)
          p[scheme.row_index(j, l)] = ScalarTraits<Rational>::from_ratio(raw[static_cast<std::size_t>(l - 1)], total);
      }
      points.push_back(std::move(p));
    }
    if (matrix_rank(Matrix<Rational>::from_columns(points), 0.0) < K) continue;

    std::vector<Rational> weights(K, ScalarTraits<Rational>::from_ratio(1, static_cast<long>(K)));
    DiscreteLatentModel<Rational> model(scheme, std::move(points), std::move(weights));
    if (!general_position) return model;

    try {
      auto mt = exact_ell_moments(model, std::min(J, column_cap + 1));
      auto m = build_moment_matrix(mt, column_cap);
      if (estimate_rank(m, 0.0, K + 1) != K) continue;
      auto cm = complete(m, K, CompletionOptions{0.0, 10.0});
      if (!cm.failed.empty()) continue;
      return model;
    } catch (const IdentificationError&) {
      continue;
    }
  }
  throw InputError("random model: rejection budget exhausted; try a smaller K");
}

#define GOM_INSTANTIATE_ORACLE(T)                                                                             \
  template class DiscreteLatentModel<T>;                                                                      \
  template DiscreteLatentModel<double> to_double_model<T>(const DiscreteLatentModel<T>&);                     \
  template MomentTable<T> exact_ell_moments<T>(const DiscreteLatentModel<T>&, std::size_t);                   \
  template T exact_ell_moment<T>(const DiscreteLatentModel<T>&, const CellIndex&);                            \
  template std::vector<std::vector<T>> latent_coordinates<T>(const DiscreteLatentModel<T>&, const Basis<T>&,  \
                                                             double);                                         \
  template T exact_conditional_moment<T>(const DiscreteLatentModel<T>&, const Basis<T>&, const CellIndex&,    \
                                         const PowerIndex&, double);                                          \
  template Sample sample<T>(const DiscreteLatentModel<T>&, std::size_t, std::uint64_t);

GOM_INSTANTIATE_ORACLE(double)
GOM_INSTANTIATE_ORACLE(Rational)

#undef GOM_INSTANTIATE_ORACLE

}  // namespace gom
