#include "gom/estimator.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "gom/error.hpp"

namespace gom {

std::string to_string(Normalization n) { return n == Normalization::lambda0 ? "lambda0" : "lambda0+lambda1"; }

Normalization parse_normalization(const std::string& s) {
  if (s == "lambda0") return Normalization::lambda0;
  if (s == "lambda0+lambda1" || s == "lambda1") return Normalization::lambda0_lambda1;
  throw InputError("unknown normalization '" + s + "' (expected lambda0 or lambda0+lambda1)");
}

void FitConfig::validate() const {
  if (rank_rel_tol < 0 || completion_tol < 0 || lambda0_tol < 0 || anchor_tol < 0 || refine_tol < 0)
    throw InputError("tolerances must be non-negative");
  if (refine_max_iters < 1) throw InputError("refine_max_iters must be at least 1");
  if (K_override && *K_override < 1) throw InputError("K must be at least 1");
  if (threads < 1) throw InputError("threads must be at least 1");
}

std::string to_string(CellStatus s) {
  switch (s) {
    case CellStatus::identified: return "identified";
    case CellStatus::expectation_only: return "expectation-only";
    case CellStatus::not_identifiable: return "not-identifiable";
    case CellStatus::zero_mass: return "zero-mass";
    case CellStatus::moments_unavailable: return "moments-unavailable";
  }
  return "unknown";
}

CellStatus parse_cell_status(const std::string& s) {
  for (auto st : {CellStatus::identified, CellStatus::expectation_only, CellStatus::not_identifiable,
                  CellStatus::zero_mass, CellStatus::moments_unavailable})
    if (to_string(st) == s) return st;
  throw InputError("unknown cell status '" + s + "'");
}

namespace {

std::string measurement_list(const MeasurementSet& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i] + 1);
  return out + "}";
}

template <typename T>
std::string anchor_label(const AnchorSet<T>& a) {
  std::string out;
  for (const auto& p : a.pairs) out += to_string(p);
  return out;
}

template <typename T>
double affine_deviation(const std::vector<T>& e) {
  T sum(0);
  for (const T& v : e) sum += v;
  T dev = sum - T(1);
  return std::fabs(to_double(dev));
}

// Unknown layout of the frequency system: per cell, h^{1_k} then
// h^{1_a + 1_b} for a <= b.
struct Layout {
  std::size_t K = 0;
  std::vector<CellIndex> cells;
  std::map<CellIndex, std::size_t> pos;

  std::size_t per_cell() const { return K + K * (K + 1) / 2; }
  std::size_t unknowns() const { return cells.size() * per_cell(); }
  std::size_t first(std::size_t cell, std::size_t k) const { return cell * per_cell() + k; }
  std::size_t second(std::size_t cell, std::size_t a, std::size_t b) const {
    if (a > b) std::swap(a, b);
    // Offset of pair (a, b) in the upper triangle, row-major.
    const std::size_t tri = a * K - a * (a - 1) / 2 + (b - a);
    return cell * per_cell() + K + tri;
  }
};

Layout make_layout(const Scheme& s, std::size_t K, const MeasurementSet& j0, std::size_t cell_order) {
  Layout layout;
  layout.K = K;
  for (const auto& cell : cells_up_to_order(s, cell_order)) {
    if (!std::all_of(j0.begin(), j0.end(), [&](std::size_t j) { return cell.is_zero_at(j); })) continue;
    layout.pos[cell] = layout.cells.size();
    layout.cells.push_back(cell);
  }
  return layout;
}

// One linear equation: sum coeff * x[col] = rhs.
struct Equation {
  std::vector<std::pair<std::size_t, double>> terms;
  double rhs = 0.0;
};

// Equations of the frequency system with the basis fixed, in the h unknowns.
std::vector<Equation> h_equations(const Layout& layout, const Basis<double>& b, const MomentTable<double>& mt) {
  const Scheme& s = b.scheme;
  const std::size_t K = layout.K;
  std::vector<Equation> eqs;
  for (std::size_t c = 0; c < layout.cells.size(); ++c) {
    const CellIndex& cell = layout.cells[c];
    const MeasurementSet zeros = cell.zero_set();
    for (std::size_t j : zeros) {
      for (int l = 1; l <= s.outcomes(j); ++l) {
        const CellIndex shifted = cell.with(j, l);
        const std::size_t row = s.row_index(j, l);
        if (mt.contains(shifted)) {
          Equation e;
          for (std::size_t k = 0; k < K; ++k) e.terms.push_back({layout.first(c, k), b.columns(row, k)});
          e.rhs = mt.at(shifted);
          eqs.push_back(std::move(e));
        }
        auto it = layout.pos.find(shifted);
        if (zeros.size() > 1 && it != layout.pos.end()) {
          for (std::size_t k0 = 0; k0 < K; ++k0) {
            Equation e;
            for (std::size_t k = 0; k < K; ++k) e.terms.push_back({layout.second(c, k0, k), b.columns(row, k)});
            e.terms.push_back({layout.first(it->second, k0), -1.0});
            eqs.push_back(std::move(e));
          }
        }
      }
    }
  }
  auto origin = layout.pos.find(CellIndex::zeros(s.measurements()));
  if (origin != layout.pos.end()) {
    const std::size_t c = origin->second;
    Equation e1;
    for (std::size_t k = 0; k < K; ++k) e1.terms.push_back({layout.first(c, k), 1.0});
    e1.rhs = 1.0;
    eqs.push_back(std::move(e1));
    Equation e2;
    for (std::size_t a = 0; a < K; ++a)
      for (std::size_t b2 = a; b2 < K; ++b2) e2.terms.push_back({layout.second(c, a, b2), a == b2 ? 1.0 : 2.0});
    e2.rhs = 1.0;
    eqs.push_back(std::move(e2));
  }
  return eqs;
}

struct HStep {
  double residual = 0.0;
  Eigen::VectorXd h;
  std::size_t equations = 0;
};

HStep solve_h(const Layout& layout, const Basis<double>& b, const MomentTable<double>& mt) {
  const auto eqs = h_equations(layout, b, mt);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(eqs.size()),
                                            static_cast<Eigen::Index>(layout.unknowns()));
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(eqs.size()));
  for (std::size_t i = 0; i < eqs.size(); ++i) {
    for (const auto& [col, coeff] : eqs[i].terms)
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col)) += coeff;
    rhs(static_cast<Eigen::Index>(i)) = eqs[i].rhs;
  }
  HStep out;
  out.equations = eqs.size();
  if (eqs.empty()) return out;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  out.h = cod.solve(rhs);
  out.residual = (a * out.h - rhs).norm();
  return out;
}

// Per-row least squares for the basis with h fixed.
void solve_alpha(const Layout& layout, Basis<double>& b, const Eigen::VectorXd& h, const MomentTable<double>& mt) {
  const Scheme& s = b.scheme;
  const std::size_t K = layout.K;
  for (std::size_t row = 0; row < s.total_outcomes(); ++row) {
    const auto [j, l] = s.row_pair(row);
    std::vector<std::vector<double>> coeffs;
    std::vector<double> rhs;
    for (std::size_t c = 0; c < layout.cells.size(); ++c) {
      const CellIndex& cell = layout.cells[c];
      if (!cell.is_zero_at(j)) continue;
      const CellIndex shifted = cell.with(j, l);
      if (mt.contains(shifted)) {
        std::vector<double> r(K);
        for (std::size_t k = 0; k < K; ++k) r[k] = h(static_cast<Eigen::Index>(layout.first(c, k)));
        coeffs.push_back(std::move(r));
        rhs.push_back(mt.at(shifted));
      }
      auto it = layout.pos.find(shifted);
      if (cell.zero_set().size() > 1 && it != layout.pos.end()) {
        for (std::size_t k0 = 0; k0 < K; ++k0) {
          std::vector<double> r(K);
          for (std::size_t k = 0; k < K; ++k) r[k] = h(static_cast<Eigen::Index>(layout.second(c, k0, k)));
          coeffs.push_back(std::move(r));
          rhs.push_back(h(static_cast<Eigen::Index>(layout.first(it->second, k0))));
        }
      }
    }
    if (coeffs.empty()) continue;
    Eigen::MatrixXd a(static_cast<Eigen::Index>(coeffs.size()), static_cast<Eigen::Index>(K));
    Eigen::VectorXd y(static_cast<Eigen::Index>(coeffs.size()));
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      for (std::size_t k = 0; k < K; ++k)
        a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = coeffs[i][k];
      y(static_cast<Eigen::Index>(i)) = rhs[i];
    }
    Eigen::VectorXd x = a.completeOrthogonalDecomposition().solve(y);
    for (std::size_t k = 0; k < K; ++k) b.columns(row, k) = x(static_cast<Eigen::Index>(k));
  }
}

template <typename T>
void collect_conditionals(FittedModel<T>& model, const std::vector<CellIndex>& cells, double anchor_tol) {
  model.conditionals.clear();
  model.diagnostics.affine_deviation = 0.0;
  std::vector<CellConditional<T>> results(cells.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(cells.size());
  auto work = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        results[i] =
            compute_conditional(model.basis, model.anchors, model.moments, cells[i], model.config.anchors, anchor_tol);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::min(std::max<std::size_t>(model.config.threads, 1), cells.size());
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const CellIndex& cell = cells[i];
    auto& cc = results[i];
    if (!cc.expectation.empty())
      model.diagnostics.affine_deviation =
          std::max(model.diagnostics.affine_deviation, affine_deviation(cc.expectation));
    if (cc.variance_clamped)
      model.diagnostics.warnings.push_back("variance clamped to 0 at cell " + cell.to_string());
    if (cc.variance_inconsistent)
      model.diagnostics.warnings.push_back("negative variance (numerically inconsistent) at cell " + cell.to_string());
    model.conditionals.emplace(cell, std::move(cc));
  }
}

template <typename T>
MomentTable<double> as_double_table(const MomentTable<T>& mt) {
  if constexpr (ScalarTraits<T>::exact) {
    return to_double_table(mt);
  } else {
    return mt;
  }
}

template <typename T>
Basis<double> as_double_basis(const Basis<T>& b) {
  if constexpr (ScalarTraits<T>::exact) {
    return to_double_basis(b);
  } else {
    return b;
  }
}

// Stage failures keep their exception type and gain a stage prefix.
template <typename F>
auto staged(const std::string& stage, F&& f) {
  try {
    return f();
  } catch (const IdentificationError& e) {
    throw IdentificationError(stage + ": " + e.what());
  }
}

}  // namespace

template <typename T>
CellConditional<T> compute_conditional(const Basis<T>& basis, const AnchorSet<T>& anchors, const MomentTable<T>& mt,
                                       const CellIndex& cell, AnchorPolicy policy, double anchor_tol,
                                       double clamp_tol) {
  CellConditional<T> cc;
  const std::size_t tabulated = mt.max_order();
  if (cell.order() + 1 > tabulated) {
    cc.status = CellStatus::moments_unavailable;
    cc.note = "needs moments of order " + std::to_string(cell.order() + 1) + "; table holds order <= " +
              std::to_string(tabulated);
    return cc;
  }
  auto first_anchors = anchors_for_cell(basis, anchors, cell, policy, anchor_tol);
  if (!first_anchors) {
    cc.status = CellStatus::not_identifiable;
    cc.note = policy == AnchorPolicy::canonical
                  ? "cell observes an anchor measurement of J0 = " + measurement_list(anchors.measurements())
                  : "no nonsingular anchor rows inside the zero set";
    return cc;
  }
  cc.anchors = anchor_label(*first_anchors);
  cc.mass = mt.at(cell);
  if (!(cc.mass > 0)) {
    cc.status = CellStatus::zero_mass;
    cc.note = "conditioning event has zero estimated probability";
    return cc;
  }
  try {
    auto first = conditional_expectation(basis, *first_anchors, mt, cell, anchor_tol);
    cc.h = std::move(first.h);
    cc.expectation = std::move(first.expectation);
  } catch (const PredictionError& e) {
    cc.status = CellStatus::not_identifiable;
    cc.note = e.what();
    return cc;
  }
  if (cell.order() + 2 > tabulated) {
    cc.status = CellStatus::expectation_only;
    cc.note = "variance needs moments of order " + std::to_string(cell.order() + 2);
    return cc;
  }
  try {
    auto second = conditional_second_moments(basis, anchors, mt, cell, policy, anchor_tol);
    auto var = conditional_variance(cc.expectation, second.second, clamp_tol);
    cc.variance = std::move(var.values);
    cc.variance_clamped = var.clamped;
    cc.variance_inconsistent = var.inconsistent;
    cc.second = std::move(second.second);
    cc.variance_route = second.route + ":" + anchor_label(second.second_layer);
    cc.status = CellStatus::identified;
  } catch (const PredictionError& e) {
    cc.status = CellStatus::expectation_only;
    cc.note = e.what();
  }
  return cc;
}

template <typename T>
FittedModel<T> fit(const MomentTable<T>& mt, const FitConfig& config) {
  config.validate();
  constexpr bool exact = ScalarTraits<T>::exact;
  const Scheme& s = mt.scheme();
  const std::size_t J = s.measurements();
  if (J < 2) throw InputError("at least two measurements are required");
  const std::size_t max_order = std::min(config.max_order == 0 ? J : config.max_order, mt.max_order());
  if (max_order < 1) throw InputError("moment table holds no cells of order >= 1");
  if (!mt.contains(CellIndex::zeros(J))) throw InputError("moment table lacks the (0,...,0) cell");

  const std::size_t default_cap = std::min<std::size_t>({2, J - 1, max_order - 1});
  const std::size_t cap = config.column_order_cap.value_or(default_cap);
  if (cap + 1 > max_order) {
    throw InputError("column order cap " + std::to_string(cap) + " needs moments of order " +
                     std::to_string(cap + 1) + "; table holds order <= " + std::to_string(max_order));
  }

  FittedModel<T> model;
  model.scheme = s;
  model.config = config;
  model.moments = mt;
  auto& diag = model.diagnostics;
  diag.summation = check_summation(mt, exact ? 0.0 : 1e-12);

  const double rank_tol = exact ? 0.0 : config.rank_rel_tol;
  const double completion_tol = exact ? 0.0 : config.completion_tol;
  const double anchor_tol = exact ? 0.0 : config.anchor_tol;

  const MomentMatrix<T> mm = build_moment_matrix(mt, cap);
  const std::size_t k_cap = s.total_outcomes() - J + 1;
  if (config.K_override) {
    model.K = *config.K_override;
    diag.k_source = "override";
    diag.estimated_rank = estimate_rank(mm, rank_tol, k_cap);
  } else {
    diag.estimated_rank = estimate_rank(mm, rank_tol, k_cap);
    model.K = *diag.estimated_rank;
    diag.k_source = "estimated";
  }
  if (model.K == 0) throw IdentificationError("rank estimation: moment matrix has rank 0");

  CompletedMatrix<T> cm =
      staged("completion", [&] { return complete(mm, model.K, CompletionOptions{completion_tol, 10.0}); });
  for (const auto& c : cm.completions) {
    CompletionSummary cs;
    cs.column = mm.column_cell(c.column);
    for (std::size_t r : c.regressors) cs.regressors.push_back(mm.column_cell(r));
    cs.residual_norm = c.residual_norm;
    cs.flagged = c.residual_flagged;
    if (cs.flagged) diag.warnings.push_back("completion residual flagged for column " + cs.column.to_string());
    diag.completions.push_back(std::move(cs));
  }
  for (std::size_t c : cm.failed) diag.failed_columns.push_back(mm.column_cell(c));

  Basis<T> basis =
      staged("basis extraction", [&] { return extract_basis(cm, config.preferred_basis_columns, completion_tol); });
  const double l0_tol = exact && diag.summation.ok() ? 0.0 : config.lambda0_tol;
  basis = staged("lambda0 normalization", [&] { return normalize_lambda0(basis, l0_tol); });

  if (config.normalization == Normalization::lambda0_lambda1) {
    staged("lambda1 normalization", [&] {
      const AnchorSet<T> a0 = select_anchors(basis, anchor_tol);
      const auto eg = conditional_expectation(basis, a0, mt, CellIndex::zeros(J), anchor_tol);
      auto [centred, a] = normalize_lambda1(basis, eg.expectation);
      basis = std::move(centred);
      model.lambda1_transform = std::move(a);
      return 0;
    });
  }
  model.basis = basis;
  model.anchors = staged("anchor selection", [&] { return select_anchors(model.basis, anchor_tol); });
  if (!model.anchors.extra) {
    diag.warnings.push_back("no extra anchor pair satisfies the all-submatrices condition; variances rely on "
                            "per-cell second-layer systems");
  }

  collect_conditionals(model, cells_up_to_order(s, max_order - 1), anchor_tol);

  if (config.main_residual) {
    const std::size_t order = std::min(config.refine_cell_order, max_order - 1);
    diag.main_system_residual =
        main_system_residual(as_double_basis(model.basis), as_double_table(mt), model.anchors.measurements(), order)
            .residual;
  }
  model.completed = std::move(cm);

  if (config.refine) {
    if constexpr (exact) {
      throw InputError("refinement requires float arithmetic");
    } else {
      model = refine_joint_ls(model, mt, config);
    }
  }
  return model;
}

AnyFittedModel fit(const Sample& sample, const FitConfig& config) {
  const std::size_t J = sample.scheme().measurements();
  const std::size_t max_order = config.max_order == 0 ? J : std::min(config.max_order, J);
  const ContingencyTable ct = tabulate(sample, max_order);
  if (config.arithmetic == Arithmetic::rational) return fit(to_frequencies<Rational>(ct), config);
  return fit(to_frequencies<double>(ct), config);
}

AnyFittedModel fit_any(const std::variant<MomentTable<double>, MomentTable<Rational>>& mt, const FitConfig& config) {
  if (const auto* r = std::get_if<MomentTable<Rational>>(&mt)) {
    if (config.arithmetic == Arithmetic::rational) return fit(*r, config);
    return fit(to_double_table(*r), config);
  }
  if (config.arithmetic == Arithmetic::rational)
    throw InputError("a float moment table cannot be fitted in rational arithmetic");
  return fit(std::get<MomentTable<double>>(mt), config);
}

template <typename T>
Prediction<T> predict(const FittedModel<T>& model, const CellIndex& cell) {
  validate_cell(model.scheme, cell);
  Prediction<T> out;
  out.cell = cell;
  CellConditional<T> cc;
  if (auto it = model.conditionals.find(cell); it != model.conditionals.end()) {
    cc = it->second;
    out.stored = true;
  } else {
    const double tol = ScalarTraits<T>::exact ? 0.0 : model.config.anchor_tol;
    cc = compute_conditional(model.basis, model.anchors, model.moments, cell, model.config.anchors, tol);
  }
  switch (cc.status) {
    case CellStatus::not_identifiable:
      throw PredictionError("cell " + cell.to_string() + " is not identifiable with current anchors J0 = " +
                            measurement_list(model.anchors.measurements()) + " (" + cc.note + ")");
    case CellStatus::zero_mass:
      throw PredictionError("conditioning event has zero estimated probability at cell " + cell.to_string());
    case CellStatus::moments_unavailable:
      throw PredictionError("cell " + cell.to_string() + ": " + cc.note);
    default:
      break;
  }
  out.mass = cc.mass;
  out.expectation = cc.expectation;
  out.variance = cc.variance;
  out.beta = reconstruct_beta(model.basis, cc.expectation);
  return out;
}

MainSystemFit main_system_residual(const Basis<double>& basis, const MomentTable<double>& mt,
                                   const MeasurementSet& anchor_measurements, std::size_t cell_order) {
  const Layout layout = make_layout(basis.scheme, basis.K(), anchor_measurements, cell_order);
  const HStep step = solve_h(layout, basis, mt);
  return {step.residual, step.equations, layout.unknowns()};
}

FittedModel<double> refine_joint_ls(const FittedModel<double>& model, const MomentTable<double>& mt,
                                    const FitConfig& config) {
  config.validate();
  if (mt.max_order() < 1) throw InputError("refinement needs moments of order >= 1");
  const std::size_t order = std::min(config.refine_cell_order, mt.max_order() - 1);
  const MeasurementSet j0 = model.anchors.measurements();
  const Layout layout = make_layout(model.scheme, model.K, j0, order);

  RefinementSummary summary;
  Basis<double> current = model.basis;
  HStep step = solve_h(layout, current, mt);
  summary.initial_residual = step.residual;
  Basis<double> best = current;
  double best_residual = step.residual;
  double previous = step.residual;

  // Exact input is a fixed point.
  if (step.residual <= 1e-14) {
    summary.iterations = 1;
  } else {
    for (int it = 1; it <= config.refine_max_iters; ++it) {
      summary.iterations = it;
      solve_alpha(layout, current, step.h, mt);
      try {
        current = normalize_lambda0(current, std::numeric_limits<double>::infinity());
      } catch (const IdentificationError& e) {
        summary.warnings.push_back(std::string("stopped: ") + e.what());
        break;
      }
      step = solve_h(layout, current, mt);
      if (step.residual < best_residual) {
        best = current;
        best_residual = step.residual;
      }
      if (step.residual > previous * (1.0 + 1e-9)) {
        summary.warnings.push_back("stopped: residual increased after lambda0 renormalization; best iterate returned");
        break;
      }
      if (previous - step.residual <= config.refine_tol * previous) break;
      previous = step.residual;
    }
  }

  FittedModel<double> out = model;
  out.config.refine = true;
  if (best_residual < summary.initial_residual) {
    out.basis = best;
    out.basis.source_columns.clear();
    out.lambda1_transform.reset();
    if (config.normalization == Normalization::lambda0_lambda1) {
      const AnchorSet<double> a0 = select_anchors(out.basis, config.anchor_tol);
      const auto eg = conditional_expectation(out.basis, a0, mt, CellIndex::zeros(model.scheme.measurements()),
                                              config.anchor_tol);
      auto [centred, a] = normalize_lambda1(out.basis, eg.expectation);
      out.basis = std::move(centred);
      out.lambda1_transform = std::move(a);
    }
    out.anchors = select_anchors(out.basis, config.anchor_tol);
    const double final_residual =
        main_system_residual(out.basis, mt, out.anchors.measurements(), order).residual;
    if (final_residual < summary.initial_residual) {
      std::vector<CellIndex> cells;
      for (const auto& [cell, cc] : model.conditionals) cells.push_back(cell);
      out.moments = mt;
      std::erase_if(out.diagnostics.warnings, [](const std::string& w) {
        return w.starts_with("variance clamped") || w.starts_with("negative variance");
      });
      collect_conditionals(out, cells, config.anchor_tol);
      out.diagnostics.main_system_residual = final_residual;
      summary.final_residual = final_residual;
      summary.improved = true;
    } else {
      out = model;
      out.config.refine = true;
      summary.warnings.push_back("anchor change undid the improvement; input model returned");
    }
  }
  if (!summary.improved) {
    summary.final_residual = summary.initial_residual;
    out.diagnostics.main_system_residual = summary.initial_residual;
  }
  for (const auto& w : summary.warnings) out.diagnostics.warnings.push_back("refinement " + w);
  out.diagnostics.refinement = std::move(summary);
  return out;
}

#define GOM_INSTANTIATE_ESTIMATOR(T)                                                                            \
  template FittedModel<T> fit<T>(const MomentTable<T>&, const FitConfig&);                                      \
  template CellConditional<T> compute_conditional<T>(const Basis<T>&, const AnchorSet<T>&, const MomentTable<T>&, \
                                                     const CellIndex&, AnchorPolicy, double, double);           \
  template Prediction<T> predict<T>(const FittedModel<T>&, const CellIndex&);

GOM_INSTANTIATE_ESTIMATOR(double)
GOM_INSTANTIATE_ESTIMATOR(Rational)

#undef GOM_INSTANTIATE_ESTIMATOR

}  // namespace gom
