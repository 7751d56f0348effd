#pragma once

// The two-step procedure: frequencies, moment matrix, rank, completion,
// basis, normalization, then conditional moments cell by cell. Optional
// alternating least-squares refinement of the full system on noisy data.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gom/basis.hpp"
#include "gom/conditional.hpp"
#include "gom/moment_matrix.hpp"
#include "gom/tables.hpp"

namespace gom {

enum class Normalization { lambda0, lambda0_lambda1 };

std::string to_string(Normalization n);
Normalization parse_normalization(const std::string& s);

struct FitConfig {
  std::optional<std::size_t> K_override;
  // Relative singular-value cutoff for the float rank estimate.
  double rank_rel_tol = 1e-8;
  double completion_tol = 1e-8;
  // Relative block-sum disagreement tolerated by lambda0 in float mode.
  double lambda0_tol = 0.05;
  // Relative pivot cutoff for anchor selection in float mode.
  double anchor_tol = 1e-10;
  Normalization normalization = Normalization::lambda0;
  Arithmetic arithmetic = Arithmetic::floating;
  AnchorPolicy anchors = AnchorPolicy::per_cell;
  bool refine = false;
  int refine_max_iters = 50;
  double refine_tol = 1e-10;
  // 0 means J.
  std::size_t max_order = 0;
  // Default min(2, J - 1, max_order - 1).
  std::optional<std::size_t> column_order_cap;
  // Largest cell order in the main-system residual and refinement.
  std::size_t refine_cell_order = 2;
  bool main_residual = true;
  // Basis columns tried first by extract_basis.
  std::vector<CellIndex> preferred_basis_columns;
  std::uint64_t seed = 0;
  // Workers for the per-cell conditional solves. Results do not depend on it.
  std::size_t threads = 1;

  // Throws InputError on negative tolerances or refine_max_iters < 1.
  void validate() const;
};

enum class CellStatus { identified, expectation_only, not_identifiable, zero_mass, moments_unavailable };

std::string to_string(CellStatus s);
CellStatus parse_cell_status(const std::string& s);

template <typename T>
struct CellConditional {
  CellStatus status = CellStatus::identified;
  T mass{0};
  std::vector<T> h;
  std::vector<T> expectation;
  std::optional<std::vector<T>> variance;
  // E(G^{1_a + 1_b} | X = cell).
  std::optional<Matrix<T>> second;
  bool variance_clamped = false;
  bool variance_inconsistent = false;
  std::string anchors;
  std::string variance_route;
  // Why status is not identified.
  std::string note;
};

struct CompletionSummary {
  CellIndex column;
  std::vector<CellIndex> regressors;
  double residual_norm = 0.0;
  bool flagged = false;
};

struct RefinementSummary {
  double initial_residual = 0.0;
  double final_residual = 0.0;
  int iterations = 0;
  bool improved = false;
  std::vector<std::string> warnings;
};

struct Diagnostics {
  std::optional<std::size_t> estimated_rank;
  std::string k_source;
  std::vector<CompletionSummary> completions;
  std::vector<CellIndex> failed_columns;
  SummationReport summation;
  std::optional<double> main_system_residual;
  // max |sum_k E_k - 1| over stored cells.
  double affine_deviation = 0.0;
  std::optional<RefinementSummary> refinement;
  std::vector<std::string> warnings;
};

template <typename T>
struct FittedModel {
  Scheme scheme;
  std::size_t K = 0;
  Basis<T> basis;
  AnchorSet<T> anchors;
  // Lambda1 re-centring, when applied: basis = lambda0 basis * A.
  std::optional<Matrix<T>> lambda1_transform;
  std::map<CellIndex, CellConditional<T>> conditionals;
  Diagnostics diagnostics;
  FitConfig config;
  // Moments the model was fitted on; predict uses them for fresh cells.
  MomentTable<T> moments;
  // Completed moment matrix; not serialized.
  std::optional<CompletedMatrix<T>> completed;
};

using AnyFittedModel = std::variant<FittedModel<double>, FittedModel<Rational>>;

// Runs the pipeline on a moment table of matching arithmetic.
template <typename T>
FittedModel<T> fit(const MomentTable<T>& mt, const FitConfig& config);

// Tabulates to config.max_order and fits in config.arithmetic.
AnyFittedModel fit(const Sample& sample, const FitConfig& config);
// Converts the table to config.arithmetic (rational tables only convert to
// float) and fits.
AnyFittedModel fit_any(const std::variant<MomentTable<double>, MomentTable<Rational>>& mt, const FitConfig& config);

// Conditionals at one cell with the model's anchors and policy. The status
// reports what could be identified; nothing throws for unidentifiable cells.
template <typename T>
CellConditional<T> compute_conditional(const Basis<T>& basis, const AnchorSet<T>& anchors, const MomentTable<T>& mt,
                                       const CellIndex& cell, AnchorPolicy policy, double anchor_tol,
                                       double clamp_tol = 1e-9);

template <typename T>
struct Prediction {
  CellIndex cell;
  T mass{0};
  std::vector<T> expectation;
  std::optional<std::vector<T>> variance;
  std::vector<T> beta;
  bool stored = false;
};

// Stored or freshly computed conditionals plus reconstruct_beta. Throws
// PredictionError naming J0 when the cell is not identifiable.
template <typename T>
Prediction<T> predict(const FittedModel<T>& model, const CellIndex& cell);

// Least-squares residual of the frequency system over cells of order
// <= cell_order whose zero set contains the anchor measurements, minimized
// over the h unknowns with the basis fixed.
struct MainSystemFit {
  double residual = 0.0;
  std::size_t equations = 0;
  std::size_t unknowns = 0;
};

MainSystemFit main_system_residual(const Basis<double>& basis, const MomentTable<double>& mt,
                                   const MeasurementSet& anchor_measurements, std::size_t cell_order);

// Alternating least squares on the frequency system: h given the basis,
// then each basis row given h, then lambda0 renormalization. Returns the
// best iterate (possibly the input), so the residual never increases.
FittedModel<double> refine_joint_ls(const FittedModel<double>& model, const MomentTable<double>& mt,
                                    const FitConfig& config);

}  // namespace gom
