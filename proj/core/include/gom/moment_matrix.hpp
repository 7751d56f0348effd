#pragma once

// The partially known moment matrix: one row per (j, l) pair and one column
// per marginal cell; entry ((j, l), cell) is M_{cell + l at j} when the cell
// leaves measurement j unobserved and unknown otherwise. Completion fills the
// unknown entries by regressing each incomplete column on columns that are
// known where it is not, which yields a basis of the latent support.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gom/basis.hpp"
#include "gom/dense.hpp"
#include "gom/tables.hpp"

namespace gom {

template <typename T>
class MomentMatrix {
 public:
  MomentMatrix(Scheme scheme, std::vector<CellIndex> columns);

  const Scheme& scheme() const { return scheme_; }
  std::size_t rows() const { return scheme_.total_outcomes(); }
  std::size_t cols() const { return columns_.size(); }
  const std::vector<CellIndex>& columns() const { return columns_; }
  const CellIndex& column_cell(std::size_t c) const { return columns_[c]; }
  // Throws InputError when the cell is not a column.
  std::size_t column_of(const CellIndex& cell) const;

  const std::optional<T>& entry(std::size_t r, std::size_t c) const { return entries_[r * cols() + c]; }
  bool known(std::size_t r, std::size_t c) const { return entries_[r * cols() + c].has_value(); }
  void set(std::size_t r, std::size_t c, T value) { entries_[r * cols() + c] = std::move(value); }

  std::size_t known_count(std::size_t c) const;
  bool column_complete(std::size_t c) const { return known_count(c) == rows(); }
  std::vector<std::size_t> known_rows(std::size_t c) const;
  std::vector<std::size_t> unknown_rows(std::size_t c) const;
  // Column values; every entry must be known.
  std::vector<T> column_values(std::size_t c) const;

 private:
  Scheme scheme_;
  std::vector<CellIndex> columns_;
  std::vector<std::optional<T>> entries_;
};

// Columns: every marginal cell (at least one zero) with at most
// column_order_cap observed coordinates, lexicographic. Requires the table
// to hold every moment the known pattern references.
template <typename T>
MomentMatrix<T> build_moment_matrix(const MomentTable<T>& mt, std::size_t column_order_cap);

// Extended rank: the size of the largest nonsingular all-known minor, capped
// at k_cap. A minor is known iff no column in it observes a measurement
// owning one of its rows, so the search runs over measurement subsets S and
// takes the rank of (rows of S) x (columns marginal on S).
template <typename T>
std::size_t estimate_rank(const MomentMatrix<T>& m, double rel_tol, std::size_t k_cap);

template <typename T>
struct ColumnCompletion {
  std::size_t column = 0;
  std::vector<std::size_t> regressors;
  std::vector<T> coefficients;
  // Rows on which the coefficients were fitted.
  std::vector<std::size_t> fit_rows;
  // Rows filled from the regression.
  std::vector<std::size_t> filled_rows;
  double residual_norm = 0.0;
  bool residual_flagged = false;
};

struct CompletionOptions {
  double rel_tol = 1e-8;
  // Residual flag threshold factor: flagged above factor * rel_tol * ||column||.
  double residual_factor = 10.0;
};

template <typename T>
struct CompletedMatrix {
  MomentMatrix<T> base;
  // base with fills applied.
  MomentMatrix<T> filled;
  std::vector<ColumnCompletion<T>> completions;
  // Columns left incomplete (no rank-K regressor set found).
  std::vector<std::size_t> failed;
  // Complete columns after filling, in column order.
  std::vector<std::size_t> kappa;
  std::size_t K = 0;

  const ColumnCompletion<T>* completion_for(std::size_t column) const;
};

// Regresses `target` on `regressors` over the rows where all of them are
// known, then fills target's unknown rows. Returns nullopt when a regressor
// is unknown on one of those rows or the regression rows lack full column
// rank. `state` is updated in place on success.
template <typename T>
std::optional<ColumnCompletion<T>> complete_column(MomentMatrix<T>& state, std::size_t target,
                                                   const std::vector<std::size_t>& regressors,
                                                   const CompletionOptions& opts = {});

// Processes incomplete columns by decreasing known-entry count (ties in
// column order), repeating passes while progress is made. Throws
// IdentificationError when the complete columns end with rank < K.
template <typename T>
CompletedMatrix<T> complete(const MomentMatrix<T>& m, std::size_t K, const CompletionOptions& opts = {});

// First K independent complete columns, trying `preferred` cells first and
// then kappa in column order.
template <typename T>
Basis<T> extract_basis(const CompletedMatrix<T>& cm, const std::vector<CellIndex>& preferred = {},
                       double rel_tol = 1e-8);

// Divides each column by its mean block sum, then shifts each block so it
// sums to exactly 1. Throws IdentificationError when a column's block sums
// disagree by more than tol (relative); tol 0 in rational mode demands
// exact agreement.
template <typename T>
Basis<T> normalize_lambda0(const Basis<T>& b, double tol);

// Re-centres a lambda0 basis so that the unconditional expectation becomes
// (1/K, ..., 1/K) by translating within the affine plane. Returns the new
// basis and A with Lambda' = Lambda A; A has unit column sums.
template <typename T>
std::pair<Basis<T>, Matrix<T>> normalize_lambda1(const Basis<T>& b, const std::vector<T>& eg);

// CSV dump: header "row,<cell>,...", row labels "(j,l)", "?" for unknown,
// "[v]" for filled entries.
template <typename T>
std::string moment_matrix_csv(const CompletedMatrix<T>& cm);

}  // namespace gom
