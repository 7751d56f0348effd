#pragma once

// Index families over a measurement design: contingency-table cells (with 0
// marking an unobserved measurement), projections and refinements between
// cells, and the power indices that enumerate mixed moments of the latent
// vector.
//
// Measurements are numbered from 0 in this API; outcome codes run 1..L_j.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace gom {

// Measurement design: J measurements, measurement j has L_j >= 2 outcomes.
class Scheme {
 public:
  Scheme() = default;
  explicit Scheme(std::vector<int> outcomes, std::vector<std::string> names = {});

  std::size_t measurements() const { return outcomes_.size(); }
  int outcomes(std::size_t j) const { return outcomes_[j]; }
  const std::vector<int>& outcome_counts() const { return outcomes_; }
  const std::vector<std::string>& names() const { return names_; }

  // |L| = sum_j L_j, the number of (j, l) rows.
  std::size_t total_outcomes() const { return total_; }
  // |L*| = prod_j L_j, the number of fully observed cells.
  std::uint64_t outcome_product() const;
  // prod_j (L_j + 1), the size of the full cell index set.
  std::uint64_t cell_count() const;

  // Position of row (j, l), l in 1..L_j, in the stacked |L| vector.
  std::size_t row_index(std::size_t j, int l) const { return offsets_[j] + static_cast<std::size_t>(l - 1); }
  std::size_t row_offset(std::size_t j) const { return offsets_[j]; }
  // Inverse of row_index.
  std::pair<std::size_t, int> row_pair(std::size_t row) const;
  // "(j,l)" with 1-based j.
  std::string row_label(std::size_t row) const;

  friend bool operator==(const Scheme& a, const Scheme& b) { return a.outcomes_ == b.outcomes_; }

 private:
  std::vector<int> outcomes_;
  std::vector<std::string> names_;
  std::vector<std::size_t> offsets_;
  std::size_t total_ = 0;
};

using MeasurementSet = std::vector<std::size_t>;

// A contingency-table cell. Ordered lexicographically with coordinate 0 most
// significant.
class CellIndex {
 public:
  CellIndex() = default;
  explicit CellIndex(std::vector<int> entries) : entries_(std::move(entries)) {}
  static CellIndex zeros(std::size_t j) { return CellIndex(std::vector<int>(j, 0)); }

  std::size_t size() const { return entries_.size(); }
  int operator[](std::size_t j) const { return entries_[j]; }
  const std::vector<int>& entries() const { return entries_; }

  // Number of observed (nonzero) coordinates.
  std::size_t order() const;
  MeasurementSet zero_set() const;
  bool is_zero_at(std::size_t j) const { return entries_[j] == 0; }
  bool is_marginal_on(const MeasurementSet& measurements) const;

  // Copy with coordinate j set to l.
  CellIndex with(std::size_t j, int l) const;

  // "(1,0,2)".
  std::string to_string() const;

  friend auto operator<=>(const CellIndex&, const CellIndex&) = default;

 private:
  std::vector<int> entries_;
};

void validate_cell(const Scheme& scheme, const CellIndex& cell);

// Cells whose zero set is exactly `zeros`, in lexicographic order.
std::vector<CellIndex> enumerate_cells(const Scheme& scheme, const MeasurementSet& zeros);

// All cells with at most max_order observed coordinates, lexicographic.
std::vector<CellIndex> cells_up_to_order(const Scheme& scheme, std::size_t max_order);

// True iff fine agrees with coarse on every coordinate coarse observes and
// fine's zero set is contained in coarse's.
bool refines(const CellIndex& fine, const CellIndex& coarse);

// Zeroes the coordinates in extra_zeros.
CellIndex project(const CellIndex& cell, const MeasurementSet& extra_zeros);

// Exponent vector of a mixed moment of the latent vector.
class PowerIndex {
 public:
  PowerIndex() = default;
  explicit PowerIndex(std::vector<int> exponents) : v_(std::move(exponents)) {}
  // e_k scaled by `power`.
  static PowerIndex unit(std::size_t dims, std::size_t k, int power = 1);

  std::size_t dims() const { return v_.size(); }
  int operator[](std::size_t k) const { return v_[k]; }
  const std::vector<int>& exponents() const { return v_; }
  int order() const;
  PowerIndex plus_unit(std::size_t k) const;
  std::string to_string() const;

  friend auto operator<=>(const PowerIndex&, const PowerIndex&) = default;

 private:
  std::vector<int> v_;
};

// All exponent vectors of length dims summing to order, lexicographic.
std::vector<PowerIndex> v_indices(int order, std::size_t dims);

// Stars-and-bars count (order + dims - 1)! / (order! (dims - 1)!).
std::uint64_t v_index_count(int order, std::size_t dims);

// Multinomial coefficient (sum v)! / prod v_k!.
std::uint64_t multinomial_C(const PowerIndex& v);

// Mixed-radix code of a cell, 0 .. cell_count() - 1.
std::uint64_t encode_cell(const Scheme& scheme, const CellIndex& cell);
CellIndex decode_cell(const Scheme& scheme, std::uint64_t code);

}  // namespace gom
