#pragma once

// Raw categorical records, contingency tables over all marginal cells, and
// the moment (frequency) tables derived from them.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gom/indexing.hpp"
#include "gom/scalar.hpp"

namespace gom {

// N individuals, J outcome codes each; code 0 means "not observed".
class Sample {
 public:
  Sample(Scheme scheme, std::vector<std::vector<int>> rows);

  const Scheme& scheme() const { return scheme_; }
  const std::vector<std::vector<int>>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  bool complete() const { return complete_; }

 private:
  Scheme scheme_;
  std::vector<std::vector<int>> rows_;
  bool complete_ = true;
};

struct ContingencyTable {
  Scheme scheme;
  // N_cell for every cell with order <= max_order (zeros included).
  std::map<CellIndex, std::uint64_t> counts;
  // Records observing every measurement the cell observes. Equals N for
  // every cell when the sample has no missing values.
  std::map<CellIndex, std::uint64_t> denominators;
  std::uint64_t N = 0;
  std::size_t max_order = 0;
  bool complete_data = true;

  std::uint64_t count(const CellIndex& cell) const;
};

ContingencyTable tabulate(const Sample& sample, std::size_t max_order);

enum class MomentSource { empirical_frequency, exact_oracle };

std::string to_string(MomentSource s);
MomentSource parse_moment_source(const std::string& s);

// Map from cells to moment values (frequencies or exact moments).
template <typename T>
class MomentTable {
 public:
  MomentTable() = default;
  MomentTable(Scheme scheme, MomentSource source) : scheme_(std::move(scheme)), source_(source) {}

  const Scheme& scheme() const { return scheme_; }
  MomentSource source() const { return source_; }
  const std::map<CellIndex, T>& values() const { return values_; }

  void set(const CellIndex& cell, T value) { values_[cell] = std::move(value); }
  bool contains(const CellIndex& cell) const { return values_.count(cell) != 0; }
  // Throws InputError naming the cell when absent.
  const T& at(const CellIndex& cell) const;
  // Largest tabulated order.
  std::size_t max_order() const;

 private:
  Scheme scheme_;
  MomentSource source_ = MomentSource::empirical_frequency;
  std::map<CellIndex, T> values_;
};

// count / per-cell denominator; exact in Rational mode.
template <typename T>
MomentTable<T> to_frequencies(const ContingencyTable& ct);

template <typename T>
MomentTable<double> to_double_table(const MomentTable<T>& mt);

// A failed summation identity: the coarse cell's value against the sum of
// its refinements over `refined` (the extra observed measurements).
struct SummationViolation {
  CellIndex coarse;
  MeasurementSet refined;
  double expected = 0.0;
  double sum = 0.0;
  double deviation = 0.0;
};

struct SummationReport {
  // |M_(0,...,0) - 1|, reported separately from the refinement identities.
  double normalization_deviation = 0.0;
  bool normalization_ok = true;
  std::vector<SummationViolation> violations;
  std::size_t checked = 0;

  bool ok() const { return normalization_ok && violations.empty(); }
};

// Checks every identity M_coarse = sum of refinements among tabulated
// orders. Exact comparison for Rational (tol ignored when tol == 0).
template <typename T>
SummationReport check_summation(const MomentTable<T>& mt, double tol);

// CSV ingest: header row, one record per line, codes 1..L_j, empty or 0 for
// missing. When `scheme` is absent, L_j is the observed maximum per column.
Sample read_sample_csv(std::istream& in, const std::optional<Scheme>& scheme);
Sample read_sample_csv_file(const std::string& path, const std::optional<Scheme>& scheme);
void write_sample_csv(std::ostream& out, const Sample& sample);

}  // namespace gom
