#include "gom/indexing.hpp"

#include <algorithm>
#include <limits>

#include "gom/error.hpp"

namespace gom {

Scheme::Scheme(std::vector<int> outcomes, std::vector<std::string> names)
    : outcomes_(std::move(outcomes)), names_(std::move(names)) {
  if (outcomes_.empty()) throw InputError("scheme needs at least one measurement");
  if (!names_.empty() && names_.size() != outcomes_.size()) {
    throw InputError("scheme has " + std::to_string(outcomes_.size()) + " measurements but " +
                     std::to_string(names_.size()) + " names");
  }
  offsets_.reserve(outcomes_.size());
  for (std::size_t j = 0; j < outcomes_.size(); ++j) {
    if (outcomes_[j] < 2) {
      throw InputError("measurement " + std::to_string(j + 1) + " has " + std::to_string(outcomes_[j]) +
                       " outcomes; at least 2 are required");
    }
    offsets_.push_back(total_);
    total_ += static_cast<std::size_t>(outcomes_[j]);
  }
  if (names_.empty()) {
    for (std::size_t j = 0; j < outcomes_.size(); ++j) names_.push_back("X" + std::to_string(j + 1));
  }
}

std::uint64_t Scheme::outcome_product() const {
  std::uint64_t p = 1;
  for (int l : outcomes_) p *= static_cast<std::uint64_t>(l);
  return p;
}

std::uint64_t Scheme::cell_count() const {
  std::uint64_t p = 1;
  for (int l : outcomes_) {
    if (p > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(l + 1)) {
      throw InputError("cell index space overflows 64 bits");
    }
    p *= static_cast<std::uint64_t>(l + 1);
  }
  return p;
}

std::pair<std::size_t, int> Scheme::row_pair(std::size_t row) const {
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(), row);
  std::size_t j = static_cast<std::size_t>(std::distance(offsets_.begin(), it)) - 1;
  return {j, static_cast<int>(row - offsets_[j]) + 1};
}

std::string Scheme::row_label(std::size_t row) const {
  auto [j, l] = row_pair(row);
  return "(" + std::to_string(j + 1) + "," + std::to_string(l) + ")";
}

std::size_t CellIndex::order() const {
  return static_cast<std::size_t>(std::count_if(entries_.begin(), entries_.end(), [](int e) { return e != 0; }));
}

MeasurementSet CellIndex::zero_set() const {
  MeasurementSet out;
  for (std::size_t j = 0; j < entries_.size(); ++j)
    if (entries_[j] == 0) out.push_back(j);
  return out;
}

bool CellIndex::is_marginal_on(const MeasurementSet& measurements) const {
  return std::all_of(measurements.begin(), measurements.end(), [&](std::size_t j) { return entries_[j] == 0; });
}

CellIndex CellIndex::with(std::size_t j, int l) const {
  CellIndex out = *this;
  out.entries_[j] = l;
  return out;
}

std::string CellIndex::to_string() const {
  std::string s = "(";
  for (std::size_t j = 0; j < entries_.size(); ++j) {
    if (j) s += ",";
    s += std::to_string(entries_[j]);
  }
  return s + ")";
}

void validate_cell(const Scheme& scheme, const CellIndex& cell) {
  if (cell.size() != scheme.measurements()) {
    throw InputError("cell " + cell.to_string() + " has " + std::to_string(cell.size()) + " coordinates; scheme has " +
                     std::to_string(scheme.measurements()));
  }
  for (std::size_t j = 0; j < cell.size(); ++j) {
    if (cell[j] < 0 || cell[j] > scheme.outcomes(j)) {
      throw InputError("cell " + cell.to_string() + ": coordinate " + std::to_string(j + 1) + " outside [0.." +
                       std::to_string(scheme.outcomes(j)) + "]");
    }
  }
}

std::vector<CellIndex> enumerate_cells(const Scheme& scheme, const MeasurementSet& zeros) {
  const std::size_t J = scheme.measurements();
  std::vector<bool> is_zero(J, false);
  for (std::size_t j : zeros) {
    if (j >= J) throw InputError("measurement index " + std::to_string(j + 1) + " out of range");
    is_zero[j] = true;
  }
  MeasurementSet free;
  std::vector<int> cur(J, 0);
  for (std::size_t j = 0; j < J; ++j) {
    if (!is_zero[j]) {
      free.push_back(j);
      cur[j] = 1;
    }
  }
  std::vector<CellIndex> out;
  while (true) {
    out.emplace_back(cur);
    // Odometer over the observed coordinates, last one fastest.
    std::size_t i = free.size();
    while (true) {
      if (i == 0) return out;
      --i;
      const std::size_t j = free[i];
      if (cur[j] < scheme.outcomes(j)) {
        ++cur[j];
        break;
      }
      cur[j] = 1;
    }
  }
}

std::vector<CellIndex> cells_up_to_order(const Scheme& scheme, std::size_t max_order) {
  const std::size_t J = scheme.measurements();
  std::vector<CellIndex> out;
  std::vector<int> cur(J, 0);
  while (true) {
    std::size_t order = static_cast<std::size_t>(std::count_if(cur.begin(), cur.end(), [](int e) { return e != 0; }));
    if (order <= max_order) out.emplace_back(cur);
    std::size_t j = J;
    while (true) {
      if (j == 0) return out;
      --j;
      if (cur[j] < scheme.outcomes(j)) {
        ++cur[j];
        break;
      }
      cur[j] = 0;
    }
  }
}

bool refines(const CellIndex& fine, const CellIndex& coarse) {
  if (fine.size() != coarse.size()) return false;
  for (std::size_t j = 0; j < fine.size(); ++j) {
    if (coarse[j] != 0 && fine[j] != coarse[j]) return false;
  }
  return true;
}

CellIndex project(const CellIndex& cell, const MeasurementSet& extra_zeros) {
  std::vector<int> e = cell.entries();
  for (std::size_t j : extra_zeros) e.at(j) = 0;
  return CellIndex(std::move(e));
}

PowerIndex PowerIndex::unit(std::size_t dims, std::size_t k, int power) {
  std::vector<int> v(dims, 0);
  v.at(k) = power;
  return PowerIndex(std::move(v));
}

int PowerIndex::order() const {
  int s = 0;
  for (int e : v_) s += e;
  return s;
}

PowerIndex PowerIndex::plus_unit(std::size_t k) const {
  PowerIndex out = *this;
  ++out.v_.at(k);
  return out;
}

std::string PowerIndex::to_string() const {
  std::string s = "(";
  for (std::size_t k = 0; k < v_.size(); ++k) {
    if (k) s += ",";
    s += std::to_string(v_[k]);
  }
  return s + ")";
}

namespace {

void compositions(int remaining, std::size_t pos, std::vector<int>& cur, std::vector<PowerIndex>& out) {
  if (pos + 1 == cur.size()) {
    cur[pos] = remaining;
    out.emplace_back(cur);
    return;
  }
  for (int e = 0; e <= remaining; ++e) {
    cur[pos] = e;
    compositions(remaining - e, pos + 1, cur, out);
  }
}

}  // namespace

std::vector<PowerIndex> v_indices(int order, std::size_t dims) {
  if (order < 0) throw InputError("power-index order must be nonnegative");
  if (dims == 0) throw InputError("power-index dimension must be positive");
  std::vector<PowerIndex> out;
  std::vector<int> cur(dims, 0);
  compositions(order, 0, cur, out);
  return out;
}

std::uint64_t v_index_count(int order, std::size_t dims) {
  // C(order + dims - 1, dims - 1), built incrementally to stay exact.
  std::uint64_t c = 1;
  for (std::uint64_t i = 1; i < dims; ++i) c = c * (static_cast<std::uint64_t>(order) + i) / i;
  return c;
}

std::uint64_t multinomial_C(const PowerIndex& v) {
  // Product of binomials C(n_k, v_k) with n_k the running total.
  std::uint64_t c = 1;
  std::uint64_t n = 0;
  for (int e : v.exponents()) {
    for (int i = 1; i <= e; ++i) {
      ++n;
      c = c * n / static_cast<std::uint64_t>(i);
    }
  }
  return c;
}

std::uint64_t encode_cell(const Scheme& scheme, const CellIndex& cell) {
  std::uint64_t code = 0;
  for (std::size_t j = 0; j < cell.size(); ++j) {
    code = code * static_cast<std::uint64_t>(scheme.outcomes(j) + 1) + static_cast<std::uint64_t>(cell[j]);
  }
  return code;
}

CellIndex decode_cell(const Scheme& scheme, std::uint64_t code) {
  const std::size_t J = scheme.measurements();
  std::vector<int> e(J, 0);
  for (std::size_t j = J; j > 0; --j) {
    const auto radix = static_cast<std::uint64_t>(scheme.outcomes(j - 1) + 1);
    e[j - 1] = static_cast<int>(code % radix);
    code /= radix;
  }
  return CellIndex(std::move(e));
}

}  // namespace gom
