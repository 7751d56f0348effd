#include "gom/tables.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "gom/error.hpp"

namespace gom {

Sample::Sample(Scheme scheme, std::vector<std::vector<int>> rows) : scheme_(std::move(scheme)), rows_(std::move(rows)) {
  if (rows_.empty()) throw InputError("sample must contain at least one record");
  const std::size_t J = scheme_.measurements();
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& r = rows_[i];
    if (r.size() != J) {
      throw InputError("row " + std::to_string(i + 1) + ": expected " + std::to_string(J) + " values, got " +
                       std::to_string(r.size()));
    }
    for (std::size_t j = 0; j < J; ++j) {
      if (r[j] < 0 || r[j] > scheme_.outcomes(j)) {
        throw InputError("row " + std::to_string(i + 1) + ": outcome " + std::to_string(r[j]) + " for measurement " +
                         std::to_string(j + 1) + " outside 1.." + std::to_string(scheme_.outcomes(j)));
      }
      if (r[j] == 0) complete_ = false;
    }
  }
}

std::uint64_t ContingencyTable::count(const CellIndex& cell) const {
  auto it = counts.find(cell);
  if (it == counts.end()) throw InputError("cell " + cell.to_string() + " not tabulated");
  return it->second;
}

ContingencyTable tabulate(const Sample& sample, std::size_t max_order) {
  const Scheme& scheme = sample.scheme();
  const std::size_t J = scheme.measurements();
  if (max_order < 1 || max_order > J) {
    throw InputError("max_order must lie in 1.." + std::to_string(J));
  }

  // Counts keyed by mixed-radix code; denominators keyed by observed-set mask.
  std::unordered_map<std::uint64_t, std::uint64_t> counts;
  std::unordered_map<std::uint64_t, std::uint64_t> pattern_counts;
  std::vector<std::size_t> observed;
  std::vector<int> cell(J, 0);
  for (const auto& row : sample.rows()) {
    observed.clear();
    for (std::size_t j = 0; j < J; ++j)
      if (row[j] != 0) observed.push_back(j);
    const std::size_t n = observed.size();
    // Every subset of the observed measurements with size <= max_order.
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
      if (static_cast<std::size_t>(__builtin_popcountll(mask)) > max_order) continue;
      std::fill(cell.begin(), cell.end(), 0);
      std::uint64_t measurement_mask = 0;
      for (std::size_t b = 0; b < n; ++b) {
        if (mask & (std::uint64_t{1} << b)) {
          cell[observed[b]] = row[observed[b]];
          measurement_mask |= std::uint64_t{1} << observed[b];
        }
      }
      ++counts[encode_cell(scheme, CellIndex(cell))];
      if (!sample.complete()) ++pattern_counts[measurement_mask];
    }
  }

  ContingencyTable ct;
  ct.scheme = scheme;
  ct.N = sample.size();
  ct.max_order = max_order;
  ct.complete_data = sample.complete();
  for (const auto& c : cells_up_to_order(scheme, max_order)) {
    auto it = counts.find(encode_cell(scheme, c));
    ct.counts[c] = it == counts.end() ? 0 : it->second;
    if (ct.complete_data) {
      ct.denominators[c] = ct.N;
    } else {
      std::uint64_t measurement_mask = 0;
      for (std::size_t j = 0; j < J; ++j)
        if (c[j] != 0) measurement_mask |= std::uint64_t{1} << j;
      auto pit = pattern_counts.find(measurement_mask);
      ct.denominators[c] = pit == pattern_counts.end() ? 0 : pit->second;
    }
  }
  return ct;
}

std::string to_string(MomentSource s) {
  return s == MomentSource::exact_oracle ? "exact-oracle" : "empirical-frequency";
}

MomentSource parse_moment_source(const std::string& s) {
  if (s == "exact-oracle") return MomentSource::exact_oracle;
  if (s == "empirical-frequency") return MomentSource::empirical_frequency;
  throw InputError("unknown moment source '" + s + "'");
}

template <typename T>
const T& MomentTable<T>::at(const CellIndex& cell) const {
  auto it = values_.find(cell);
  if (it == values_.end()) throw InputError("missing moment for cell " + cell.to_string());
  return it->second;
}

template <typename T>
std::size_t MomentTable<T>::max_order() const {
  std::size_t m = 0;
  for (const auto& [cell, value] : values_) m = std::max(m, cell.order());
  return m;
}

template <typename T>
MomentTable<T> to_frequencies(const ContingencyTable& ct) {
  if (ct.N < 1) throw InputError("contingency table has no records");
  MomentTable<T> mt(ct.scheme, MomentSource::empirical_frequency);
  for (const auto& [cell, count] : ct.counts) {
    const std::uint64_t den = ct.denominators.at(cell);
    if (den == 0) continue;  // no record observes this pattern
    if constexpr (ScalarTraits<T>::exact) {
      Rational f(mpz_class(std::to_string(count)), mpz_class(std::to_string(den)));
      f.canonicalize();
      mt.set(cell, f);
    } else {
      mt.set(cell, static_cast<double>(count) / static_cast<double>(den));
    }
  }
  return mt;
}

template <typename T>
MomentTable<double> to_double_table(const MomentTable<T>& mt) {
  MomentTable<double> out(mt.scheme(), mt.source());
  for (const auto& [cell, value] : mt.values()) out.set(cell, to_double(value));
  return out;
}

template <typename T>
SummationReport check_summation(const MomentTable<T>& mt, double tol) {
  SummationReport report;
  const Scheme& scheme = mt.scheme();
  const std::size_t J = scheme.measurements();
  const std::size_t top = mt.max_order();

  const CellIndex origin = CellIndex::zeros(J);
  if (mt.contains(origin)) {
    T dev = mt.at(origin) - T(1);
    report.normalization_deviation = to_double(abs_value(dev));
    report.normalization_ok = ScalarTraits<T>::exact && tol == 0.0 ? dev == 0 : report.normalization_deviation <= tol;
  }

  for (const auto& [coarse, value] : mt.values()) {
    const MeasurementSet zeros = coarse.zero_set();
    const std::size_t room = top - coarse.order();
    // Every nonempty subset of the zero set that keeps refinements tabulated.
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << zeros.size()); ++mask) {
      MeasurementSet refined;
      for (std::size_t b = 0; b < zeros.size(); ++b)
        if (mask & (std::uint64_t{1} << b)) refined.push_back(zeros[b]);
      if (refined.size() > room) continue;

      // Sum over all outcome combinations on `refined`.
      T sum(0);
      std::vector<int> cur = coarse.entries();
      for (std::size_t j : refined) cur[j] = 1;
      bool missing = false;
      while (true) {
        CellIndex fine(cur);
        if (!mt.contains(fine)) {
          missing = true;
          break;
        }
        sum += mt.at(fine);
        std::size_t i = refined.size();
        bool done = true;
        while (i > 0) {
          --i;
          if (cur[refined[i]] < scheme.outcomes(refined[i])) {
            ++cur[refined[i]];
            done = false;
            break;
          }
          cur[refined[i]] = 1;
        }
        if (done) break;
      }
      if (missing) continue;
      ++report.checked;
      T diff = value - sum;
      const double dev = to_double(abs_value(diff));
      const bool bad = ScalarTraits<T>::exact && tol == 0.0 ? diff != 0 : dev > tol;
      if (bad) report.violations.push_back({coarse, refined, to_double(value), to_double(sum), dev});
    }
  }
  return report;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      out.push_back(field);
      field.clear();
    } else if (ch != '\r') {
      field.push_back(ch);
    }
  }
  out.push_back(field);
  for (auto& f : out) {
    auto b = f.find_first_not_of(" \t");
    auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

}  // namespace

Sample read_sample_csv(std::istream& in, const std::optional<Scheme>& scheme) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty CSV input");
  std::vector<std::string> names = split_csv_line(line);
  const std::size_t J = names.size();
  if (scheme && scheme->measurements() != J) {
    throw InputError("CSV header has " + std::to_string(J) + " columns; schema declares " +
                     std::to_string(scheme->measurements()));
  }

  std::vector<std::vector<int>> rows;
  std::size_t row_number = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++row_number;
    auto fields = split_csv_line(line);
    if (fields.size() != J) {
      throw InputError("row " + std::to_string(row_number) + ": expected " + std::to_string(J) + " fields, got " +
                       std::to_string(fields.size()));
    }
    std::vector<int> rec(J, 0);
    for (std::size_t j = 0; j < J; ++j) {
      if (fields[j].empty()) continue;
      std::size_t used = 0;
      int code = 0;
      try {
        code = std::stoi(fields[j], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != fields[j].size()) {
        throw InputError("row " + std::to_string(row_number) + ": non-integer code '" + fields[j] + "' in column " +
                         names[j]);
      }
      if (code < 0 || (scheme && code > scheme->outcomes(j))) {
        throw InputError("row " + std::to_string(row_number) + ": outcome " + std::to_string(code) + " in column " +
                         names[j] + " outside 1.." + (scheme ? std::to_string(scheme->outcomes(j)) : "L"));
      }
      rec[j] = code;
    }
    rows.push_back(std::move(rec));
  }
  if (rows.empty()) throw InputError("CSV contains no records");

  if (scheme) {
    Scheme named(scheme->outcome_counts(), names);
    return Sample(std::move(named), std::move(rows));
  }
  std::vector<int> maxima(J, 0);
  for (const auto& r : rows)
    for (std::size_t j = 0; j < J; ++j) maxima[j] = std::max(maxima[j], r[j]);
  return Sample(Scheme(std::move(maxima), std::move(names)), std::move(rows));
}

Sample read_sample_csv_file(const std::string& path, const std::optional<Scheme>& scheme) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return read_sample_csv(in, scheme);
}

void write_sample_csv(std::ostream& out, const Sample& sample) {
  const auto& names = sample.scheme().names();
  for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << names[j];
  out << '\n';
  for (const auto& r : sample.rows()) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j) out << ',';
      if (r[j] != 0) out << r[j];
    }
    out << '\n';
  }
}

template class MomentTable<double>;
template class MomentTable<Rational>;
template MomentTable<double> to_frequencies<double>(const ContingencyTable&);
template MomentTable<Rational> to_frequencies<Rational>(const ContingencyTable&);
template MomentTable<double> to_double_table<double>(const MomentTable<double>&);
template MomentTable<double> to_double_table<Rational>(const MomentTable<Rational>&);
template SummationReport check_summation<double>(const MomentTable<double>&, double);
template SummationReport check_summation<Rational>(const MomentTable<Rational>&, double);

}  // namespace gom
