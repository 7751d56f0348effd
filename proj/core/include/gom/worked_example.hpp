#pragma once

// The three-point reference model on the (2,2,2) design and its published
// intermediate values, replayed end to end in exact arithmetic.

#include <string>
#include <vector>

#include "gom/basis.hpp"
#include "gom/oracle.hpp"

namespace gom {

// Support points b1 = (1, 0, 1/3, 2/3, 4/5, 1/5), b2 = (1/9, 8/9, 3/5, 2/5,
// 1/4, 3/4) and their midpoint, weight 1/3 each.
DiscreteLatentModel<Rational> worked_example_model();

// The lambda0 basis obtained from columns (0,0,0) and (0,0,2).
Basis<Rational> worked_example_alpha_basis();

// {b1, b2} as a lambda0 basis.
Basis<Rational> worked_example_point_basis();

struct ReferenceRow {
  CellIndex cell;
  double e1 = 0.0;
  double sd1 = 0.0;
  double e2 = 0.0;
  double sd2 = 0.0;
};

// Published 4-decimal conditionals in the alpha basis (table 1) and the
// point basis (table 2).
std::vector<ReferenceRow> worked_example_table(int table);

struct CheckResult {
  std::string group;
  std::string name;
  std::string expected;
  std::string computed;
  bool pass = false;
  std::string note;
};

struct VerificationReport {
  std::vector<CheckResult> checks;

  bool passed() const;
  std::size_t failures() const;
  std::string to_text() const;
  std::string to_json() const;
};

// Moments, completion replay, basis, first and second conditional moments,
// both tables and reconstruct_beta invariance.
VerificationReport verify_worked_example();

}  // namespace gom
