#include "gom/worked_example.hpp"

#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <sstream>

#include "gom/conditional.hpp"
#include "gom/error.hpp"
#include "gom/estimator.hpp"
#include "gom/moment_matrix.hpp"

namespace gom {

namespace {

Rational q(const char* s) { return ScalarTraits<Rational>::parse(s); }

std::vector<Rational> qs(std::initializer_list<const char*> items) {
  std::vector<Rational> out;
  for (const char* s : items) out.push_back(q(s));
  return out;
}

const Scheme& design() {
  static const Scheme s({2, 2, 2});
  return s;
}

std::string fixed4(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", x);
  return buf;
}

class Recorder {
 public:
  explicit Recorder(VerificationReport& r) : report_(r) {}

  void exact(const std::string& group, const std::string& name, const Rational& expected, const Rational& computed,
             const std::string& note = {}) {
    report_.checks.push_back({group, name, scalar_to_string(expected), scalar_to_string(computed),
                              expected == computed, note});
  }

  void approx(const std::string& group, const std::string& name, double expected, double computed, double tol) {
    report_.checks.push_back({group, name, fixed4(expected), fixed4(computed) + " (" + std::to_string(computed) + ")",
                              std::fabs(expected - computed) <= tol, {}});
  }

  void flag(const std::string& group, const std::string& name, bool ok, const std::string& detail) {
    report_.checks.push_back({group, name, "true", ok ? "true" : "false", ok, detail});
  }

 private:
  VerificationReport& report_;
};

AnchorSet<Rational> anchors_on_rows(const Basis<Rational>& b, const std::vector<AnchorPair>& pairs) {
  AnchorSet<Rational> a;
  a.pairs = pairs;
  a.anchor_matrix = Matrix<Rational>(pairs.size(), b.K());
  for (std::size_t i = 0; i < pairs.size(); ++i)
    for (std::size_t k = 0; k < b.K(); ++k) a.anchor_matrix(i, k) = b.at(pairs[i].j, pairs[i].l, k);
  return a;
}

constexpr double kTableTol = 5e-5;

}  // namespace

DiscreteLatentModel<Rational> worked_example_model() {
  auto b1 = qs({"1", "0", "1/3", "2/3", "4/5", "1/5"});
  auto b2 = qs({"1/9", "8/9", "3/5", "2/5", "1/4", "3/4"});
  std::vector<Rational> b3(b1.size());
  for (std::size_t i = 0; i < b1.size(); ++i) b3[i] = (b1[i] + b2[i]) / 2;
  const Rational third = q("1/3");
  return DiscreteLatentModel<Rational>(design(), {b1, b2, b3}, {third, third, third});
}

Basis<Rational> worked_example_alpha_basis() {
  Basis<Rational> b;
  b.scheme = design();
  b.columns = Matrix<Rational>::from_columns({qs({"5/9", "4/9", "7/15", "8/15", "21/40", "19/40"}),
                                              qs({"197/513", "316/513", "443/855", "412/855", "191/456", "265/456"})});
  b.source_columns = {CellIndex({0, 0, 0}), CellIndex({0, 0, 2})};
  b.lambda0 = true;
  return b;
}

Basis<Rational> worked_example_point_basis() {
  const auto model = worked_example_model();
  Basis<Rational> b;
  b.scheme = design();
  b.columns = Matrix<Rational>::from_columns({model.points()[0], model.points()[1]});
  b.lambda0 = true;
  return b;
}

std::vector<ReferenceRow> worked_example_table(int table) {
  if (table == 1) {
    return {{CellIndex({1, 0, 0}), 2.3818, 1.6018, -1.3818, 1.6018},
            {CellIndex({2, 0, 0}), -0.7273, 1.2214, 1.7273, 1.2214},
            {CellIndex({0, 1, 0}), 0.5065, 2.0571, 0.4935, 2.0571},
            {CellIndex({0, 2, 0}), 1.4318, 2.0709, -0.4318, 2.0709},
            {CellIndex({0, 0, 1}), 1.9048, 1.9122, -0.9048, 1.9122},
            {CellIndex({0, 0, 2}), 0.0000, 1.8642, 1.0000, 1.8642}};
  }
  if (table == 2) {
    return {{CellIndex({1, 0, 0}), 0.7667, 0.3091, 0.2333, 0.3091},
            {CellIndex({2, 0, 0}), 0.1667, 0.2357, 0.8333, 0.2357},
            {CellIndex({0, 1, 0}), 0.4048, 0.3970, 0.5952, 0.3970},
            {CellIndex({0, 2, 0}), 0.5833, 0.3997, 0.4167, 0.3997},
            {CellIndex({0, 0, 1}), 0.6746, 0.3690, 0.3254, 0.3690},
            {CellIndex({0, 0, 2}), 0.3070, 0.3598, 0.6930, 0.3598}};
  }
  throw InputError("reference table must be 1 or 2");
}

bool VerificationReport::passed() const { return failures() == 0; }

std::size_t VerificationReport::failures() const {
  std::size_t n = 0;
  for (const auto& c : checks) n += c.pass ? 0 : 1;
  return n;
}

std::string VerificationReport::to_text() const {
  std::ostringstream out;
  for (const auto& c : checks) {
    out << (c.pass ? "PASS " : "FAIL ") << c.group << ": " << c.name << "  expected " << c.expected << ", computed "
        << c.computed;
    if (!c.note.empty()) out << "  [" << c.note << "]";
    out << '\n';
  }
  out << (passed() ? "all " + std::to_string(checks.size()) + " checks passed"
                   : std::to_string(failures()) + " of " + std::to_string(checks.size()) + " checks failed")
      << '\n';
  return out.str();
}

std::string VerificationReport::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = "gom-verification";
  j["format_version"] = 1;
  j["passed"] = passed();
  j["failures"] = failures();
  auto arr = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    nlohmann::ordered_json e;
    e["group"] = c.group;
    e["name"] = c.name;
    e["expected"] = c.expected;
    e["computed"] = c.computed;
    e["pass"] = c.pass;
    if (!c.note.empty()) e["note"] = c.note;
    arr.push_back(e);
  }
  j["checks"] = arr;
  return j.dump(2) + "\n";
}

VerificationReport verify_worked_example() {
  VerificationReport report;
  Recorder rec(report);
  const Scheme& s = design();
  const auto model = worked_example_model();
  const auto mt = exact_ell_moments(model, 3);

  // Displayed moment-matrix entries.
  const std::vector<std::pair<std::vector<int>, const char*>> moments = {
      {{1, 0, 0}, "5/9"},       {{2, 0, 0}, "4/9"},       {{0, 1, 0}, "7/15"},      {{0, 2, 0}, "8/15"},
      {{0, 0, 1}, "21/40"},     {{0, 0, 2}, "19/40"},     {{1, 1, 0}, "89/405"},    {{1, 2, 0}, "136/405"},
      {{2, 1, 0}, "20/81"},     {{2, 2, 0}, "16/81"},     {{1, 0, 1}, "403/1080"},  {{1, 0, 2}, "197/1080"},
      {{2, 0, 1}, "41/270"},    {{2, 0, 2}, "79/270"},    {{0, 1, 1}, "397/1800"},  {{0, 1, 2}, "443/1800"},
      {{0, 2, 1}, "137/450"},   {{0, 2, 2}, "103/450"},   {{1, 1, 1}, "151/1080"},  {{1, 1, 2}, "259/3240"}};
  for (const auto& [cell, value] : moments) {
    CellIndex c(cell);
    rec.exact("moments", "M" + c.to_string(), q(value), mt.at(c));
  }

  const auto mm = build_moment_matrix(mt, 2);
  const std::size_t rank = estimate_rank(mm, 0.0, 4);
  rec.flag("moments", "extended rank is 2", rank == 2, "rank " + std::to_string(rank));

  // Completion of (0,0,2) from (0,0,0) and (1,0,0).
  const std::size_t target = mm.column_of(CellIndex({0, 0, 2}));
  const std::size_t c000 = mm.column_of(CellIndex({0, 0, 0}));
  const std::size_t c100 = mm.column_of(CellIndex({1, 0, 0}));
  MomentMatrix<Rational> state = mm;
  auto replay = complete_column(state, target, {c000, c100}, CompletionOptions{0.0, 10.0});
  const std::size_t r31 = s.row_index(2, 1);
  const std::size_t r32 = s.row_index(2, 2);
  if (!replay) {
    rec.flag("completion", "column (0,0,2) regression on (0,0,0), (1,0,0)", false, "regression failed");
  } else {
    rec.exact("completion", "coefficient x on (0,0,0)", q("131/160"), replay->coefficients[0]);
    rec.exact("completion", "coefficient y on (1,0,0)", q("-99/160"), replay->coefficients[1]);
    const std::vector<std::size_t> rows34 = {s.row_index(1, 1), s.row_index(1, 2)};
    rec.flag("completion", "fitted on rows (2,1), (2,2)", replay->fit_rows == rows34, "");
    rec.exact("completion", "fill (3,1) of (0,0,2)", q("191/960"), *state.entry(r31, target));
    rec.exact("completion", "fill (3,2) of (0,0,2)", q("53/192"), *state.entry(r32, target));
  }
  const auto cm = complete(mm, 2, CompletionOptions{0.0, 10.0});
  rec.exact("completion", "automatic fill (3,1) of (0,0,2)", q("191/960"), *cm.filled.entry(r31, target));
  rec.exact("completion", "automatic fill (3,2) of (0,0,2)", q("53/192"), *cm.filled.entry(r32, target));

  const Basis<Rational> alpha = worked_example_alpha_basis();
  const Basis<Rational> basis =
      normalize_lambda0(extract_basis(cm, {CellIndex({0, 0, 0}), CellIndex({0, 0, 2})}, 0.0), 0.0);
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t r = 0; r < s.total_outcomes(); ++r)
      rec.exact("basis", "alpha" + std::to_string(k + 1) + s.row_label(r), alpha.columns(r, k), basis.columns(r, k));

  // First and second conditional moments at (1,0,0) with anchors (2,1), (2,2).
  const CellIndex x100({1, 0, 0});
  const auto m2 = anchors_on_rows(basis, {{1, 1}, {1, 2}});
  const auto first = conditional_expectation(basis, m2, mt, x100);
  rec.exact("first moments", "h(1,0) at (1,0,0)", q("131/99"), first.h[0]);
  rec.exact("first moments", "h(0,1) at (1,0,0)", q("-76/99"), first.h[1]);
  rec.exact("first moments", "E(G1 | (1,0,0))", q("131/55"), first.expectation[0]);
  rec.exact("first moments", "E(G2 | (1,0,0))", q("-76/55"), first.expectation[1]);
  const auto f101 = conditional_expectation(basis, m2, mt, CellIndex({1, 0, 1}));
  const auto f102 = conditional_expectation(basis, m2, mt, CellIndex({1, 0, 2}));
  rec.exact("first moments", "h(1,0) at (1,0,1)", q("3089/2970"), f101.h[0]);
  rec.exact("first moments", "h(0,1) at (1,0,1)", q("-2641/3960"), f101.h[1]);
  rec.exact("first moments", "h(1,0) at (1,0,2)", q("841/2970"), f102.h[0]);
  rec.exact("first moments", "h(0,1) at (1,0,2)", q("-133/1320"), f102.h[1],
            "reference prints -133/3960; the (1,0,1) and (1,0,2) values must sum to -76/99, giving -399/3960");

  const auto second = conditional_second_moments(basis, m2, mt, x100, AnchorPolicy::canonical);
  rec.flag("second moments", "second layer on rows (3,1), (3,2)",
           second.route == "disjoint" && second.second_layer.pairs == std::vector<AnchorPair>{{2, 1}, {2, 2}},
           second.route);
  rec.exact("second moments", "h(2,0) at (1,0,0)", q("3323/726"), second.h2(0, 0));
  rec.exact("second moments", "h(1,1) at (1,0,0)", q("-7087/2178"), second.h2(0, 1));
  rec.exact("second moments", "h(0,2) at (1,0,0)", q("1805/726"), second.h2(1, 1),
            "reference prints 1895/726; 1805/726 is the value consistent with E(G^(0,2)) = 1083/242 and M = 5/9");
  rec.exact("second moments", "E(G^(2,0) | (1,0,0))", q("9969/1210"), second.second(0, 0));
  rec.exact("second moments", "E(G^(0,2) | (1,0,0))", q("1083/242"), second.second(1, 1));
  const auto var = conditional_variance(first.expectation, second.second);
  rec.exact("second moments", "D(G1 | (1,0,0))", q("15523/6050"), var.values[0]);
  rec.exact("second moments", "D(G2 | (1,0,0))", q("15523/6050"), var.values[1]);

  // Tables in both bases: directly, and via the change-of-basis transforms.
  const AnchorSet<Rational> canonical = select_anchors(basis, 0.0);
  const Basis<Rational> points = worked_example_point_basis();
  const AnchorSet<Rational> point_anchors = select_anchors(points, 0.0);
  // points = basis * a.
  Matrix<Rational> a(2, 2);
  for (std::size_t k = 0; k < 2; ++k) {
    auto col = least_squares(basis.columns, std::span<const Rational>(points.columns.column(k)));
    for (std::size_t i = 0; i < 2; ++i) a(i, k) = col->x[i];
  }

  const auto table1 = worked_example_table(1);
  const auto table2 = worked_example_table(2);
  for (std::size_t i = 0; i < table1.size(); ++i) {
    const CellIndex& cell = table1[i].cell;
    const auto cc = compute_conditional(basis, canonical, mt, cell, AnchorPolicy::per_cell, 0.0);
    const std::string at = " | " + cell.to_string() + ")";
    rec.flag("table 1", "identified at " + cell.to_string(), cc.status == CellStatus::identified, cc.note);
    if (cc.status != CellStatus::identified) continue;
    rec.approx("table 1", "E(G1" + at, table1[i].e1, to_double(cc.expectation[0]), kTableTol);
    rec.approx("table 1", "sd(G1" + at, table1[i].sd1, std::sqrt(to_double((*cc.variance)[0])), kTableTol);
    rec.approx("table 1", "E(G2" + at, table1[i].e2, to_double(cc.expectation[1]), kTableTol);
    rec.approx("table 1", "sd(G2" + at, table1[i].sd2, std::sqrt(to_double((*cc.variance)[1])), kTableTol);

    const auto direct = compute_conditional(points, point_anchors, mt, cell, AnchorPolicy::per_cell, 0.0);
    const auto moved = change_basis_expectation(cc.expectation, a);
    std::map<PowerIndex, Rational> seconds = {{PowerIndex({2, 0}), (*cc.second)(0, 0)},
                                              {PowerIndex({1, 1}), (*cc.second)(0, 1)},
                                              {PowerIndex({0, 2}), (*cc.second)(1, 1)}};
    const auto moved2 = change_basis_moments(seconds, a);
    Matrix<Rational> moved_second(2, 2);
    moved_second(0, 0) = moved2.at(PowerIndex({2, 0}));
    moved_second(0, 1) = moved_second(1, 0) = moved2.at(PowerIndex({1, 1}));
    moved_second(1, 1) = moved2.at(PowerIndex({0, 2}));
    const auto moved_var = conditional_variance(moved, moved_second);

    const std::string at2 = " | " + table2[i].cell.to_string() + ")";
    rec.approx("table 2", "E(G1" + at2, table2[i].e1, to_double(moved[0]), kTableTol);
    rec.approx("table 2", "sd(G1" + at2, table2[i].sd1, std::sqrt(to_double(moved_var.values[0])), kTableTol);
    rec.approx("table 2", "E(G2" + at2, table2[i].e2, to_double(moved[1]), kTableTol);
    rec.approx("table 2", "sd(G2" + at2, table2[i].sd2, std::sqrt(to_double(moved_var.values[1])), kTableTol);
    rec.flag("table 2", "direct fit in point basis agrees at " + cell.to_string(),
             direct.status == CellStatus::identified && direct.expectation == moved &&
                 *direct.variance == moved_var.values,
             "");
  }

  // reconstruct_beta is basis-invariant on every cell where both bases identify E.
  for (const auto& cell : cells_up_to_order(s, 2)) {
    const auto ca = compute_conditional(basis, canonical, mt, cell, AnchorPolicy::per_cell, 0.0);
    const auto cb = compute_conditional(points, point_anchors, mt, cell, AnchorPolicy::per_cell, 0.0);
    if (ca.expectation.empty() || cb.expectation.empty()) continue;
    const bool same = reconstruct_beta(basis, ca.expectation) == reconstruct_beta(points, cb.expectation);
    rec.flag("invariance", "reconstructed beta at " + cell.to_string(), same, "");
  }

  // Full pipeline with the same preferred columns.
  FitConfig config;
  config.arithmetic = Arithmetic::rational;
  config.preferred_basis_columns = {CellIndex({0, 0, 0}), CellIndex({0, 0, 2})};
  const auto fitted = fit(mt, config);
  rec.flag("pipeline", "K = 2", fitted.K == 2, "K = " + std::to_string(fitted.K));
  rec.flag("pipeline", "basis equals alpha", fitted.basis.columns == alpha.columns, "");
  return report;
}

}  // namespace gom
