#include "gom/io.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "gom/error.hpp"

namespace gom {

using json = nlohmann::ordered_json;

namespace {

json parse_document(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("malformed JSON: ") + e.what());
  }
}

void expect_kind(const json& doc, const std::string& kind) {
  if (!doc.is_object() || !doc.contains("kind") || doc["kind"] != kind)
    throw InputError("expected a JSON document of kind '" + kind + "'");
  if (doc.contains("format_version") && doc["format_version"].get<int>() > kFormatVersion)
    throw InputError("unsupported format_version " + doc["format_version"].dump());
}

template <typename F>
auto guarded(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw InputError("invalid " + what + ": " + e.what());
  }
}

json header(const std::string& kind) {
  json j;
  j["kind"] = kind;
  j["format_version"] = kFormatVersion;
  return j;
}

json cell_json(const CellIndex& c) { return c.entries(); }
CellIndex cell_from(const json& j) { return CellIndex(j.get<std::vector<int>>()); }

json scheme_json(const Scheme& s) {
  json j;
  j["outcomes"] = s.outcome_counts();
  j["names"] = s.names();
  return j;
}

Scheme scheme_from(const json& j) {
  std::vector<std::string> names;
  if (j.contains("names")) names = j["names"].get<std::vector<std::string>>();
  return Scheme(j.at("outcomes").get<std::vector<int>>(), names);
}

template <typename T>
json scalar_json(const T& v) {
  return scalar_to_string(v);
}

template <typename T>
T scalar_from(const json& j) {
  if (j.is_string()) return ScalarTraits<T>::parse(j.get<std::string>());
  if (j.is_number_integer()) return T(j.get<long>());
  if (j.is_number()) return ScalarTraits<T>::from_double(j.get<double>());
  throw InputError("expected a number or numeric string, got " + j.dump());
}

template <typename T>
json vector_json(const std::vector<T>& v) {
  json a = json::array();
  for (const T& x : v) a.push_back(scalar_json(x));
  return a;
}

template <typename T>
std::vector<T> vector_from(const json& j) {
  std::vector<T> out;
  for (const auto& x : j) out.push_back(scalar_from<T>(x));
  return out;
}

// Row-major list of rows.
template <typename T>
json matrix_json(const Matrix<T>& m) {
  json a = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) a.push_back(vector_json(m.row(r)));
  return a;
}

template <typename T>
Matrix<T> matrix_from(const json& j) {
  std::vector<std::vector<T>> rows;
  for (const auto& r : j) rows.push_back(vector_from<T>(r));
  if (rows.empty()) return {};
  Matrix<T> m(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols()) throw InputError("ragged matrix in JSON");
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

json pair_json(const AnchorPair& p) { return json::array({p.j + 1, p.l}); }
AnchorPair pair_from(const json& j) { return {j.at(0).get<std::size_t>() - 1, j.at(1).get<int>()}; }

json summation_json(const SummationReport& r) {
  json j;
  j["ok"] = r.ok();
  j["normalization_deviation"] = r.normalization_deviation;
  j["normalization_ok"] = r.normalization_ok;
  j["checked"] = r.checked;
  json v = json::array();
  for (const auto& x : r.violations) {
    json e;
    e["coarse"] = cell_json(x.coarse);
    std::vector<std::size_t> refined;
    for (std::size_t m : x.refined) refined.push_back(m + 1);
    e["refined"] = refined;
    e["expected"] = x.expected;
    e["sum"] = x.sum;
    e["deviation"] = x.deviation;
    v.push_back(e);
  }
  j["violations"] = v;
  return j;
}

SummationReport summation_from(const json& j) {
  SummationReport r;
  r.normalization_deviation = j.value("normalization_deviation", 0.0);
  r.normalization_ok = j.value("normalization_ok", true);
  r.checked = j.value("checked", std::size_t{0});
  for (const auto& e : j.value("violations", json::array())) {
    SummationViolation x;
    x.coarse = cell_from(e.at("coarse"));
    for (std::size_t m : e.at("refined").get<std::vector<std::size_t>>()) x.refined.push_back(m - 1);
    x.expected = e.at("expected").get<double>();
    x.sum = e.at("sum").get<double>();
    x.deviation = e.at("deviation").get<double>();
    r.violations.push_back(std::move(x));
  }
  return r;
}

template <typename T>
json moments_json(const MomentTable<T>& mt) {
  json j;
  j["source"] = to_string(mt.source());
  j["arithmetic"] = to_string(ScalarTraits<T>::kind);
  json cells = json::array();
  for (const auto& [cell, value] : mt.values()) cells.push_back(json::array({cell_json(cell), scalar_json(value)}));
  j["cells"] = cells;
  return j;
}

template <typename T>
MomentTable<T> moments_from(const Scheme& scheme, const json& j) {
  MomentTable<T> mt(scheme, parse_moment_source(j.at("source").get<std::string>()));
  for (const auto& e : j.at("cells")) {
    CellIndex cell = cell_from(e.at(0));
    validate_cell(scheme, cell);
    mt.set(cell, scalar_from<T>(e.at(1)));
  }
  return mt;
}

json config_json(const FitConfig& c) {
  json j;
  j["K_override"] = c.K_override ? json(*c.K_override) : json(nullptr);
  j["rank_rel_tol"] = c.rank_rel_tol;
  j["completion_tol"] = c.completion_tol;
  j["lambda0_tol"] = c.lambda0_tol;
  j["anchor_tol"] = c.anchor_tol;
  j["normalization"] = to_string(c.normalization);
  j["arithmetic"] = to_string(c.arithmetic);
  j["anchors"] = to_string(c.anchors);
  j["refine"] = c.refine;
  j["refine_max_iters"] = c.refine_max_iters;
  j["refine_tol"] = c.refine_tol;
  j["max_order"] = c.max_order;
  j["column_order_cap"] = c.column_order_cap ? json(*c.column_order_cap) : json(nullptr);
  j["refine_cell_order"] = c.refine_cell_order;
  j["main_residual"] = c.main_residual;
  json pref = json::array();
  for (const auto& cell : c.preferred_basis_columns) pref.push_back(cell_json(cell));
  j["preferred_basis_columns"] = pref;
  j["seed"] = c.seed;
  return j;
}

FitConfig config_from(const json& j) {
  FitConfig c;
  if (!j.at("K_override").is_null()) c.K_override = j["K_override"].get<std::size_t>();
  c.rank_rel_tol = j.at("rank_rel_tol").get<double>();
  c.completion_tol = j.at("completion_tol").get<double>();
  c.lambda0_tol = j.at("lambda0_tol").get<double>();
  c.anchor_tol = j.at("anchor_tol").get<double>();
  c.normalization = parse_normalization(j.at("normalization").get<std::string>());
  c.arithmetic = parse_arithmetic(j.at("arithmetic").get<std::string>());
  c.anchors = parse_anchor_policy(j.at("anchors").get<std::string>());
  c.refine = j.at("refine").get<bool>();
  c.refine_max_iters = j.at("refine_max_iters").get<int>();
  c.refine_tol = j.at("refine_tol").get<double>();
  c.max_order = j.at("max_order").get<std::size_t>();
  if (!j.at("column_order_cap").is_null()) c.column_order_cap = j["column_order_cap"].get<std::size_t>();
  c.refine_cell_order = j.at("refine_cell_order").get<std::size_t>();
  c.main_residual = j.at("main_residual").get<bool>();
  for (const auto& cell : j.at("preferred_basis_columns")) c.preferred_basis_columns.push_back(cell_from(cell));
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

json diagnostics_json(const Diagnostics& d) {
  json j;
  j["estimated_rank"] = d.estimated_rank ? json(*d.estimated_rank) : json(nullptr);
  j["k_source"] = d.k_source;
  json comps = json::array();
  for (const auto& c : d.completions) {
    json e;
    e["column"] = cell_json(c.column);
    json regs = json::array();
    for (const auto& r : c.regressors) regs.push_back(cell_json(r));
    e["regressors"] = regs;
    e["residual_norm"] = c.residual_norm;
    e["flagged"] = c.flagged;
    comps.push_back(e);
  }
  j["completions"] = comps;
  json failed = json::array();
  for (const auto& c : d.failed_columns) failed.push_back(cell_json(c));
  j["failed_columns"] = failed;
  j["summation"] = summation_json(d.summation);
  j["main_system_residual"] = d.main_system_residual ? json(*d.main_system_residual) : json(nullptr);
  j["affine_deviation"] = d.affine_deviation;
  if (d.refinement) {
    json r;
    r["initial_residual"] = d.refinement->initial_residual;
    r["final_residual"] = d.refinement->final_residual;
    r["iterations"] = d.refinement->iterations;
    r["improved"] = d.refinement->improved;
    r["warnings"] = d.refinement->warnings;
    j["refinement"] = r;
  } else {
    j["refinement"] = nullptr;
  }
  j["warnings"] = d.warnings;
  return j;
}

Diagnostics diagnostics_from(const json& j) {
  Diagnostics d;
  if (!j.at("estimated_rank").is_null()) d.estimated_rank = j["estimated_rank"].get<std::size_t>();
  d.k_source = j.at("k_source").get<std::string>();
  for (const auto& e : j.at("completions")) {
    CompletionSummary c;
    c.column = cell_from(e.at("column"));
    for (const auto& r : e.at("regressors")) c.regressors.push_back(cell_from(r));
    c.residual_norm = e.at("residual_norm").get<double>();
    c.flagged = e.at("flagged").get<bool>();
    d.completions.push_back(std::move(c));
  }
  for (const auto& c : j.at("failed_columns")) d.failed_columns.push_back(cell_from(c));
  d.summation = summation_from(j.at("summation"));
  if (!j.at("main_system_residual").is_null()) d.main_system_residual = j["main_system_residual"].get<double>();
  d.affine_deviation = j.at("affine_deviation").get<double>();
  if (!j.at("refinement").is_null()) {
    const auto& r = j["refinement"];
    RefinementSummary s;
    s.initial_residual = r.at("initial_residual").get<double>();
    s.final_residual = r.at("final_residual").get<double>();
    s.iterations = r.at("iterations").get<int>();
    s.improved = r.at("improved").get<bool>();
    s.warnings = r.at("warnings").get<std::vector<std::string>>();
    d.refinement = std::move(s);
  }
  d.warnings = j.at("warnings").get<std::vector<std::string>>();
  return d;
}

template <typename T>
json conditional_json(const CellIndex& cell, const CellConditional<T>& cc) {
  json j;
  j["cell"] = cell_json(cell);
  j["status"] = to_string(cc.status);
  j["mass"] = scalar_json(cc.mass);
  j["h"] = vector_json(cc.h);
  j["expectation"] = vector_json(cc.expectation);
  j["variance"] = cc.variance ? vector_json(*cc.variance) : json(nullptr);
  if (cc.variance) {
    std::vector<double> sd;
    for (const T& v : *cc.variance) sd.push_back(std::sqrt(std::max(0.0, to_double(v))));
    j["sd"] = sd;
  } else {
    j["sd"] = nullptr;
  }
  j["second"] = cc.second ? matrix_json(*cc.second) : json(nullptr);
  j["variance_clamped"] = cc.variance_clamped;
  j["variance_inconsistent"] = cc.variance_inconsistent;
  j["anchors"] = cc.anchors;
  j["variance_route"] = cc.variance_route;
  j["note"] = cc.note;
  return j;
}

template <typename T>
std::pair<CellIndex, CellConditional<T>> conditional_from(const json& j) {
  CellConditional<T> cc;
  cc.status = parse_cell_status(j.at("status").get<std::string>());
  cc.mass = scalar_from<T>(j.at("mass"));
  cc.h = vector_from<T>(j.at("h"));
  cc.expectation = vector_from<T>(j.at("expectation"));
  if (!j.at("variance").is_null()) cc.variance = vector_from<T>(j["variance"]);
  if (!j.at("second").is_null()) cc.second = matrix_from<T>(j["second"]);
  cc.variance_clamped = j.at("variance_clamped").get<bool>();
  cc.variance_inconsistent = j.at("variance_inconsistent").get<bool>();
  cc.anchors = j.at("anchors").get<std::string>();
  cc.variance_route = j.at("variance_route").get<std::string>();
  cc.note = j.at("note").get<std::string>();
  return {cell_from(j.at("cell")), std::move(cc)};
}

template <typename T>
json model_json(const FittedModel<T>& m) {
  json j = header("gom-model");
  j["arithmetic"] = to_string(ScalarTraits<T>::kind);
  j["scheme"] = scheme_json(m.scheme);
  j["K"] = m.K;

  json basis;
  json cols = json::array();
  for (std::size_t k = 0; k < m.basis.K(); ++k) cols.push_back(vector_json(m.basis.columns.column(k)));
  basis["columns"] = cols;
  json src = json::array();
  for (const auto& c : m.basis.source_columns) src.push_back(cell_json(c));
  basis["source_columns"] = src;
  basis["lambda0"] = m.basis.lambda0;
  j["basis"] = basis;
  j["lambda1_transform"] = m.lambda1_transform ? matrix_json(*m.lambda1_transform) : json(nullptr);

  json anchors;
  json pairs = json::array();
  for (const auto& p : m.anchors.pairs) pairs.push_back(pair_json(p));
  anchors["pairs"] = pairs;
  anchors["extra"] = m.anchors.extra ? pair_json(*m.anchors.extra) : json(nullptr);
  std::vector<std::size_t> meas;
  for (std::size_t x : m.anchors.measurements()) meas.push_back(x + 1);
  anchors["measurements"] = meas;
  j["anchors"] = anchors;

  json conds = json::array();
  for (const auto& [cell, cc] : m.conditionals) conds.push_back(conditional_json(cell, cc));
  j["conditionals"] = conds;
  j["diagnostics"] = diagnostics_json(m.diagnostics);
  j["config"] = config_json(m.config);
  j["moments"] = moments_json(m.moments);
  return j;
}

template <typename T>
FittedModel<T> model_from(const json& j) {
  FittedModel<T> m;
  m.scheme = scheme_from(j.at("scheme"));
  m.K = j.at("K").get<std::size_t>();
  const auto& b = j.at("basis");
  std::vector<std::vector<T>> cols;
  for (const auto& c : b.at("columns")) cols.push_back(vector_from<T>(c));
  if (cols.size() != m.K) throw InputError("basis has " + std::to_string(cols.size()) + " columns, K = " + std::to_string(m.K));
  for (const auto& c : cols)
    if (c.size() != m.scheme.total_outcomes()) throw InputError("basis column length differs from |L|");
  m.basis.scheme = m.scheme;
  m.basis.columns = Matrix<T>::from_columns(cols);
  for (const auto& c : b.at("source_columns")) m.basis.source_columns.push_back(cell_from(c));
  m.basis.lambda0 = b.at("lambda0").get<bool>();
  if (!j.at("lambda1_transform").is_null()) m.lambda1_transform = matrix_from<T>(j["lambda1_transform"]);

  const auto& a = j.at("anchors");
  std::vector<std::size_t> rows;
  for (const auto& p : a.at("pairs")) {
    AnchorPair pair = pair_from(p);
    if (pair.j >= m.scheme.measurements() || pair.l < 1 || pair.l > m.scheme.outcomes(pair.j))
      throw InputError("anchor pair outside the scheme");
    m.anchors.pairs.push_back(pair);
    rows.push_back(m.scheme.row_index(pair.j, pair.l));
  }
  if (!a.at("extra").is_null()) m.anchors.extra = pair_from(a["extra"]);
  m.anchors.anchor_matrix = Matrix<T>(rows.size(), m.K);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < m.K; ++k) m.anchors.anchor_matrix(i, k) = m.basis.columns(rows[i], k);

  for (const auto& c : j.at("conditionals")) m.conditionals.insert(conditional_from<T>(c));
  m.diagnostics = diagnostics_from(j.at("diagnostics"));
  m.config = config_from(j.at("config"));
  m.moments = moments_from<T>(m.scheme, j.at("moments"));
  return m;
}

}  // namespace

std::string document_kind(const std::string& json_text) {
  json doc = parse_document(json_text);
  if (!doc.is_object() || !doc.contains("kind") || !doc["kind"].is_string())
    throw InputError("JSON document has no 'kind' field");
  return doc["kind"].get<std::string>();
}

std::string scheme_to_json(const Scheme& scheme) { return scheme_json(scheme).dump(2); }

Scheme scheme_from_json(const std::string& json_text) {
  json doc = parse_document(json_text);
  return guarded("schema", [&] { return scheme_from(doc.contains("scheme") ? doc.at("scheme") : doc); });
}

std::string frequency_table_to_json(const ContingencyTable& ct, const SummationReport& summation) {
  json j = header("gom-frequency-table");
  j["scheme"] = scheme_json(ct.scheme);
  j["N"] = ct.N;
  j["max_order"] = ct.max_order;
  j["complete_data"] = ct.complete_data;
  json cells = json::array();
  for (const auto& [cell, count] : ct.counts) {
    json e;
    e["cell"] = cell_json(cell);
    e["count"] = count;
    const std::uint64_t den = ct.denominators.at(cell);
    e["denominator"] = den;
    Rational f(mpz_class(std::to_string(count)), mpz_class(std::to_string(den == 0 ? 1 : den)));
    f.canonicalize();
    e["frequency"] = scalar_to_string(f);
    cells.push_back(e);
  }
  j["cells"] = cells;
  j["summation"] = summation_json(summation);
  return j.dump(2) + "\n";
}

ContingencyTable frequency_table_from_json(const std::string& json_text) {
  json doc = parse_document(json_text);
  expect_kind(doc, "gom-frequency-table");
  return guarded("frequency table", [&] {
    ContingencyTable ct;
    ct.scheme = scheme_from(doc.at("scheme"));
    ct.N = doc.at("N").get<std::uint64_t>();
    ct.max_order = doc.at("max_order").get<std::size_t>();
    ct.complete_data = doc.value("complete_data", true);
    for (const auto& e : doc.at("cells")) {
      CellIndex cell = cell_from(e.at("cell"));
      validate_cell(ct.scheme, cell);
      ct.counts[cell] = e.at("count").get<std::uint64_t>();
      ct.denominators[cell] = e.value("denominator", ct.N);
    }
    return ct;
  });
}

template <typename T>
std::string moment_table_to_json(const MomentTable<T>& mt) {
  json j = header("gom-moment-table");
  j["scheme"] = scheme_json(mt.scheme());
  json body = moments_json(mt);
  for (auto& [k, v] : body.items()) j[k] = v;
  return j.dump(2) + "\n";
}

AnyMomentTable moment_table_from_json(const std::string& json_text) {
  json doc = parse_document(json_text);
  const std::string kind = doc.value("kind", "");
  if (kind == "gom-frequency-table") return to_frequencies<Rational>(frequency_table_from_json(json_text));
  expect_kind(doc, "gom-moment-table");
  return guarded("moment table", [&]() -> AnyMomentTable {
    Scheme scheme = scheme_from(doc.at("scheme"));
    if (parse_arithmetic(doc.value("arithmetic", "rational")) == Arithmetic::rational)
      return moments_from<Rational>(scheme, doc);
    return moments_from<double>(scheme, doc);
  });
}

std::string latent_model_to_json(const DiscreteLatentModel<Rational>& model) {
  json j = header("gom-latent-model");
  j["scheme"] = scheme_json(model.scheme());
  json pts = json::array();
  for (const auto& p : model.points()) pts.push_back(vector_json(p));
  j["points"] = pts;
  j["weights"] = vector_json(model.weights());
  return j.dump(2) + "\n";
}

DiscreteLatentModel<Rational> latent_model_from_json(const std::string& json_text) {
  json doc = parse_document(json_text);
  expect_kind(doc, "gom-latent-model");
  return guarded("latent model", [&] {
    Scheme scheme = scheme_from(doc.at("scheme"));
    std::vector<std::vector<Rational>> pts;
    for (const auto& p : doc.at("points")) pts.push_back(vector_from<Rational>(p));
    std::vector<Rational> w;
    if (doc.contains("weights")) {
      w = vector_from<Rational>(doc["weights"]);
    } else {
      w.assign(pts.size(), ScalarTraits<Rational>::from_ratio(1, static_cast<long>(pts.size())));
    }
    return DiscreteLatentModel<Rational>(scheme, std::move(pts), std::move(w));
  });
}

std::string fit_config_to_json(const FitConfig& config) { return config_json(config).dump(2) + "\n"; }

std::string summation_report_to_json(const SummationReport& report) { return summation_json(report).dump(2) + "\n"; }

template <typename T>
std::string model_to_json(const FittedModel<T>& model) {
  return model_json(model).dump(2) + "\n";
}

std::string model_to_json(const AnyFittedModel& model) {
  return std::visit([](const auto& m) { return model_to_json(m); }, model);
}

AnyFittedModel model_from_json(const std::string& json_text) {
  json doc = parse_document(json_text);
  expect_kind(doc, "gom-model");
  return guarded("model", [&]() -> AnyFittedModel {
    if (parse_arithmetic(doc.at("arithmetic").get<std::string>()) == Arithmetic::rational)
      return model_from<Rational>(doc);
    return model_from<double>(doc);
  });
}

template <typename T>
std::string prediction_to_json(const Prediction<T>& p) {
  json j = header("gom-prediction");
  j["cell"] = cell_json(p.cell);
  j["arithmetic"] = to_string(ScalarTraits<T>::kind);
  j["mass"] = scalar_json(p.mass);
  j["expectation"] = vector_json(p.expectation);
  std::vector<double> approx;
  for (const T& v : p.expectation) approx.push_back(to_double(v));
  j["expectation_decimal"] = approx;
  j["variance"] = p.variance ? vector_json(*p.variance) : json(nullptr);
  if (p.variance) {
    std::vector<double> sd;
    for (const T& v : *p.variance) sd.push_back(std::sqrt(std::max(0.0, to_double(v))));
    j["sd"] = sd;
  } else {
    j["sd"] = nullptr;
  }
  j["beta"] = vector_json(p.beta);
  j["stored"] = p.stored;
  return j.dump(2) + "\n";
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
  if (!out) throw InputError("write failed for " + path);
}

template std::string moment_table_to_json<double>(const MomentTable<double>&);
template std::string moment_table_to_json<Rational>(const MomentTable<Rational>&);
template std::string model_to_json<double>(const FittedModel<double>&);
template std::string model_to_json<Rational>(const FittedModel<Rational>&);
template std::string prediction_to_json<double>(const Prediction<double>&);
template std::string prediction_to_json<Rational>(const Prediction<Rational>&);

}  // namespace gom
