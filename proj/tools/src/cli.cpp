#include "gom_cli/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <nlohmann/json.hpp>
#include <optional>
#include <ostream>
#include <sstream>

#include "gom/error.hpp"
#include "gom/estimator.hpp"
#include "gom/io.hpp"
#include "gom/oracle.hpp"
#include "gom/tables.hpp"
#include "gom/worked_example.hpp"

namespace gom::cli {

using json = nlohmann::ordered_json;

std::size_t default_threads() {
  if (const char* env = std::getenv("GOM_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return 1;
}

namespace {

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
  std::string s = text;
  if (s.size() >= 2 && s.front() == '(' && s.back() == ')') s = s.substr(1, s.size() - 2);
  std::vector<int> values;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      int v = std::stoi(item, &pos);
      if (item.find_first_not_of(' ', pos) != std::string::npos) throw std::invalid_argument(item);
      values.push_back(v);
    } catch (const std::exception&) {
      throw InputError("invalid " + what + " '" + text + "'");
    }
  }
  if (values.empty()) throw InputError("empty " + what);
  return values;
}

CellIndex parse_cell(const std::string& text) { return CellIndex(parse_int_list(text, "cell")); }

// "0,0,0;0,0,2"
std::vector<CellIndex> parse_cell_list(const std::string& text) {
  std::vector<CellIndex> cells;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';'))
    if (!item.empty()) cells.push_back(parse_cell(item));
  return cells;
}

bool looks_like_csv(const std::string& path, const std::string& text) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) return true;
  auto first = text.find_first_not_of(" \t\r\n");
  return first == std::string::npos || text[first] != '{';
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_text_file(path, text);
  }
}

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct GlobalOptions {
  std::string report_path;
  bool no_timestamp = false;
  std::size_t threads = 1;
};

// Accumulates the RunReport for one invocation.
class RunReport {
 public:
  RunReport(const std::vector<std::string>& args, const GlobalOptions& g)
      : global_(g), start_(std::chrono::steady_clock::now()), started_(utc_now()) {
    doc_["kind"] = "gom-run-report";
    doc_["format_version"] = kFormatVersion;
    doc_["command"] = args;
    doc_["config"] = json::object();
    doc_["outputs"] = json::object();
    doc_["diagnostics"] = json::object();
  }

  json& config() { return doc_["config"]; }
  json& outputs() { return doc_["outputs"]; }
  json& diagnostics() { return doc_["diagnostics"]; }

  void finish(int status, const std::string& error) {
    if (global_.report_path.empty()) return;
    if (global_.no_timestamp) {
      doc_["timing"] = nullptr;
    } else {
      double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
      doc_["timing"] = {{"started_utc", started_}, {"elapsed_seconds", elapsed}};
    }
    doc_["exit_status"] = status;
    doc_["error"] = error.empty() ? json(nullptr) : json(error);
    write_text_file(global_.report_path, doc_.dump(2) + "\n");
  }

 private:
  const GlobalOptions& global_;
  std::chrono::steady_clock::time_point start_;
  std::string started_;
  json doc_;
};

std::optional<Scheme> load_scheme(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return scheme_from_json(read_text_file(path));
}

// ---- tabulate ------------------------------------------------------------

struct TabulateOptions {
  std::string input;
  std::string schema;
  std::size_t max_order = 0;
  std::string output;
  std::string summation;
};

int cmd_tabulate(const TabulateOptions& o, RunReport& report, std::ostream& out) {
  report.config() = {{"input", o.input},
                     {"schema", o.schema.empty() ? json(nullptr) : json(o.schema)},
                     {"max_order", o.max_order}};
  Sample s = read_sample_csv_file(o.input, load_scheme(o.schema));
  std::size_t order = o.max_order == 0 ? s.scheme().measurements() : o.max_order;
  ContingencyTable ct = tabulate(s, order);
  SummationReport sum = check_summation(to_frequencies<Rational>(ct), 0.0);
  emit(frequency_table_to_json(ct, sum), o.output, out);
  if (!o.summation.empty()) write_text_file(o.summation, summation_report_to_json(sum));
  report.outputs() = {{"table", o.output.empty() ? "-" : o.output},
                      {"summation", o.summation.empty() ? json(nullptr) : json(o.summation)}};
  report.diagnostics() = {{"records", ct.N},
                          {"measurements", ct.scheme.measurements()},
                          {"cells", ct.counts.size()},
                          {"max_order", ct.max_order},
                          {"complete_data", ct.complete_data},
                          {"summation_ok", sum.ok()},
                          {"summation_checked", sum.checked}};
  return kOk;
}

// ---- fit -----------------------------------------------------------------

struct FitOptions {
  std::string input;
  std::string schema;
  std::string output;
  std::string matrix_csv;
  std::optional<std::size_t> k;
  std::string arithmetic = "float";
  std::string anchors = "per-cell";
  std::string normalization = "lambda0";
  bool refine = false;
  int refine_max_iters = 50;
  double refine_tol = 1e-10;
  std::size_t refine_cell_order = 2;
  std::size_t max_order = 0;
  std::optional<std::size_t> column_order_cap;
  double rank_tol = 1e-8;
  double completion_tol = 1e-8;
  double lambda0_tol = 0.05;
  double anchor_tol = 1e-10;
  std::string basis_columns;
  bool no_main_residual = false;
  std::uint64_t seed = 0;
};

FitConfig to_config(const FitOptions& o, std::size_t threads) {
  FitConfig c;
  c.K_override = o.k;
  c.arithmetic = parse_arithmetic(o.arithmetic);
  c.anchors = parse_anchor_policy(o.anchors);
  c.normalization = parse_normalization(o.normalization);
  c.refine = o.refine;
  c.refine_max_iters = o.refine_max_iters;
  c.refine_tol = o.refine_tol;
  c.refine_cell_order = o.refine_cell_order;
  c.max_order = o.max_order;
  c.column_order_cap = o.column_order_cap;
  c.rank_rel_tol = o.rank_tol;
  c.completion_tol = o.completion_tol;
  c.lambda0_tol = o.lambda0_tol;
  c.anchor_tol = o.anchor_tol;
  c.preferred_basis_columns = parse_cell_list(o.basis_columns);
  c.main_residual = !o.no_main_residual;
  c.seed = o.seed;
  c.threads = threads;
  c.validate();
  return c;
}

int cmd_fit(const FitOptions& o, const GlobalOptions& g, RunReport& report, std::ostream& out) {
  FitConfig cfg = to_config(o, g.threads);
  json model_doc;
  {
    json c = {{"input", o.input}, {"schema", o.schema.empty() ? json(nullptr) : json(o.schema)}};
    c["threads"] = g.threads;
    json fc = json::parse(fit_config_to_json(cfg));
    for (auto& [key, value] : fc.items()) c[key] = value;
    report.config() = c;
  }

  std::string text = read_text_file(o.input);
  AnyFittedModel model = [&]() -> AnyFittedModel {
    if (looks_like_csv(o.input, text)) {
      std::istringstream in(text);
      return fit(read_sample_csv(in, load_scheme(o.schema)), cfg);
    }
    return fit_any(moment_table_from_json(text), cfg);
  }();

  std::string model_text = model_to_json(model);
  emit(model_text, o.output, out);
  if (!o.matrix_csv.empty()) {
    std::visit(
        [&](const auto& m) {
          if (m.completed) write_text_file(o.matrix_csv, moment_matrix_csv(*m.completed));
        },
        model);
  }
  model_doc = json::parse(model_text);
  report.outputs() = {{"model", o.output.empty() ? "-" : o.output},
                      {"matrix_csv", o.matrix_csv.empty() ? json(nullptr) : json(o.matrix_csv)}};
  json d = model_doc["diagnostics"];
  json summary;
  summary["arithmetic"] = model_doc["arithmetic"];
  summary["K"] = model_doc["K"];
  summary["anchors"] = model_doc["anchors"]["pairs"];
  std::size_t identified = 0;
  for (const auto& c : model_doc["conditionals"])
    if (c["status"] == "identified") ++identified;
  summary["cells"] = model_doc["conditionals"].size();
  summary["cells_identified"] = identified;
  for (auto& [key, value] : d.items()) summary[key] = value;
  report.diagnostics() = summary;
  return kOk;
}

// ---- predict -------------------------------------------------------------

struct PredictOptions {
  std::string model;
  std::string outcome;
  std::string output;
};

int cmd_predict(const PredictOptions& o, RunReport& report, std::ostream& out) {
  report.config() = {{"model", o.model}, {"outcome", o.outcome}};
  AnyFittedModel model = model_from_json(read_text_file(o.model));
  CellIndex cell = parse_cell(o.outcome);
  std::string text = std::visit([&](const auto& m) { return prediction_to_json(predict(m, cell)); }, model);
  emit(text, o.output, out);
  report.outputs() = {{"prediction", o.output.empty() ? "-" : o.output}};
  json p = json::parse(text);
  report.diagnostics() = {{"cell", p["cell"]}, {"stored", p["stored"]}, {"has_variance", !p["variance"].is_null()}};
  return kOk;
}

// ---- synth ---------------------------------------------------------------

struct SynthOptions {
  std::string model;
  bool example = false;
  bool random = false;
  std::string scheme;
  std::size_t k = 2;
  bool general_position = false;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string output;
  std::string model_out;
  std::string moments;
  std::size_t max_order = 0;
};

int cmd_synth(const SynthOptions& o, RunReport& report, std::ostream& out) {
  report.config() = {{"model", o.model.empty() ? json(nullptr) : json(o.model)},
                     {"example", o.example},
                     {"random", o.random},
                     {"scheme", o.scheme.empty() ? json(nullptr) : json(o.scheme)},
                     {"k", o.k},
                     {"general_position", o.general_position},
                     {"n", o.n},
                     {"seed", o.seed},
                     {"max_order", o.max_order}};
  int sources = (o.model.empty() ? 0 : 1) + (o.example ? 1 : 0) + (o.random ? 1 : 0);
  if (sources != 1) throw InputError("synth needs exactly one of --model, --example, --random");
  DiscreteLatentModel<Rational> latent = [&] {
    if (o.example) return worked_example_model();
    if (!o.model.empty()) return latent_model_from_json(read_text_file(o.model));
    if (o.scheme.empty()) throw InputError("--random requires --scheme, e.g. 2,2,3");
    return random_model(Scheme(parse_int_list(o.scheme, "scheme")), o.k, o.seed, o.general_position);
  }();

  json outputs;
  if (!o.model_out.empty()) {
    write_text_file(o.model_out, latent_model_to_json(latent));
    outputs["latent_model"] = o.model_out;
  }
  if (!o.moments.empty()) {
    std::size_t order = o.max_order == 0 ? latent.scheme().measurements() : o.max_order;
    write_text_file(o.moments, moment_table_to_json(exact_ell_moments(latent, order)));
    outputs["moments"] = o.moments;
  }
  if (o.n > 0) {
    Sample s = sample(latent, o.n, o.seed);
    std::ostringstream csv;
    write_sample_csv(csv, s);
    emit(csv.str(), o.output, out);
    outputs["sample"] = o.output.empty() ? "-" : o.output;
  } else if (o.moments.empty() && o.model_out.empty()) {
    throw InputError("nothing to write: give --n, --moments or --model-out");
  }
  report.outputs() = outputs;
  report.diagnostics() = {{"measurements", latent.scheme().measurements()},
                          {"support_points", latent.support_size()},
                          {"records", o.n}};
  return kOk;
}

// ---- verify-example ------------------------------------------------------

struct VerifyOptions {
  bool json_output = false;
  std::string output;
};

int cmd_verify(const VerifyOptions& o, RunReport& report, std::ostream& out) {
  report.config() = {{"json", o.json_output}};
  VerificationReport v = verify_worked_example();
  emit(o.json_output ? v.to_json() : v.to_text(), o.output, out);
  report.outputs() = {{"report", o.output.empty() ? "-" : o.output}};
  report.diagnostics() = {{"checks", v.checks.size()}, {"failures", v.failures()}};
  return v.passed() ? kOk : kVerificationMismatch;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Moment-based Grade-of-Membership identification"};
  app.name("gom");
  app.require_subcommand(1);
  app.set_version_flag("--version", "gom 0.1.0");

  GlobalOptions g;
  g.threads = default_threads();
  auto add_globals = [&](CLI::App* sub) {
    sub->add_option("--report", g.report_path, "Write a JSON run report to this path");
    sub->add_flag("--no-timestamp", g.no_timestamp, "Omit timing from the run report");
    sub->add_option("--threads", g.threads, "Worker threads (default GOM_THREADS or 1)")
        ->check(CLI::PositiveNumber);
  };

  TabulateOptions tab;
  auto* tabulate_cmd = app.add_subcommand("tabulate", "CSV records to a JSON frequency table");
  tabulate_cmd->add_option("input", tab.input, "Input CSV")->required();
  tabulate_cmd->add_option("--schema", tab.schema, "JSON schema with outcome counts per measurement");
  tabulate_cmd->add_option("--max-order", tab.max_order, "Largest cell order to tabulate (default J)");
  tabulate_cmd->add_option("-o,--output", tab.output, "Frequency table path (default stdout)");
  tabulate_cmd->add_option("--summation", tab.summation, "Write the summation report here");
  add_globals(tabulate_cmd);

  FitOptions fo;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a model from a CSV sample, frequency table or moment table");
  fit_cmd->add_option("input", fo.input, "CSV, frequency table or moment table")->required();
  fit_cmd->add_option("--schema", fo.schema, "JSON schema for CSV input");
  fit_cmd->add_option("-o,--output", fo.output, "Model path (default stdout)");
  fit_cmd->add_option("--matrix-csv", fo.matrix_csv, "Dump the completed moment matrix as CSV");
  fit_cmd->add_option("--k", fo.k, "Latent dimension K (default: estimated rank)");
  fit_cmd->add_option("--arithmetic", fo.arithmetic, "rational or float")
      ->check(CLI::IsMember({"rational", "float"}));
  fit_cmd->add_option("--anchors", fo.anchors, "canonical or per-cell")
      ->check(CLI::IsMember({"canonical", "per-cell"}));
  fit_cmd->add_option("--normalization", fo.normalization, "lambda0 or lambda0+lambda1")
      ->check(CLI::IsMember({"lambda0", "lambda0+lambda1"}));
  fit_cmd->add_flag("--refine", fo.refine, "Alternating least-squares refinement (float only)");
  fit_cmd->add_option("--refine-max-iters", fo.refine_max_iters, "Refinement iteration cap");
  fit_cmd->add_option("--refine-tol", fo.refine_tol, "Relative residual decrease that stops refinement");
  fit_cmd->add_option("--refine-cell-order", fo.refine_cell_order, "Largest cell order in the residual");
  fit_cmd->add_option("--max-order", fo.max_order, "Largest moment order used (default J)");
  fit_cmd->add_option("--column-order-cap", fo.column_order_cap, "Largest column order of the moment matrix");
  fit_cmd->add_option("--rank-tol", fo.rank_tol, "Relative singular-value cutoff for the rank estimate");
  fit_cmd->add_option("--completion-tol", fo.completion_tol, "Completion regression tolerance");
  fit_cmd->add_option("--lambda0-tol", fo.lambda0_tol, "Relative block-sum tolerance in float mode");
  fit_cmd->add_option("--anchor-tol", fo.anchor_tol, "Relative pivot cutoff for anchors");
  fit_cmd->add_option("--basis-columns", fo.basis_columns, "Preferred basis columns, e.g. \"0,0,0;0,0,2\"");
  fit_cmd->add_flag("--no-main-residual", fo.no_main_residual, "Skip the full-system residual diagnostic");
  fit_cmd->add_option("--seed", fo.seed, "Seed recorded in the model");
  add_globals(fit_cmd);

  PredictOptions po;
  auto* predict_cmd = app.add_subcommand("predict", "Conditional moments of G at one outcome");
  predict_cmd->add_option("model", po.model, "Model JSON from fit")->required();
  predict_cmd->add_option("outcome", po.outcome, "Outcome cell, e.g. 1,0,0 (0 = unobserved)")->required();
  predict_cmd->add_option("-o,--output", po.output, "Prediction path (default stdout)");
  add_globals(predict_cmd);

  SynthOptions so;
  auto* synth_cmd = app.add_subcommand("synth", "Sample records or exact moments from a latent model");
  synth_cmd->add_option("--model", so.model, "Latent model JSON");
  synth_cmd->add_flag("--example", so.example, "Use the built-in three-point reference model");
  synth_cmd->add_flag("--random", so.random, "Draw a random model (needs --scheme)");
  synth_cmd->add_option("--scheme", so.scheme, "Outcome counts for --random, e.g. 2,2,3");
  synth_cmd->add_option("--k", so.k, "Support size for --random")->check(CLI::PositiveNumber);
  synth_cmd->add_flag("--general-position", so.general_position, "Require a rank-K certificate for --random");
  synth_cmd->add_option("-n,--n", so.n, "Number of records");
  synth_cmd->add_option("--seed", so.seed, "Random seed");
  synth_cmd->add_option("-o,--output", so.output, "Sample CSV path (default stdout)");
  synth_cmd->add_option("--model-out", so.model_out, "Write the latent model JSON here");
  synth_cmd->add_option("--moments", so.moments, "Write the exact moment table here");
  synth_cmd->add_option("--max-order", so.max_order, "Largest order for --moments (default J)");
  add_globals(synth_cmd);

  VerifyOptions vo;
  auto* verify_cmd = app.add_subcommand("verify-example", "Replay the reference example in exact arithmetic");
  verify_cmd->add_flag("--json", vo.json_output, "JSON report instead of text");
  verify_cmd->add_option("-o,--output", vo.output, "Report path (default stdout)");
  add_globals(verify_cmd);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  RunReport report(args, g);
  int status = kOk;
  std::string message;
  try {
    if (*tabulate_cmd) status = cmd_tabulate(tab, report, out);
    else if (*fit_cmd) status = cmd_fit(fo, g, report, out);
    else if (*predict_cmd) status = cmd_predict(po, report, out);
    else if (*synth_cmd) status = cmd_synth(so, report, out);
    else status = cmd_verify(vo, report, out);
    if (status == kVerificationMismatch) message = "verification mismatch";
  } catch (const InputError& e) {
    status = kInputError;
    message = e.what();
  } catch (const IdentificationError& e) {
    status = kIdentificationError;
    message = e.what();
  } catch (const PredictionError& e) {
    status = kPredictionError;
    message = e.what();
  } catch (const std::exception& e) {
    status = kInputError;
    message = e.what();
  }
  if (!message.empty()) err << "gom: " << message << '\n';
  try {
    report.finish(status, message);
  } catch (const std::exception& e) {
    err << "gom: cannot write report: " << e.what() << '\n';
    if (status == kOk) status = kInputError;
  }
  return status;
}

}  // namespace gom::cli
