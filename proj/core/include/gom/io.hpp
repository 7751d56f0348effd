#pragma once

// JSON documents exchanged by the command-line tool. Every document carries
// "kind" and "format_version". Rationals serialize as "p/q" strings, floats
// as shortest round-trip decimal strings.

#include <string>
#include <variant>

#include "gom/estimator.hpp"
#include "gom/oracle.hpp"
#include "gom/tables.hpp"

namespace gom {

inline constexpr int kFormatVersion = 1;

// "kind" of a JSON document; throws InputError when absent or not JSON.
std::string document_kind(const std::string& json_text);

std::string scheme_to_json(const Scheme& scheme);
// Schema sidecar {"outcomes": [...], "names": [...]}, or any document with a
// "scheme" member.
Scheme scheme_from_json(const std::string& json_text);

// kind "gom-frequency-table": counts, per-cell denominators and N.
std::string frequency_table_to_json(const ContingencyTable& ct, const SummationReport& summation);
ContingencyTable frequency_table_from_json(const std::string& json_text);

// kind "gom-moment-table".
template <typename T>
std::string moment_table_to_json(const MomentTable<T>& mt);

using AnyMomentTable = std::variant<MomentTable<double>, MomentTable<Rational>>;

// Accepts moment tables and frequency tables; frequencies from counts are
// exact rationals.
AnyMomentTable moment_table_from_json(const std::string& json_text);

// kind "gom-latent-model": scheme, points, weights.
std::string latent_model_to_json(const DiscreteLatentModel<Rational>& model);
DiscreteLatentModel<Rational> latent_model_from_json(const std::string& json_text);

std::string summation_report_to_json(const SummationReport& report);

std::string fit_config_to_json(const FitConfig& config);

// kind "gom-model".
template <typename T>
std::string model_to_json(const FittedModel<T>& model);
std::string model_to_json(const AnyFittedModel& model);
AnyFittedModel model_from_json(const std::string& json_text);

template <typename T>
std::string prediction_to_json(const Prediction<T>& p);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace gom
