#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "claimnet/claims.hpp"

namespace claimnet {

/// One category of a generated variable. For AGE and PAY the recorded value
/// is drawn uniformly from [low, high] (AGE rounded to whole years) and
/// `token` only labels the band.
struct GeneratorLevel {
  std::string token;
  double probability = 0.0;
  double effect = 0.0;  // added to the true prediction term
  double low = 0.0;
  double high = 0.0;
};

struct GeneratorVariable {
  Variable variable = Variable::NOI;
  std::vector<GeneratorLevel> levels;
};

struct InteractionEffect {
  std::string first;   // level token of the first variable
  std::string second;  // level token of the second variable
  double effect = 0.0;
};

struct GeneratorInteraction {
  Variable first = Variable::POB;
  Variable second = Variable::SEX;
  std::vector<InteractionEffect> effects;
};

/// Weibull baseline H0(t) = rate * t^shape (shape 1: exponential).
struct BaselineSpec {
  double rate = 0.1;
  double shape = 1.0;
};

/// Administrative censoring at the capture date. Open dates are uniform over
/// `history_weeks` ending `capture_gap_weeks` before the capture date. When
/// `recent_censor_fraction` is set the gap is solved for instead, so that
/// that fraction of claims opened in the last `recent_window_weeks` of the
/// open-date range is still open at capture.
struct CensoringSpec {
  bool enabled = true;
  double history_weeks = 156.0;
  double capture_gap_weeks = 0.0;
  std::optional<double> recent_censor_fraction;
  double recent_window_weeks = 13.0;
};

struct GeneratorConfig {
  std::string name;
  std::vector<GeneratorVariable> variables;
  std::vector<GeneratorInteraction> interactions;
  BaselineSpec baseline;
  CensoringSpec censoring;
  double trend_per_year = 0.0;  // added to eta per year of open date after the range start
  Date capture_date = Date{std::chrono::year{2000} / 12 / 4};
  std::size_t records = 1000;
  std::uint64_t seed = 1;
};

struct GeneratedData {
  std::vector<ClaimRecord> records;
  std::vector<double> etas;  // true prediction term of each record
  double capture_gap_weeks = 0.0;
  Date first_open_date{};
};

/// Draws records from h(t | x) = h0(t) exp(eta(x)) by inverse-transform
/// sampling; deterministic per seed. Throws Error when the requested recent
/// censor fraction is infeasible.
GeneratedData generate(const GeneratorConfig& config);

/// Names of the built-in configurations: linear-v1, interaction-v1, null-v1, trend-v1.
std::vector<std::string> preset_names();
GeneratorConfig preset(std::string_view name, std::size_t records, std::uint64_t seed);

/// Generalized R^2 of a one-covariate Cox refit on the true prediction terms.
double oracle_r2(std::span<const ClaimRecord> records, std::span<const double> etas);

/// True survivor function, mean and quantile under the generator's law.
double true_survival(const BaselineSpec& baseline, double eta, double t);
double true_mean(const BaselineSpec& baseline, double eta);
double true_quantile(const BaselineSpec& baseline, double eta, double q);

nlohmann::json to_json(const GeneratorConfig& config);
GeneratorConfig generator_config_from_json(const nlohmann::json& doc);

/// Sidecar oracle file: "record,eta" with 0-based record ids.
void write_oracle(std::ostream& out, std::span<const double> etas);
std::vector<double> read_oracle(std::istream& in);

}  // namespace claimnet
