#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "claimnet/claims.hpp"
#include "claimnet/coxnet.hpp"
#include "claimnet/encoding.hpp"
#include "claimnet/survival.hpp"

namespace claimnet {

/// Group (0-based) of each of `n` ranked items among `groups` nearest-rank
/// groups: the item of rank r (1-based) falls in the first g with
/// r <= ceil(g n / groups).
std::vector<std::size_t> rank_groups(std::size_t n, std::size_t groups);

/// Record ids ordered by decreasing prediction term, i.e. by increasing
/// predicted duration. Ties keep input order.
std::vector<std::size_t> order_by_predicted_duration(std::span<const double> etas);

struct BoxStats {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  std::size_t n = 0;
};

/// Nearest-rank five-number summary; all zero when `values` is empty.
BoxStats box_stats(std::vector<double> values);

struct PredictionGroup {
  std::size_t records = 0;  // all records in the group
  double eta_min = 0.0;
  double eta_max = 0.0;
  BoxStats closed;  // durations of the group's closed claims
};

/// Groups of equal size by predicted duration (group 0 shortest), with
/// boxplot statistics of the closed-claim durations in each.
std::vector<PredictionGroup> prediction_groups(std::span<const double> etas, std::span<const double> durations,
                                               std::span<const std::uint8_t> events, std::size_t groups);

inline std::vector<PredictionGroup> decile_summary(std::span<const double> etas, std::span<const double> durations,
                                                   std::span<const std::uint8_t> events) {
  return prediction_groups(etas, durations, events, 10);
}

using QuintileTable = std::array<std::array<double, 5>, 5>;

/// Among closed claims: row = predicted-duration quintile, column = actual
/// duration quintile, both shortest first. Each row sums to one.
QuintileTable quintile_table(std::span<const double> etas, std::span<const double> durations,
                             std::span<const std::uint8_t> events);

enum class Summary { Mean, Q1, Median, Q3 };
const char* to_string(Summary s) noexcept;
std::optional<Summary> parse_summary(std::string_view text) noexcept;

/// Summary statistic of a survival curve; nullopt for a quantile the curve
/// never reaches.
std::optional<double> curve_summary(const SurvivalCurve& curve, Summary s);

/// Per-record predicted mean, Q1, median and Q3 (NaN where a quantile lies
/// beyond the curve's support).
struct RecordSummaries {
  std::vector<double> mean, q1, median, q3;
  const std::vector<double>& of(Summary s) const noexcept;
};
RecordSummaries record_summaries(const BaselineHazard& baseline, std::span<const double> etas);

struct WindowPoint {
  double center = 0.0;     // predicted value at the window center
  std::size_t records = 0;
  double actual = 0.0;     // Kaplan-Meier summary of the records in the window
};

struct WindowOptions {
  double width = 1.0;
  double step = 0.5;
  std::size_t min_records = 10;
};

/// Actual versus predicted summary over a grid of windows of predicted
/// values. Windows with too few records or an unreachable actual quantile
/// are skipped.
std::vector<WindowPoint> moving_window_calibration(std::span<const double> predicted,
                                                   std::span<const double> durations,
                                                   std::span<const std::uint8_t> events, Summary summary,
                                                   const WindowOptions& options = {});

struct InteractionRow {
  std::string code;
  std::array<std::size_t, 2> n{};
  double statistic = 0.0;
  double p_value = 1.0;
  std::string favored;  // group with the longer durations
  bool significant = false;
};

struct InteractionReport {
  std::array<std::string, 2> groups;
  std::vector<InteractionRow> rows;  // every qualifying code
  std::size_t qualifying = 0;
  std::size_t significant = 0;
  std::size_t omitted = 0;  // codes below min_per_group in either group
};

/// Log-rank comparison of the two categories of `group_var` within each
/// consolidated category of `code_var`.
InteractionReport interaction_analysis(std::span<const ClaimRecord> records, const Codebook& codebook,
                                       Variable code_var, Variable group_var, std::size_t min_per_group = 10,
                                       double alpha = 0.05);

struct KendallResult {
  double tau = 0.0;
  double z = 0.0;
  double p_value = 1.0;  // two-sided, normal approximation
  std::size_t n = 0;
};

/// Kendall's tau-b with the tie-corrected variance of the pair score.
KendallResult kendall_tau_b(std::span<const double> x, std::span<const double> y);

struct DifferenceRow {
  std::string code;
  std::array<std::size_t, 2> n{};  // male, female
  double actual = 0.0;             // male minus female Kaplan-Meier median
  double predicted = 0.0;          // male minus female Method A median
};

struct ConcordanceReport {
  std::vector<DifferenceRow> rows;  // qualifying codes
  std::size_t sign_agreements = 0;
  KendallResult kendall;
};

ConcordanceReport concordance_from_differences(std::vector<DifferenceRow> rows);

/// Per consolidated code of `code_var`: actual sex difference in median
/// duration against the Method A prediction. Codes with fewer than
/// `min_per_group` records in either sex, an unreachable median or a zero
/// actual difference are left out. Fewer than three codes is an error.
ConcordanceReport sex_difference_concordance(const FittedModel& model, std::span<const ClaimRecord> records,
                                             Variable code_var, std::size_t min_per_group = 10);

struct GroupCalibrationRow {
  std::string code;
  std::string group;
  std::size_t n = 0;
  double predicted = 0.0;  // Method A median
  double actual = 0.0;     // Kaplan-Meier median
};

/// Method A median against the Kaplan-Meier median for every (code, group)
/// cell with at least `min_records` records and a reachable median.
std::vector<GroupCalibrationRow> group_calibration(const FittedModel& model, std::span<const ClaimRecord> records,
                                                   Variable code_var, Variable group_var,
                                                   std::size_t min_records = 30);

double pearson_correlation(std::span<const double> x, std::span<const double> y);

struct HazardCurve {
  std::string category;
  std::size_t records = 0;
  std::size_t events = 0;
  std::vector<StepPoint> points;  // log cumulative hazard
};

/// Kaplan-Meier log cumulative hazard per consolidated category of `v`.
std::vector<HazardCurve> ph_diagnostic(std::span<const ClaimRecord> records, const Codebook& codebook, Variable v);

struct QuarterSummary {
  Date start;
  Date end;  // exclusive
  std::size_t records = 0;
  std::size_t closed = 0;
  double censor_rate = 0.0;
  double naive_mean = 0.0;    // durations taken at face value, censored or not
  double naive_median = 0.0;
  double model_mean = 0.0;    // piecewise-linear Cox fit at the quarter midpoint
  std::optional<double> model_median;
};

struct TrendFit {
  Date origin;                 // earliest open date
  std::vector<Date> knots;     // calendar quarter ends inside the open-date range
  std::vector<double> coefficients;     // slope, then one change of slope per knot (per year)
  std::vector<double> standard_errors;
  double intercept = 0.0;      // bias weight; shifts eta and the baseline together
  BaselineHazard baseline;
  std::vector<QuarterSummary> quarters;

  /// Prediction term at an open date.
  double eta(Date d) const;
};

/// Hinge basis of an open date in years: (d - origin), then max(0, d - knot).
std::vector<double> trend_basis(Date d, Date origin, std::span<const Date> knots);

/// Piecewise-linear Cox regression of duration on open date with knots at
/// calendar quarter ends, plus naive quarterly summaries.
TrendFit fit_time_trend(std::span<const ClaimRecord> records, const TrainConfig& base = {});

void write_groups(std::ostream& out, std::span<const PredictionGroup> groups);
void write_quintiles(std::ostream& out, const QuintileTable& table);
void write_windows(std::ostream& out, Summary summary, std::span<const WindowPoint> points);
void write_interactions(std::ostream& out, const InteractionReport& report);
void write_concordance(std::ostream& out, const ConcordanceReport& report);
void write_group_calibration(std::ostream& out, std::span<const GroupCalibrationRow> rows);
void write_hazard_curves(std::ostream& out, std::span<const HazardCurve> curves);
void write_trend(std::ostream& out, const TrendFit& fit);

nlohmann::json to_json(std::span<const PredictionGroup> groups);
nlohmann::json to_json(const QuintileTable& table);
nlohmann::json to_json(Summary summary, std::span<const WindowPoint> points);
nlohmann::json to_json(const InteractionReport& report);
nlohmann::json to_json(const ConcordanceReport& report);
nlohmann::json to_json(std::span<const GroupCalibrationRow> rows);
nlohmann::json to_json(std::span<const HazardCurve> curves);
nlohmann::json to_json(const TrendFit& fit);

}  // namespace claimnet
