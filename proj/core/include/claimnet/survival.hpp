#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace claimnet {

/// Right-continuous survivor step function. S(t) = 1 before times.front();
/// survival[k] holds on [times[k], times[k+1]).
struct SurvivalCurve {
  std::vector<double> times;
  std::vector<double> survival;

  double at(double t) const noexcept;
  bool operator==(const SurvivalCurve&) const = default;
};

/// Breslow estimate of the baseline cumulative hazard H0, a nondecreasing
/// step function with H0 = 0 before times.front().
struct BaselineHazard {
  std::vector<double> times;
  std::vector<double> cumulative_hazard;

  double at(double t) const noexcept;
  bool operator==(const BaselineHazard&) const = default;
};

/// Records grouped by distinct duration, in ascending time order. Built once
/// per data set and shared by every likelihood evaluation over it.
class RiskSets {
 public:
  struct Group {
    double time;
    std::size_t begin;   // into order()
    std::size_t end;
    std::size_t deaths;  // events at this time
  };

  RiskSets(std::span<const double> durations, std::span<const std::uint8_t> events);

  std::size_t size() const noexcept { return order_.size(); }
  std::size_t event_count() const noexcept { return event_count_; }
  std::span<const std::size_t> order() const noexcept { return order_; }
  std::span<const Group> groups() const noexcept { return groups_; }
  std::span<const std::uint8_t> events() const noexcept { return events_; }

 private:
  std::vector<std::size_t> order_;
  std::vector<Group> groups_;
  std::vector<std::uint8_t> events_;
  std::size_t event_count_ = 0;
};

SurvivalCurve kaplan_meier(std::span<const double> durations, std::span<const std::uint8_t> events);

struct StepPoint {
  double time;
  double value;
};

/// log(-log S(t)) at each step of the curve where 0 < S < 1.
std::vector<StepPoint> log_cumulative_hazard(const SurvivalCurve& curve);

BaselineHazard breslow_baseline(std::span<const double> durations, std::span<const std::uint8_t> events,
                                std::span<const double> etas);
BaselineHazard breslow_baseline(const RiskSets& risk, std::span<const double> etas);

/// S(t) = exp(-H0(t) exp(eta)) on the baseline's time grid.
SurvivalCurve survival_from_eta(const BaselineHazard& baseline, double eta);

/// Smallest step time with S(t) <= 1 - q, or nullopt when the curve never
/// falls that far.
std::optional<double> curve_quantile(const SurvivalCurve& curve, double q);

/// Integral of S over [0, t_max], t_max the last step time.
double curve_mean(const SurvivalCurve& curve) noexcept;

/// True when the curve still has mass beyond t_max, i.e. curve_mean is a
/// restricted mean rather than the full one.
bool mean_is_truncated(const SurvivalCurve& curve) noexcept;

struct LogRankResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double observed_a = 0.0;
  double expected_a = 0.0;
};

/// Two-sample log-rank test, chi-square with one degree of freedom.
LogRankResult log_rank(std::span<const double> durations_a, std::span<const std::uint8_t> events_a,
                       std::span<const double> durations_b, std::span<const std::uint8_t> events_b);

/// Upper tail of the chi-square distribution.
double chi_square_upper_tail(double x, double df);

/// 1 - exp(-2 (loglik_full - loglik_null) / n).
double generalized_r2(double loglik_full, double loglik_null, std::size_t n);

/// Breslow-ties Cox partial log-likelihood.
double cox_partial_loglik(std::span<const double> etas, std::span<const double> durations,
                          std::span<const std::uint8_t> events);
double cox_partial_loglik(std::span<const double> etas, const RiskSets& risk);

/// Partial log-likelihood, writing dL/d(eta_k) into `gradient`.
double cox_partial_loglik_gradient(std::span<const double> etas, const RiskSets& risk,
                                   std::span<double> gradient);

struct UnivariateCoxFit {
  double beta = 0.0;
  double standard_error = 0.0;
  double loglik_full = 0.0;
  double loglik_null = 0.0;
  int iterations = 0;
  bool degenerate = false;  // covariate constant: beta unidentified
};

/// Newton-Raphson fit of a one-covariate Cox model.
UnivariateCoxFit fit_univariate_cox(std::span<const double> covariate, const RiskSets& risk);

/// Observed information of the linear Cox partial likelihood at the given
/// linear predictors. `design` is row-major n x p. Returns row-major p x p.
std::vector<double> linear_cox_information(std::span<const double> design, std::size_t columns,
                                           std::span<const double> etas, const RiskSets& risk);

}  // namespace claimnet
