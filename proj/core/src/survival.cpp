#include "claimnet/survival.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <boost/math/special_functions/gamma.hpp>
#include <spdlog/spdlog.h>

#include "claimnet/errors.hpp"

namespace claimnet {

namespace {

// exp(eta - max) stays in range as long as the spread of eta is sane; the
// absolute level only matters where the baseline is reported.
constexpr double kMaxAbsEta = 700.0;

void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw Error(std::string(what) + ": input lengths differ");
}

double max_of(std::span<const double> xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (const double x : xs) {
    if (!std::isfinite(x)) throw NumericError("non-finite prediction term");
    m = std::max(m, x);
  }
  return m;
}

struct Moments {
  double weight = 0.0;
  double first = 0.0;
  double second = 0.0;
};

}  // namespace

double SurvivalCurve::at(double t) const noexcept {
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 1.0;
  return survival[static_cast<std::size_t>(it - times.begin()) - 1];
}

double BaselineHazard::at(double t) const noexcept {
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 0.0;
  return cumulative_hazard[static_cast<std::size_t>(it - times.begin()) - 1];
}

RiskSets::RiskSets(std::span<const double> durations, std::span<const std::uint8_t> events)
    : order_(durations.size()), events_(events.begin(), events.end()) {
  check_lengths(durations.size(), events.size(), "RiskSets");
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::stable_sort(order_.begin(), order_.end(),
                   [&](std::size_t a, std::size_t b) { return durations[a] < durations[b]; });
  std::size_t i = 0;
  while (i < order_.size()) {
    const double t = durations[order_[i]];
    Group g{t, i, i, 0};
    while (g.end < order_.size() && durations[order_[g.end]] == t) {
      if (events[order_[g.end]]) ++g.deaths;
      ++g.end;
    }
    event_count_ += g.deaths;
    i = g.end;
    groups_.push_back(g);
  }
}

SurvivalCurve kaplan_meier(std::span<const double> durations, std::span<const std::uint8_t> events) {
  check_lengths(durations.size(), events.size(), "kaplan_meier");
  if (durations.empty()) throw Error("kaplan_meier: no observations");
  const RiskSets risk(durations, events);
  SurvivalCurve curve;
  double s = 1.0;
  for (const auto& g : risk.groups()) {
    if (g.deaths == 0) continue;
    const auto at_risk = static_cast<double>(risk.size() - g.begin);
    s *= 1.0 - static_cast<double>(g.deaths) / at_risk;
    curve.times.push_back(g.time);
    curve.survival.push_back(s);
  }
  return curve;
}

std::vector<StepPoint> log_cumulative_hazard(const SurvivalCurve& curve) {
  if (curve.times.empty()) throw Error("log_cumulative_hazard: curve has no event times");
  std::vector<StepPoint> out;
  for (std::size_t k = 0; k < curve.times.size(); ++k) {
    const double s = curve.survival[k];
    if (s > 0.0 && s < 1.0) out.push_back({curve.times[k], std::log(-std::log(s))});
  }
  return out;
}

BaselineHazard breslow_baseline(std::span<const double> durations, std::span<const std::uint8_t> events,
                                std::span<const double> etas) {
  return breslow_baseline(RiskSets(durations, events), etas);
}

BaselineHazard breslow_baseline(const RiskSets& risk, std::span<const double> etas) {
  check_lengths(risk.size(), etas.size(), "breslow_baseline");
  const double m = max_of(etas);
  const double lo = *std::min_element(etas.begin(), etas.end());
  if (m > kMaxAbsEta || lo < -kMaxAbsEta) {
    throw NumericError("breslow_baseline: exp(eta) overflows; max |eta| = " +
                       std::to_string(std::max(m, -lo)));
  }
  const auto order = risk.order();
  const auto groups = risk.groups();
  std::vector<double> at_risk(groups.size());
  double sum = 0.0;
  for (std::size_t g = groups.size(); g-- > 0;) {
    for (std::size_t k = groups[g].begin; k < groups[g].end; ++k) sum += std::exp(etas[order[k]] - m);
    at_risk[g] = sum;
  }
  BaselineHazard h;
  const double scale = std::exp(-m);
  double cum = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].deaths == 0) continue;
    cum += static_cast<double>(groups[g].deaths) * scale / at_risk[g];
    h.times.push_back(groups[g].time);
    h.cumulative_hazard.push_back(cum);
  }
  return h;
}

SurvivalCurve survival_from_eta(const BaselineHazard& baseline, double eta) {
  if (!std::isfinite(eta) || std::abs(eta) > kMaxAbsEta) {
    throw NumericError("survival_from_eta: eta out of range: " + std::to_string(eta));
  }
  SurvivalCurve c;
  c.times = baseline.times;
  c.survival.reserve(baseline.times.size());
  const double r = std::exp(eta);
  for (const double h : baseline.cumulative_hazard) c.survival.push_back(std::exp(-h * r));
  return c;
}

std::optional<double> curve_quantile(const SurvivalCurve& curve, double q) {
  if (!(q > 0.0 && q < 1.0)) throw Error("curve_quantile: q must lie in (0, 1)");
  const double target = 1.0 - q;
  for (std::size_t k = 0; k < curve.times.size(); ++k) {
    if (curve.survival[k] <= target) return curve.times[k];
  }
  return std::nullopt;
}

double curve_mean(const SurvivalCurve& curve) noexcept {
  double area = 0.0;
  double prev_t = 0.0;
  double prev_s = 1.0;
  for (std::size_t k = 0; k < curve.times.size(); ++k) {
    area += prev_s * (curve.times[k] - prev_t);
    prev_t = curve.times[k];
    prev_s = curve.survival[k];
  }
  return area;
}

bool mean_is_truncated(const SurvivalCurve& curve) noexcept {
  return curve.survival.empty() || curve.survival.back() > 0.0;
}

LogRankResult log_rank(std::span<const double> durations_a, std::span<const std::uint8_t> events_a,
                       std::span<const double> durations_b, std::span<const std::uint8_t> events_b) {
  check_lengths(durations_a.size(), events_a.size(), "log_rank");
  check_lengths(durations_b.size(), events_b.size(), "log_rank");
  if (durations_a.empty() || durations_b.empty()) throw Error("log_rank: both groups must be nonempty");

  std::vector<double> durations(durations_a.begin(), durations_a.end());
  durations.insert(durations.end(), durations_b.begin(), durations_b.end());
  std::vector<std::uint8_t> events(events_a.begin(), events_a.end());
  events.insert(events.end(), events_b.begin(), events_b.end());
  const RiskSets risk(durations, events);
  if (risk.event_count() == 0) throw Error("log_rank: no events in either group");

  const std::size_t n_a_total = durations_a.size();
  const auto order = risk.order();
  // Members of group A still at risk, counted from the top of the ordering.
  std::vector<std::size_t> a_from(order.size() + 1, 0);
  for (std::size_t k = order.size(); k-- > 0;) a_from[k] = a_from[k + 1] + (order[k] < n_a_total ? 1 : 0);

  LogRankResult res;
  double variance = 0.0;
  for (const auto& g : risk.groups()) {
    if (g.deaths == 0) continue;
    const double n = static_cast<double>(order.size() - g.begin);
    const double n_a = static_cast<double>(a_from[g.begin]);
    double d_a = 0.0;
    for (std::size_t k = g.begin; k < g.end; ++k) {
      if (order[k] < n_a_total && risk.events()[order[k]]) d_a += 1.0;
    }
    const double d = static_cast<double>(g.deaths);
    res.observed_a += d_a;
    res.expected_a += d * n_a / n;
    if (n > 1.0) variance += d * (n_a / n) * (1.0 - n_a / n) * (n - d) / (n - 1.0);
  }
  const double diff = res.observed_a - res.expected_a;
  res.statistic = variance > 0.0 ? diff * diff / variance : 0.0;
  res.p_value = chi_square_upper_tail(res.statistic, 1.0);
  return res;
}

double chi_square_upper_tail(double x, double df) {
  if (x <= 0.0) return 1.0;
  if (df == 1.0) return std::erfc(std::sqrt(x / 2.0));
  return boost::math::gamma_q(df / 2.0, x / 2.0);
}

double generalized_r2(double loglik_full, double loglik_null, std::size_t n) {
  if (n == 0) throw Error("generalized_r2: n must be positive");
  if (loglik_full < loglik_null) {
    spdlog::warn("generalized_r2: full log-likelihood {} below null {}", loglik_full, loglik_null);
  }
  return 1.0 - std::exp(-2.0 * (loglik_full - loglik_null) / static_cast<double>(n));
}

double cox_partial_loglik(std::span<const double> etas, std::span<const double> durations,
                          std::span<const std::uint8_t> events) {
  return cox_partial_loglik(etas, RiskSets(durations, events));
}

double cox_partial_loglik(std::span<const double> etas, const RiskSets& risk) {
  check_lengths(risk.size(), etas.size(), "cox_partial_loglik");
  if (risk.event_count() == 0) throw Error("cox_partial_loglik: no events");
  const double m = max_of(etas);
  const auto order = risk.order();
  const auto groups = risk.groups();
  const auto events = risk.events();
  double sum = 0.0;
  double loglik = 0.0;
  for (std::size_t g = groups.size(); g-- > 0;) {
    double eta_deaths = 0.0;
    for (std::size_t k = groups[g].begin; k < groups[g].end; ++k) {
      const auto i = order[k];
      sum += std::exp(etas[i] - m);
      if (events[i]) eta_deaths += etas[i];
    }
    if (groups[g].deaths > 0) {
      loglik += eta_deaths - static_cast<double>(groups[g].deaths) * (std::log(sum) + m);
    }
  }
  return loglik;
}

double cox_partial_loglik_gradient(std::span<const double> etas, const RiskSets& risk,
                                   std::span<double> gradient) {
  check_lengths(risk.size(), etas.size(), "cox_partial_loglik_gradient");
  check_lengths(risk.size(), gradient.size(), "cox_partial_loglik_gradient");
  if (risk.event_count() == 0) throw Error("cox_partial_loglik: no events");
  const double m = max_of(etas);
  const auto order = risk.order();
  const auto groups = risk.groups();
  const auto events = risk.events();

  std::vector<double> at_risk(groups.size());
  double sum = 0.0;
  double loglik = 0.0;
  for (std::size_t g = groups.size(); g-- > 0;) {
    double eta_deaths = 0.0;
    for (std::size_t k = groups[g].begin; k < groups[g].end; ++k) {
      const auto i = order[k];
      sum += std::exp(etas[i] - m);
      if (events[i]) eta_deaths += etas[i];
    }
    at_risk[g] = sum;
    if (groups[g].deaths > 0) {
      loglik += eta_deaths - static_cast<double>(groups[g].deaths) * (std::log(sum) + m);
    }
  }
  double hazard = 0.0;  // sum of d_g / R_g over groups up to the current time
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].deaths > 0) hazard += static_cast<double>(groups[g].deaths) / at_risk[g];
    for (std::size_t k = groups[g].begin; k < groups[g].end; ++k) {
      const auto i = order[k];
      gradient[i] = (events[i] ? 1.0 : 0.0) - std::exp(etas[i] - m) * hazard;
    }
  }
  return loglik;
}

UnivariateCoxFit fit_univariate_cox(std::span<const double> covariate, const RiskSets& risk) {
  check_lengths(risk.size(), covariate.size(), "fit_univariate_cox");
  if (risk.event_count() == 0) throw Error("fit_univariate_cox: no events");
  const auto n = covariate.size();
  const std::vector<double> zeros(n, 0.0);

  UnivariateCoxFit fit;
  fit.loglik_null = cox_partial_loglik(zeros, risk);
  fit.loglik_full = fit.loglik_null;

  const double mean = std::accumulate(covariate.begin(), covariate.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (const double x : covariate) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n));
  const auto [lo, hi] = std::minmax_element(covariate.begin(), covariate.end());
  if (!(sd > 0.0) || *lo == *hi || !(sd > 1e-12 * std::max(std::abs(*lo), std::abs(*hi)))) {
    fit.degenerate = true;
    return fit;
  }
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = (covariate[i] - mean) / sd;

  const auto order = risk.order();
  const auto groups = risk.groups();
  const auto events = risk.events();
  std::vector<double> eta(n);

  // Score and information at beta, on the standardized covariate.
  auto derivatives = [&](double beta, double& score, double& info) {
    score = 0.0;
    info = 0.0;
    const double m = std::abs(beta) * *std::max_element(z.begin(), z.end(), [](double a, double b) {
      return std::abs(a) < std::abs(b);
    });
    Moments mo;
    for (std::size_t g = groups.size(); g-- > 0;) {
      double z_deaths = 0.0;
      for (std::size_t k = groups[g].begin; k < groups[g].end; ++k) {
        const auto i = order[k];
        const double w = std::exp(beta * z[i] - m);
        mo.weight += w;
        mo.first += w * z[i];
        mo.second += w * z[i] * z[i];
        if (events[i]) z_deaths += z[i];
      }
      if (groups[g].deaths == 0) continue;
      const double d = static_cast<double>(groups[g].deaths);
      const double zbar = mo.first / mo.weight;
      score += z_deaths - d * zbar;
      info += d * (mo.second / mo.weight - zbar * zbar);
    }
  };
  auto loglik_at = [&](double beta) {
    for (std::size_t i = 0; i < n; ++i) eta[i] = beta * z[i];
    return cox_partial_loglik(eta, risk);
  };

  double beta = 0.0;
  double ll = fit.loglik_null;
  double info = 0.0;
  for (int it = 1; it <= 100; ++it) {
    double score = 0.0;
    derivatives(beta, score, info);
    fit.iterations = it;
    if (!(info > 0.0)) break;
    double step = score / info;
    double candidate = beta + step;
    double ll_new = loglik_at(candidate);
    int halvings = 0;
    while (!(ll_new >= ll) && halvings < 40) {
      step /= 2.0;
      candidate = beta + step;
      ll_new = loglik_at(candidate);
      ++halvings;
    }
    if (!(ll_new >= ll)) break;
    beta = candidate;
    ll = ll_new;
    if (std::abs(step) < 1e-12 * (1.0 + std::abs(beta))) break;
  }
  double score = 0.0;
  derivatives(beta, score, info);
  fit.loglik_full = ll;
  fit.beta = beta / sd;
  fit.standard_error = info > 0.0 ? 1.0 / std::sqrt(info) / sd : std::numeric_limits<double>::infinity();
  return fit;
}

std::vector<double> linear_cox_information(std::span<const double> design, std::size_t columns,
                                           std::span<const double> etas, const RiskSets& risk) {
  check_lengths(design.size(), risk.size() * columns, "linear_cox_information");
  check_lengths(etas.size(), risk.size(), "linear_cox_information");
  const auto p = columns;
  const double m = max_of(etas);
  const auto order = risk.order();
  const auto groups = risk.groups();
  std::vector<double> info(p * p, 0.0);
  std::vector<double> s1(p, 0.0);
  std::vector<double> s2(p * p, 0.0);
  double w_sum = 0.0;
  for (std::size_t g = groups.size(); g-- > 0;) {
    for (std::size_t k = groups[g].begin; k < groups[g].end; ++k) {
      const auto i = order[k];
      const double w = std::exp(etas[i] - m);
      const double* x = design.data() + i * p;
      w_sum += w;
      for (std::size_t a = 0; a < p; ++a) {
        s1[a] += w * x[a];
        for (std::size_t b = 0; b < p; ++b) s2[a * p + b] += w * x[a] * x[b];
      }
    }
    if (groups[g].deaths == 0) continue;
    const double d = static_cast<double>(groups[g].deaths);
    for (std::size_t a = 0; a < p; ++a) {
      for (std::size_t b = 0; b < p; ++b) {
        info[a * p + b] += d * (s2[a * p + b] / w_sum - (s1[a] / w_sum) * (s1[b] / w_sum));
      }
    }
  }
  return info;
}

}  // namespace claimnet
