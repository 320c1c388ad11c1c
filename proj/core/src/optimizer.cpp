#include "claimnet/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <string>

#include "claimnet/errors.hpp"

namespace claimnet {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (const double v : a) m = std::max(m, std::abs(v));
  return m;
}

struct Correction {
  std::vector<double> s;
  std::vector<double> y;
  double rho;
};

// Two-loop recursion: returns -H g.
std::vector<double> search_direction(const std::deque<Correction>& memory, std::span<const double> g) {
  std::vector<double> q(g.begin(), g.end());
  std::vector<double> alpha(memory.size());
  for (std::size_t k = memory.size(); k-- > 0;) {
    alpha[k] = memory[k].rho * dot(memory[k].s, q);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] -= alpha[k] * memory[k].y[i];
  }
  if (!memory.empty()) {
    const auto& last = memory.back();
    const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
    for (double& v : q) v *= gamma;
  }
  for (std::size_t k = 0; k < memory.size(); ++k) {
    const double beta = memory[k].rho * dot(memory[k].y, q);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] += memory[k].s[i] * (alpha[k] - beta);
  }
  for (double& v : q) v = -v;
  return q;
}

}  // namespace

std::string_view to_string(StopReason reason) noexcept {
  switch (reason) {
    case StopReason::GradientTolerance:
      return "gradient_tolerance";
    case StopReason::RelativeDecrease:
      return "relative_decrease";
    case StopReason::MaxIterations:
      return "max_iterations";
    case StopReason::LineSearchFailed:
      return "line_search_failed";
  }
  return "unknown";
}

LbfgsResult minimize_lbfgs(const Objective& objective, std::vector<double> x0, const LbfgsOptions& options) {
  constexpr double kArmijo = 1e-4;
  const std::size_t n = x0.size();

  LbfgsResult res;
  res.x = std::move(x0);
  std::vector<double> g(n);
  res.value = objective(res.x, g);
  res.evaluations = 1;
  if (!std::isfinite(res.value)) throw NumericError("objective is not finite at iteration 0");
  res.trace.push_back(res.value);
  if (max_abs(g) < options.gradient_tolerance) {
    res.reason = StopReason::GradientTolerance;
    return res;
  }

  std::deque<Correction> memory;
  std::vector<double> x_new(n);
  std::vector<double> g_new(n);
  res.reason = StopReason::MaxIterations;

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    auto dir = search_direction(memory, g);
    double slope = dot(g, dir);
    if (!(slope < 0.0)) {
      memory.clear();
      dir.assign(g.begin(), g.end());
      for (double& v : dir) v = -v;
      slope = dot(g, dir);
    }
    double step = memory.empty() ? std::min(1.0, 1.0 / max_abs(g)) : 1.0;

    bool accepted = false;
    bool any_finite = false;
    double f_new = 0.0;
    for (int bt = 0; bt < options.max_backtracks; ++bt) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = res.x[i] + step * dir[i];
      f_new = objective(x_new, g_new);
      ++res.evaluations;
      if (std::isfinite(f_new)) {
        any_finite = true;
        if (f_new <= res.value + kArmijo * step * slope) {
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!any_finite) throw NumericError("objective diverged (not finite) at iteration " + std::to_string(iter));
      if (!memory.empty()) {
        memory.clear();
        --iter;
        continue;
      }
      res.reason = StopReason::LineSearchFailed;
      break;
    }

    Correction c{std::vector<double>(n), std::vector<double>(n), 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      c.s[i] = x_new[i] - res.x[i];
      c.y[i] = g_new[i] - g[i];
    }
    const double sy = dot(c.s, c.y);
    if (sy > 1e-12 * dot(c.y, c.y)) {
      c.rho = 1.0 / sy;
      memory.push_back(std::move(c));
      if (static_cast<int>(memory.size()) > options.history) memory.pop_front();
    }

    const double f_old = res.value;
    res.x.swap(x_new);
    g.swap(g_new);
    res.value = f_new;
    res.iterations = iter;
    res.trace.push_back(f_new);

    if (max_abs(g) < options.gradient_tolerance) {
      res.reason = StopReason::GradientTolerance;
      break;
    }
    if ((f_old - f_new) / std::max({std::abs(f_old), std::abs(f_new), 1.0}) < options.relative_tolerance) {
      res.reason = StopReason::RelativeDecrease;
      break;
    }
  }
  return res;
}

}  // namespace claimnet
