#pragma once

#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace claimnet {

/// Value and gradient of a smooth objective; writes the gradient into the
/// second argument and returns the value.
using Objective = std::function<double(std::span<const double>, std::span<double>)>;

struct LbfgsOptions {
  int max_iterations = 500;
  double relative_tolerance = 1e-8;  // on the per-iteration objective decrease
  double gradient_tolerance = 1e-6;  // on the max-norm of the gradient
  int history = 10;
  int max_backtracks = 60;
};

enum class StopReason { GradientTolerance, RelativeDecrease, MaxIterations, LineSearchFailed };

std::string_view to_string(StopReason reason) noexcept;

struct LbfgsResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  StopReason reason = StopReason::MaxIterations;
  std::vector<double> trace;  // objective after each accepted iteration, starting with f(x0)
};

/// Limited-memory BFGS with Armijo backtracking. Every accepted iterate has
/// an objective no larger than the previous one. Throws NumericError when
/// the objective is not finite at the start or at every trial step.
LbfgsResult minimize_lbfgs(const Objective& objective, std::vector<double> x0, const LbfgsOptions& options = {});

}  // namespace claimnet
