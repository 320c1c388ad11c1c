#include <cmath>

#include <gtest/gtest.h>

#include "claimnet/errors.hpp"
#include "claimnet/optimizer.hpp"

using namespace claimnet;

TEST(Lbfgs, MinimizesRosenbrock) {
  const Objective rosen = [](std::span<const double> x, std::span<double> g) {
    const double a = 1 - x[0], b = x[1] - x[0] * x[0];
    g[0] = -2 * a - 400 * x[0] * b;
    g[1] = 200 * b;
    return a * a + 100 * b * b;
  };
  LbfgsOptions opt;
  opt.relative_tolerance = 0.0;
  opt.gradient_tolerance = 1e-9;
  const auto r = minimize_lbfgs(rosen, {-1.2, 1.0}, opt);
  EXPECT_EQ(r.reason, StopReason::GradientTolerance);
  EXPECT_NEAR(r.x[0], 1.0, 1e-6);
  EXPECT_NEAR(r.x[1], 1.0, 1e-6);
  for (std::size_t k = 1; k < r.trace.size(); ++k) EXPECT_LE(r.trace[k], r.trace[k - 1]);
}

TEST(Lbfgs, ReportsIterationLimit) {
  const Objective quad = [](std::span<const double> x, std::span<double> g) {
    double f = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double w = 1.0 + 100.0 * static_cast<double>(i);
      f += w * x[i] * x[i];
      g[i] = 2 * w * x[i];
    }
    return f;
  };
  LbfgsOptions opt;
  opt.max_iterations = 2;
  opt.relative_tolerance = 0.0;
  const auto r = minimize_lbfgs(quad, std::vector<double>(8, 1.0), opt);
  EXPECT_EQ(r.reason, StopReason::MaxIterations);
  EXPECT_EQ(r.iterations, 2);
}

TEST(Lbfgs, NonFiniteStartIsAnError) {
  const Objective bad = [](std::span<const double>, std::span<double> g) {
    g[0] = 0;
    return std::nan("");
  };
  EXPECT_THROW(minimize_lbfgs(bad, {0.0}, {}), NumericError);
}
