#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "claimnet/claims.hpp"
#include "claimnet/coxnet.hpp"

namespace claimnet {

/// Record ids of a train/test partition, each list ascending.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Uniform random partition without replacement, deterministic per seed.
Split split(std::size_t record_count, std::size_t n_train, std::uint64_t seed);

std::vector<ClaimRecord> select(std::span<const ClaimRecord> records, std::span<const std::size_t> ids);

struct Score {
  double r2 = 0.0;
  double beta = 0.0;
  double loglik_full = 0.0;
  double loglik_null = 0.0;
  std::size_t n = 0;
  bool degenerate = false;
};

/// Refits a one-covariate Cox model on the test records with the model's
/// prediction term as the covariate and returns its generalized R^2.
Score score_etas(std::span<const double> etas, std::span<const ClaimRecord> test);
Score score_model(const FittedModel& model, std::span<const ClaimRecord> test);

/// A named variable subset of the grid.
struct VariableSubset {
  std::string name;
  std::vector<Variable> variables;
};

/// AGE, SEX, POB.
VariableSubset reduced_subset();
/// All ten variables.
VariableSubset full_subset();

struct GridOptions {
  std::vector<VariableSubset> subsets = {reduced_subset(), full_subset()};
  std::vector<double> lambdas = {0.5, 1, 2, 4, 6, 8, 12};
  std::vector<std::size_t> hidden_sizes = {0, 2, 4, 8, 12, 14};
  std::size_t min_count = kDefaultMinCount;
  TrainConfig base;  // lambda, lambda_bias and hidden are overwritten per configuration
};

struct GridEntry {
  std::string subset;
  double lambda = 0.0;
  std::size_t hidden = 0;
  double r2 = 0.0;
  double objective = 0.0;
  int iterations = 0;
  double seconds = 0.0;
  std::optional<std::string> error;  // set when the configuration failed
};

struct GridResult {
  std::vector<GridEntry> entries;  // in request order
  std::optional<std::size_t> best;  // index into entries
};

/// Index of the best successful entry: highest R^2, then fewer hidden nodes,
/// then larger lambda, then subset name. Independent of entry order.
std::optional<std::size_t> best_entry(std::span<const GridEntry> entries);

/// Trains and scores one model per (subset, lambda, hidden) configuration.
/// Each codebook is built from the training records restricted to the subset.
GridResult grid_search(std::span<const ClaimRecord> train, std::span<const ClaimRecord> test,
                       const GridOptions& options);

/// Factor-coded linear Cox model: no hidden layer and no decay.
FittedModel main_effects_fit(std::span<const ClaimRecord> train, std::span<const Variable> subset,
                             std::size_t min_count = kDefaultMinCount, const TrainConfig& base = {});

struct StepwiseRow {
  Variable variable;
  std::size_t df = 0;
  double loglik = 0.0;
  double chi_square = 0.0;
  double p_value = 1.0;
};

/// Forward stepwise construction of the main-effects model: at each step
/// the variable with the largest likelihood-ratio chi-square is added.
std::vector<StepwiseRow> stepwise_report(std::span<const ClaimRecord> train, std::span<const Variable> candidates,
                                         std::size_t min_count = kDefaultMinCount);

void write_grid(std::ostream& out, const GridResult& result);
void write_stepwise(std::ostream& out, std::span<const StepwiseRow> rows);

}  // namespace claimnet
