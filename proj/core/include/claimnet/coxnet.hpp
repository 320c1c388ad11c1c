#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "claimnet/claims.hpp"
#include "claimnet/encoding.hpp"
#include "claimnet/network.hpp"
#include "claimnet/optimizer.hpp"
#include "claimnet/survival.hpp"

namespace claimnet {

/// Ratio of bias decay to weight decay used when none is given.
inline constexpr double kDefaultBiasDecayRatio = 1.0 / 25.0;

struct TrainConfig {
  double lambda = 0.0;
  std::optional<double> lambda_bias;  // defaults to lambda / 25
  std::size_t hidden = 0;
  int max_iterations = 500;
  double tolerance = 1e-8;            // relative objective decrease per iteration
  double gradient_tolerance = 1e-6;   // max-norm of the gradient
  double init_scale = 1.0;            // initial weights uniform on [-scale/2, scale/2]
  std::uint64_t seed = 1;

  double bias_lambda() const noexcept { return lambda_bias.value_or(lambda * kDefaultBiasDecayRatio); }
  bool operator==(const TrainConfig&) const = default;
};

/// Quadratic decay: lambda on weights leaving non-bias nodes (and all
/// hidden->output weights), lambda_b on weights leaving the bias node.
double penalty(const NetworkWeights& weights, double lambda, double lambda_b);

/// Penalized negative partial log-likelihood.
double objective(const NetworkWeights& weights, const InputMatrix& inputs, const RiskSets& risk, double lambda,
                 double lambda_b);

/// Exact gradient of objective(), same shape as the weights.
NetworkWeights gradient(const NetworkWeights& weights, const InputMatrix& inputs, const RiskSets& risk,
                        double lambda, double lambda_b);

/// objective() and its gradient in one pass; `grad` has parameter_count entries.
double objective_and_gradient(const NetworkWeights& weights, const InputMatrix& inputs, const RiskSets& risk,
                              double lambda, double lambda_b, std::span<double> grad);

/// Seeded uniform initialization on [-scale/2, scale/2].
NetworkWeights initial_weights(std::size_t inputs, std::size_t hidden, double scale, std::uint64_t seed);

struct NetworkFit {
  NetworkWeights weights;
  std::vector<double> etas;  // final prediction terms of the training rows
  double objective = 0.0;
  double loglik = 0.0;
  int iterations = 0;
  StopReason stop_reason = StopReason::MaxIterations;
  std::vector<double> trace;
};

/// Minimizes the penalized objective over a prepared input matrix.
NetworkFit train_network(const InputMatrix& inputs, const RiskSets& risk, const TrainConfig& config);

/// The deployable prediction object.
struct FittedModel {
  NetworkWeights weights;
  BaselineHazard baseline;
  Codebook codebook;
  TrainConfig config;
  double objective = 0.0;
  double loglik = 0.0;
  int iterations = 0;
  StopReason stop_reason = StopReason::MaxIterations;
  /// Consolidated categories of every training record, for partial-input matching.
  std::vector<CategoryProfile> training_profiles;

  bool operator==(const FittedModel&) const = default;
};

InputMatrix encode_inputs(std::span<const ClaimRecord> records, const Codebook& codebook);

/// Trains the network on the records and attaches the Breslow baseline at the
/// final prediction terms. Deterministic for a fixed config.seed.
FittedModel train(std::span<const ClaimRecord> records, const Codebook& codebook, const TrainConfig& config);

double predict_eta(const FittedModel& model, const Covariates& covariates);
inline double predict_eta(const FittedModel& model, const ClaimRecord& record) {
  return predict_eta(model, record.covariates);
}
double predict_eta(const FittedModel& model, const CategoryProfile& profile);

}  // namespace claimnet
