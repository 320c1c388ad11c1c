#include "claimnet/coxnet.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <spdlog/spdlog.h>

#include "claimnet/errors.hpp"
#include "claimnet/random.hpp"

namespace claimnet {

namespace {

void check_shapes(const NetworkWeights& weights, const InputMatrix& inputs, const RiskSets& risk) {
  if (inputs.columns() != weights.inputs()) {
    throw Error("input width " + std::to_string(inputs.columns()) + " does not match network inputs " +
                std::to_string(weights.inputs()));
  }
  if (inputs.rows() != risk.size()) throw Error("input rows do not match outcome count");
}

void validate(const TrainConfig& c) {
  if (!(c.lambda >= 0.0) || !(c.bias_lambda() >= 0.0)) throw Error("decay parameters must be nonnegative");
  if (c.max_iterations < 0) throw Error("max_iterations must be nonnegative");
  if (!(c.init_scale >= 0.0)) throw Error("init_scale must be nonnegative");
  if (c.bias_lambda() > c.lambda) {
    spdlog::warn("bias decay {} exceeds weight decay {}", c.bias_lambda(), c.lambda);
  }
}

}  // namespace

double penalty(const NetworkWeights& weights, double lambda, double lambda_b) {
  const auto p = weights.parameters();
  double main = 0.0;
  double bias = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    (weights.is_bias_parameter(k) ? bias : main) += p[k] * p[k];
  }
  return lambda * main + lambda_b * bias;
}

double objective(const NetworkWeights& weights, const InputMatrix& inputs, const RiskSets& risk, double lambda,
                 double lambda_b) {
  check_shapes(weights, inputs, risk);
  const auto etas = forward_all(weights, inputs);
  return -cox_partial_loglik(etas, risk) + penalty(weights, lambda, lambda_b);
}

double objective_and_gradient(const NetworkWeights& weights, const InputMatrix& inputs, const RiskSets& risk,
                              double lambda, double lambda_b, std::span<double> grad) {
  check_shapes(weights, inputs, risk);
  const auto etas = forward_all(weights, inputs);
  std::vector<double> d_eta(etas.size());
  const double loglik = cox_partial_loglik_gradient(etas, risk, d_eta);
  for (double& v : d_eta) v = -v;
  std::fill(grad.begin(), grad.end(), 0.0);
  backpropagate(weights, inputs, d_eta, grad);
  const auto p = weights.parameters();
  for (std::size_t k = 0; k < p.size(); ++k) {
    grad[k] += 2.0 * (weights.is_bias_parameter(k) ? lambda_b : lambda) * p[k];
  }
  return -loglik + penalty(weights, lambda, lambda_b);
}

NetworkWeights gradient(const NetworkWeights& weights, const InputMatrix& inputs, const RiskSets& risk,
                        double lambda, double lambda_b) {
  NetworkWeights g(weights.inputs(), weights.hidden());
  objective_and_gradient(weights, inputs, risk, lambda, lambda_b, g.parameters());
  return g;
}

NetworkWeights initial_weights(std::size_t inputs, std::size_t hidden, double scale, std::uint64_t seed) {
  NetworkWeights w(inputs, hidden);
  Rng rng(seed);
  for (double& v : w.parameters()) v = scale * (rng.uniform() - 0.5);
  return w;
}

NetworkFit train_network(const InputMatrix& inputs, const RiskSets& risk, const TrainConfig& config) {
  validate(config);
  if (risk.size() < 2) throw Error("train: need at least 2 records");
  if (risk.event_count() == 0) throw Error("train: no events (all records censored)");

  const double lambda = config.lambda;
  const double lambda_b = config.bias_lambda();
  const auto start = initial_weights(inputs.columns(), config.hidden, config.init_scale, config.seed);

  Objective f = [&](std::span<const double> x, std::span<double> g) {
    NetworkWeights w(inputs.columns(), config.hidden, std::vector<double>(x.begin(), x.end()));
    return objective_and_gradient(w, inputs, risk, lambda, lambda_b, g);
  };
  LbfgsOptions opts;
  opts.max_iterations = config.max_iterations;
  opts.relative_tolerance = config.tolerance;
  opts.gradient_tolerance = config.gradient_tolerance;
  auto result = minimize_lbfgs(f, std::vector<double>(start.parameters().begin(), start.parameters().end()), opts);

  NetworkFit fit;
  fit.weights = NetworkWeights(inputs.columns(), config.hidden, std::move(result.x));
  fit.etas = forward_all(fit.weights, inputs);
  fit.loglik = cox_partial_loglik(fit.etas, risk);
  fit.objective = result.value;
  fit.iterations = result.iterations;
  fit.stop_reason = result.reason;
  fit.trace = std::move(result.trace);
  return fit;
}

InputMatrix encode_inputs(std::span<const ClaimRecord> records, const Codebook& codebook) {
  InputMatrix m(codebook.input_count());
  for (const auto& r : records) m.add_one_hot_row(active_inputs(codebook.profile(r.covariates), codebook));
  return m;
}

FittedModel train(std::span<const ClaimRecord> records, const Codebook& codebook, const TrainConfig& config) {
  const auto outcomes = outcomes_of(records);
  const RiskSets risk(outcomes.durations, outcomes.events);
  const auto inputs = encode_inputs(records, codebook);
  auto fit = train_network(inputs, risk, config);

  FittedModel model;
  model.baseline = breslow_baseline(risk, fit.etas);
  model.weights = std::move(fit.weights);
  model.codebook = codebook;
  model.config = config;
  model.config.lambda_bias = config.bias_lambda();
  model.objective = fit.objective;
  model.loglik = fit.loglik;
  model.iterations = fit.iterations;
  model.stop_reason = fit.stop_reason;
  model.training_profiles.reserve(records.size());
  for (const auto& r : records) model.training_profiles.push_back(codebook.profile(r.covariates));
  spdlog::debug("train: n_h={} lambda={} iterations={} stop={} objective={}", config.hidden, config.lambda,
                model.iterations, to_string(model.stop_reason), model.objective);
  return model;
}

double predict_eta(const FittedModel& model, const CategoryProfile& profile) {
  const auto active = active_inputs(profile, model.codebook);
  const std::vector<double> ones(active.size(), 1.0);
  return forward(model.weights, active, ones);
}

double predict_eta(const FittedModel& model, const Covariates& covariates) {
  return predict_eta(model, model.codebook.profile(covariates));
}

}  // namespace claimnet
