#include "claimnet/network.hpp"

#include <cmath>
#include <string>

#include "claimnet/errors.hpp"

namespace claimnet {

void InputMatrix::add_row(std::span<const std::uint32_t> indices, std::span<const double> values) {
  if (indices.size() != values.size()) throw Error("InputMatrix: index/value length mismatch");
  for (const auto i : indices) {
    if (i >= columns_) throw Error("InputMatrix: column " + std::to_string(i) + " out of range");
  }
  index_.insert(index_.end(), indices.begin(), indices.end());
  value_.insert(value_.end(), values.begin(), values.end());
  row_start_.push_back(index_.size());
}

void InputMatrix::add_one_hot_row(std::span<const std::uint32_t> indices) {
  const std::vector<double> ones(indices.size(), 1.0);
  add_row(indices, ones);
}

void InputMatrix::add_dense_row(std::span<const double> values) {
  if (values.size() != columns_) throw Error("InputMatrix: dense row has wrong length");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == 0.0) continue;
    index_.push_back(static_cast<std::uint32_t>(i));
    value_.push_back(values[i]);
  }
  row_start_.push_back(index_.size());
}

NetworkWeights::NetworkWeights(std::size_t inputs, std::size_t hidden)
    : inputs_(inputs), hidden_(hidden), params_(parameter_count(inputs, hidden), 0.0) {}

NetworkWeights::NetworkWeights(std::size_t inputs, std::size_t hidden, std::vector<double> parameters)
    : inputs_(inputs), hidden_(hidden), params_(std::move(parameters)) {
  if (params_.size() != parameter_count(inputs, hidden)) {
    throw Error("NetworkWeights: expected " + std::to_string(parameter_count(inputs, hidden)) +
                " parameters, got " + std::to_string(params_.size()));
  }
}

bool NetworkWeights::is_bias_parameter(std::size_t p) const noexcept {
  if (p < hidden_) return true;  // row 0 of input->hidden
  return p == io_offset();
}

double logistic(double u) noexcept {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

namespace {

double forward_row(const NetworkWeights& w, std::span<const std::uint32_t> indices, std::span<const double> values,
                   std::vector<double>& hidden) {
  const std::size_t nh = w.hidden();
  const auto params = w.parameters();
  double eta = w.input_output(0);
  for (std::size_t k = 0; k < indices.size(); ++k) eta += values[k] * w.input_output(indices[k] + 1);
  if (nh == 0) return eta;
  hidden.assign(params.begin(), params.begin() + static_cast<std::ptrdiff_t>(nh));
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const double* row = params.data() + (indices[k] + 1) * nh;
    const double v = values[k];
    for (std::size_t h = 0; h < nh; ++h) hidden[h] += v * row[h];
  }
  for (std::size_t h = 0; h < nh; ++h) {
    hidden[h] = logistic(hidden[h]);
    eta += w.hidden_output(h) * hidden[h];
  }
  return eta;
}

}  // namespace

double forward(const NetworkWeights& weights, std::span<const double> x) {
  if (x.size() != weights.inputs()) {
    throw Error("forward: input has length " + std::to_string(x.size()) + ", network expects " +
                std::to_string(weights.inputs()));
  }
  std::vector<std::uint32_t> idx;
  std::vector<double> val;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) throw Error("forward: non-finite input");
    if (x[i] != 0.0) {
      idx.push_back(static_cast<std::uint32_t>(i));
      val.push_back(x[i]);
    }
  }
  return forward(weights, idx, val);
}

double forward(const NetworkWeights& weights, std::span<const std::uint32_t> indices,
               std::span<const double> values) {
  for (const auto i : indices) {
    if (i >= weights.inputs()) throw Error("forward: input index out of range");
  }
  std::vector<double> hidden;
  return forward_row(weights, indices, values, hidden);
}

std::vector<double> forward_all(const NetworkWeights& weights, const InputMatrix& inputs) {
  if (inputs.columns() != weights.inputs()) throw Error("forward_all: input width does not match network");
  std::vector<double> etas(inputs.rows());
  std::vector<double> hidden;
  for (std::size_t r = 0; r < inputs.rows(); ++r) {
    etas[r] = forward_row(weights, inputs.indices(r), inputs.values(r), hidden);
  }
  return etas;
}

void backpropagate(const NetworkWeights& weights, const InputMatrix& inputs, std::span<const double> output_grad,
                   std::span<double> out) {
  const std::size_t nh = weights.hidden();
  const auto params = weights.parameters();
  const std::size_t ho = weights.ho_offset();
  const std::size_t io = weights.io_offset();
  std::vector<double> hidden(nh);
  std::vector<double> delta(nh);
  for (std::size_t r = 0; r < inputs.rows(); ++r) {
    const double g = output_grad[r];
    const auto idx = inputs.indices(r);
    const auto val = inputs.values(r);
    out[io] += g;
    for (std::size_t k = 0; k < idx.size(); ++k) out[io + idx[k] + 1] += g * val[k];
    if (nh == 0) continue;
    for (std::size_t h = 0; h < nh; ++h) hidden[h] = params[h];
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const double* row = params.data() + (idx[k] + 1) * nh;
      for (std::size_t h = 0; h < nh; ++h) hidden[h] += val[k] * row[h];
    }
    for (std::size_t h = 0; h < nh; ++h) {
      const double phi = logistic(hidden[h]);
      out[ho + h] += g * phi;
      delta[h] = g * params[ho + h] * phi * (1.0 - phi);
      out[h] += delta[h];
    }
    for (std::size_t k = 0; k < idx.size(); ++k) {
      double* row = out.data() + (idx[k] + 1) * nh;
      for (std::size_t h = 0; h < nh; ++h) row[h] += delta[h] * val[k];
    }
  }
}

}  // namespace claimnet
