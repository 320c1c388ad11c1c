#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace claimnet {

/// Sparse row-major input matrix (CSR). One-hot rows carry value 1 at the
/// active nodes; dense real-valued rows are stored the same way.
class InputMatrix {
 public:
  explicit InputMatrix(std::size_t columns = 0) : columns_(columns) { row_start_.push_back(0); }

  void add_row(std::span<const std::uint32_t> indices, std::span<const double> values);
  void add_one_hot_row(std::span<const std::uint32_t> indices);
  void add_dense_row(std::span<const double> values);

  std::size_t rows() const noexcept { return row_start_.size() - 1; }
  std::size_t columns() const noexcept { return columns_; }
  std::span<const std::uint32_t> indices(std::size_t row) const noexcept {
    return {index_.data() + row_start_[row], row_start_[row + 1] - row_start_[row]};
  }
  std::span<const double> values(std::size_t row) const noexcept {
    return {value_.data() + row_start_[row], row_start_[row + 1] - row_start_[row]};
  }

 private:
  std::size_t columns_;
  std::vector<std::size_t> row_start_;
  std::vector<std::uint32_t> index_;
  std::vector<double> value_;
};

/// All edge weights of the skip-layer perceptron, stored as one flat
/// parameter vector laid out as
///   [input->hidden (n_i+1) x n_h, row-major, row 0 = bias node]
///   [hidden->output n_h]
///   [input->output n_i+1, entry 0 = bias node]
class NetworkWeights {
 public:
  NetworkWeights() = default;
  NetworkWeights(std::size_t inputs, std::size_t hidden);
  NetworkWeights(std::size_t inputs, std::size_t hidden, std::vector<double> parameters);

  static std::size_t parameter_count(std::size_t inputs, std::size_t hidden) noexcept {
    return (inputs + 1) * hidden + hidden + inputs + 1;
  }

  std::size_t inputs() const noexcept { return inputs_; }
  std::size_t hidden() const noexcept { return hidden_; }

  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }

  /// Weight from input node i (0 = bias) to hidden node h.
  double& input_hidden(std::size_t i, std::size_t h) noexcept { return params_[i * hidden_ + h]; }
  double input_hidden(std::size_t i, std::size_t h) const noexcept { return params_[i * hidden_ + h]; }
  double& hidden_output(std::size_t h) noexcept { return params_[ho_offset() + h]; }
  double hidden_output(std::size_t h) const noexcept { return params_[ho_offset() + h]; }
  double& input_output(std::size_t i) noexcept { return params_[io_offset() + i]; }
  double input_output(std::size_t i) const noexcept { return params_[io_offset() + i]; }

  std::size_t ho_offset() const noexcept { return (inputs_ + 1) * hidden_; }
  std::size_t io_offset() const noexcept { return ho_offset() + hidden_; }

  /// True for parameters whose origin is the bias node.
  bool is_bias_parameter(std::size_t p) const noexcept;

  bool operator==(const NetworkWeights&) const = default;

 private:
  std::size_t inputs_ = 0;
  std::size_t hidden_ = 0;
  std::vector<double> params_;
};

/// Logistic activation exp(u) / (1 + exp(u)).
double logistic(double u) noexcept;

/// Prediction term for a dense input vector (bias excluded, length n_i).
double forward(const NetworkWeights& weights, std::span<const double> x);

/// Prediction term for one row of an input matrix.
double forward(const NetworkWeights& weights, std::span<const std::uint32_t> indices,
               std::span<const double> values);

std::vector<double> forward_all(const NetworkWeights& weights, const InputMatrix& inputs);

/// Accumulates d(sum_r g_r * eta_r)/dW into `out` (same layout as the
/// parameter vector), given per-row output sensitivities g.
void backpropagate(const NetworkWeights& weights, const InputMatrix& inputs, std::span<const double> output_grad,
                   std::span<double> out);

}  // namespace claimnet
