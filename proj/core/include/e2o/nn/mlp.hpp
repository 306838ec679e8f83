#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "e2o/random.hpp"

namespace e2o::nn {

enum class Activation : std::uint8_t { relu = 0, tanh = 1, identity = 2 };

/// Column-per-sample batch: rows are features, columns are samples.
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowMajorMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense feed-forward network.
///
/// Parameters live in one flat buffer: every layer's weight matrix (out x in,
/// row-major) in layer order, followed by every layer's bias vector. The
/// `weights()` and `biases()` views split that buffer.
template <typename Scalar>
class BasicMlp {
 public:
  /// Post-activation outputs of every layer; `outputs[0]` is the input batch.
  struct Tape {
    std::vector<Matrix<Scalar>> outputs;
  };

  struct Gradients {
    std::vector<Scalar> params;
    Matrix<Scalar> input;
  };

  BasicMlp() = default;

  /// Zero-initialized network. `activations` has one entry per layer (dims.size() - 1).
  BasicMlp(std::vector<int> layer_dims, std::vector<Activation> activations);

  /// Weights and biases drawn uniformly from [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  static BasicMlp uniform_init(std::vector<int> layer_dims, Activation hidden, Activation output, Rng& rng);

  int input_dim() const { return dims_.front(); }
  int output_dim() const { return dims_.back(); }
  std::size_t num_layers() const { return activations_.size(); }
  const std::vector<int>& layer_dims() const { return dims_; }
  const std::vector<Activation>& activations() const { return activations_; }

  std::size_t param_count() const { return params_.size(); }
  std::size_t weight_count() const { return weight_count_; }
  std::span<Scalar> params() { return params_; }
  std::span<const Scalar> params() const { return params_; }
  std::span<Scalar> weights() { return params().first(weight_count_); }
  std::span<const Scalar> weights() const { return params().first(weight_count_); }
  std::span<Scalar> biases() { return params().subspan(weight_count_); }
  std::span<const Scalar> biases() const { return params().subspan(weight_count_); }

  Matrix<Scalar> forward(const Matrix<Scalar>& input) const;
  Matrix<Scalar> forward(const Matrix<Scalar>& input, Tape& tape) const;

  /// Reverse pass over a recorded tape. Parameter gradients are accumulated
  /// into `param_grads` (length param_count(), or empty to skip them); the
  /// input gradient is returned when `want_input_grad` is set, otherwise an
  /// empty matrix.
  Matrix<Scalar> backward(const Tape& tape, const Matrix<Scalar>& upstream, std::span<Scalar> param_grads,
                          bool want_input_grad = true) const;

  /// Convenience form that replays the forward pass.
  Gradients backward(const Matrix<Scalar>& input, const Matrix<Scalar>& upstream) const;

  template <typename To>
  BasicMlp<To> cast() const {
    BasicMlp<To> out(dims_, activations_);
    auto dst = out.params();
    for (std::size_t i = 0; i < params_.size(); ++i) dst[i] = static_cast<To>(params_[i]);
    return out;
  }

  friend bool operator==(const BasicMlp&, const BasicMlp&) = default;

 private:
  void check_input(const Matrix<Scalar>& input) const;

  std::vector<int> dims_;
  std::vector<Activation> activations_;
  std::vector<std::size_t> weight_offsets_;
  std::vector<std::size_t> bias_offsets_;
  std::size_t weight_count_ = 0;
  std::vector<Scalar> params_;
};

extern template class BasicMlp<float>;
extern template class BasicMlp<double>;

using Mlp = BasicMlp<float>;
using MlpD = BasicMlp<double>;

/// Binary parameter snapshot ("E2OW").
std::vector<std::uint8_t> save_snapshot(const Mlp& net);
Mlp load_snapshot(std::span<const std::uint8_t> bytes);

}  // namespace e2o::nn
