#include "e2o/nn/mlp.hpp"

#include <cmath>
#include <string>

#include "e2o/errors.hpp"
#include "e2o/io/binary.hpp"

namespace e2o::nn {

namespace {

constexpr std::uint32_t kSnapshotVersion = 1;

template <typename Scalar>
void apply_activation(Matrix<Scalar>& z, Activation act) {
  switch (act) {
    case Activation::relu:
      z = z.cwiseMax(Scalar(0));
      break;
    case Activation::tanh:
      z = z.array().tanh().matrix();
      break;
    case Activation::identity:
      break;
  }
}

// Multiplies `grad` in place by the activation derivative expressed through the layer output.
template <typename Scalar>
void scale_by_derivative(Matrix<Scalar>& grad, const Matrix<Scalar>& output, Activation act) {
  switch (act) {
    case Activation::relu:
      grad = (output.array() > Scalar(0)).select(grad, Scalar(0));
      break;
    case Activation::tanh:
      grad.array() *= Scalar(1) - output.array().square();
      break;
    case Activation::identity:
      break;
  }
}

}  // namespace

template <typename Scalar>
BasicMlp<Scalar>::BasicMlp(std::vector<int> layer_dims, std::vector<Activation> activations)
    : dims_(std::move(layer_dims)), activations_(std::move(activations)) {
  if (dims_.size() < 2) throw ShapeError("an mlp needs at least an input and an output width");
  if (activations_.size() != dims_.size() - 1) {
    throw ShapeError("expected " + std::to_string(dims_.size() - 1) + " activations, got " +
                     std::to_string(activations_.size()));
  }
  for (int d : dims_) {
    if (d <= 0) throw ShapeError("layer widths must be positive");
  }
  std::size_t bias_count = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    weight_offsets_.push_back(weight_count_);
    weight_count_ += static_cast<std::size_t>(dims_[l]) * static_cast<std::size_t>(dims_[l + 1]);
  }
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    bias_offsets_.push_back(weight_count_ + bias_count);
    bias_count += static_cast<std::size_t>(dims_[l + 1]);
  }
  params_.assign(weight_count_ + bias_count, Scalar(0));
}

template <typename Scalar>
BasicMlp<Scalar> BasicMlp<Scalar>::uniform_init(std::vector<int> layer_dims, Activation hidden, Activation output,
                                                Rng& rng) {
  std::vector<Activation> acts(layer_dims.size() - 1, hidden);
  if (!acts.empty()) acts.back() = output;
  BasicMlp net(std::move(layer_dims), std::move(acts));
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(net.dims_[l]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    const std::size_t n_w = static_cast<std::size_t>(net.dims_[l]) * net.dims_[l + 1];
    for (std::size_t i = 0; i < n_w; ++i) net.params_[net.weight_offsets_[l] + i] = static_cast<Scalar>(dist(rng));
    for (int i = 0; i < net.dims_[l + 1]; ++i) net.params_[net.bias_offsets_[l] + i] = static_cast<Scalar>(dist(rng));
  }
  return net;
}

template <typename Scalar>
void BasicMlp<Scalar>::check_input(const Matrix<Scalar>& input) const {
  if (input.rows() != dims_.front()) {
    throw ShapeError("mlp input width " + std::to_string(input.rows()) + " does not match expected width " +
                     std::to_string(dims_.front()));
  }
}

template <typename Scalar>
Matrix<Scalar> BasicMlp<Scalar>::forward(const Matrix<Scalar>& input) const {
  check_input(input);
  Matrix<Scalar> x = input;
  for (std::size_t l = 0; l < num_layers(); ++l) {
    Eigen::Map<const RowMajorMatrix<Scalar>> w(params_.data() + weight_offsets_[l], dims_[l + 1], dims_[l]);
    Eigen::Map<const Vector<Scalar>> b(params_.data() + bias_offsets_[l], dims_[l + 1]);
    Matrix<Scalar> z = w * x;
    z.colwise() += b;
    apply_activation(z, activations_[l]);
    x = std::move(z);
  }
  return x;
}

template <typename Scalar>
Matrix<Scalar> BasicMlp<Scalar>::forward(const Matrix<Scalar>& input, Tape& tape) const {
  check_input(input);
  tape.outputs.resize(num_layers() + 1);
  tape.outputs[0] = input;
  for (std::size_t l = 0; l < num_layers(); ++l) {
    Eigen::Map<const RowMajorMatrix<Scalar>> w(params_.data() + weight_offsets_[l], dims_[l + 1], dims_[l]);
    Eigen::Map<const Vector<Scalar>> b(params_.data() + bias_offsets_[l], dims_[l + 1]);
    Matrix<Scalar>& z = tape.outputs[l + 1];
    z.noalias() = w * tape.outputs[l];
    z.colwise() += b;
    apply_activation(z, activations_[l]);
  }
  return tape.outputs.back();
}

template <typename Scalar>
Matrix<Scalar> BasicMlp<Scalar>::backward(const Tape& tape, const Matrix<Scalar>& upstream,
                                          std::span<Scalar> param_grads, bool want_input_grad) const {
  if (tape.outputs.size() != num_layers() + 1) throw ShapeError("tape does not belong to this network");
  const Matrix<Scalar>& out = tape.outputs.back();
  if (upstream.rows() != out.rows() || upstream.cols() != out.cols()) {
    throw ShapeError("upstream gradient shape " + std::to_string(upstream.rows()) + "x" +
                     std::to_string(upstream.cols()) + " does not match output shape " + std::to_string(out.rows()) +
                     "x" + std::to_string(out.cols()));
  }
  const bool want_param_grads = !param_grads.empty();
  if (want_param_grads && param_grads.size() != params_.size()) {
    throw ShapeError("parameter gradient buffer has " + std::to_string(param_grads.size()) + " entries, expected " +
                     std::to_string(params_.size()));
  }

  Matrix<Scalar> delta = upstream;
  scale_by_derivative(delta, out, activations_.back());
  for (std::size_t l = num_layers(); l-- > 0;) {
    Eigen::Map<const RowMajorMatrix<Scalar>> w(params_.data() + weight_offsets_[l], dims_[l + 1], dims_[l]);
    if (want_param_grads) {
      Eigen::Map<RowMajorMatrix<Scalar>> gw(param_grads.data() + weight_offsets_[l], dims_[l + 1], dims_[l]);
      Eigen::Map<Vector<Scalar>> gb(param_grads.data() + bias_offsets_[l], dims_[l + 1]);
      gw.noalias() += delta * tape.outputs[l].transpose();
      // Aligned temporary: summation order must not depend on the buffer address.
      const Vector<Scalar> bias_grad = delta.rowwise().sum();
      gb += bias_grad;
    }
    if (l == 0 && !want_input_grad) return {};
    Matrix<Scalar> prev = w.transpose() * delta;
    if (l == 0) return prev;
    scale_by_derivative(prev, tape.outputs[l], activations_[l - 1]);
    delta = std::move(prev);
  }
  return {};
}

template <typename Scalar>
typename BasicMlp<Scalar>::Gradients BasicMlp<Scalar>::backward(const Matrix<Scalar>& input,
                                                                const Matrix<Scalar>& upstream) const {
  Tape tape;
  forward(input, tape);
  Gradients g;
  g.params.assign(params_.size(), Scalar(0));
  g.input = backward(tape, upstream, g.params, true);
  return g;
}

template class BasicMlp<float>;
template class BasicMlp<double>;

std::vector<std::uint8_t> save_snapshot(const Mlp& net) {
  io::BinaryWriter w;
  w.magic("E2OW");
  w.u32(kSnapshotVersion);
  w.u32(static_cast<std::uint32_t>(net.layer_dims().size()));
  for (int d : net.layer_dims()) w.u32(static_cast<std::uint32_t>(d));
  for (Activation a : net.activations()) w.u8(static_cast<std::uint8_t>(a));
  w.f32_array(net.weights());
  w.f32_array(net.biases());
  return std::move(w).bytes();
}

Mlp load_snapshot(std::span<const std::uint8_t> bytes) {
  io::BinaryReader r(bytes);
  r.expect_magic("E2OW");
  if (const auto v = r.u32(); v != kSnapshotVersion) {
    throw FormatError("unsupported E2OW version " + std::to_string(v));
  }
  const std::uint32_t n_dims = r.u32();
  if (n_dims < 2 || n_dims > 64) throw FormatError("implausible layer count in snapshot");
  std::vector<int> dims(n_dims);
  for (auto& d : dims) {
    const std::uint32_t v = r.u32();
    if (v == 0 || v > (1u << 20)) throw FormatError("implausible layer width in snapshot");
    d = static_cast<int>(v);
  }
  std::vector<Activation> acts(n_dims - 1);
  for (auto& a : acts) {
    const std::uint8_t code = r.u8();
    if (code > static_cast<std::uint8_t>(Activation::identity)) throw FormatError("unknown activation code");
    a = static_cast<Activation>(code);
  }
  Mlp net(std::move(dims), std::move(acts));
  r.f32_array(net.weights());
  r.f32_array(net.biases());
  r.expect_end();
  return net;
}

}  // namespace e2o::nn
