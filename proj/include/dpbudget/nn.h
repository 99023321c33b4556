// Copyright 2026 The dpbudget Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// A small fully connected classifier with softmax cross-entropy loss and
// per-example gradients.
//
// Parameters are addressed through one flat vector: for each layer in order,
// the weight matrix (fan_in x fan_out) in row-major order followed by the
// bias. Per-example gradients use the same layout, one example per row.

#ifndef DPBUDGET_NN_H_
#define DPBUDGET_NN_H_

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "dpbudget/errors.h"
#include "dpbudget/random.h"

namespace dpbudget {

enum class Activation { kRelu, kNone };

template <typename Scalar = double>
class Mlp {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  struct Layer {
    Matrix weight;  // fan_in x fan_out
    Vector bias;    // fan_out
    Activation activation = Activation::kRelu;
  };

  Mlp() = default;

  explicit Mlp(std::vector<Layer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw DomainError("model needs at least one layer");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const Layer& layer = layers_[l];
      if (layer.bias.size() != layer.weight.cols()) throw DomainError("bias size must equal fan_out");
      if (l > 0 && layers_[l - 1].weight.cols() != layer.weight.rows()) {
        throw DomainError("layer " + std::to_string(l) + " fan_in does not match previous fan_out");
      }
      if (!layer.weight.allFinite() || !layer.bias.allFinite()) throw DomainError("non-finite parameter");
    }
    if (layers_.back().activation != Activation::kNone) {
      throw DomainError("final layer must produce raw logits");
    }
  }

  // Widths (d, h1, ..., classes); ReLU on hidden layers. Weights are uniform
  // in +-sqrt(6 / (fan_in + fan_out)), biases zero.
  static Mlp glorot(std::span<const int> widths, Rng& rng) {
    std::vector<Layer> layers = shaped(widths);
    for (Layer& layer : layers) {
      const Scalar limit =
          std::sqrt(Scalar(6) / static_cast<Scalar>(layer.weight.rows() + layer.weight.cols()));
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
        for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
          layer.weight(r, c) = limit * static_cast<Scalar>(2.0 * rng.uniform() - 1.0);
        }
      }
    }
    return Mlp(std::move(layers));
  }

  static Mlp zeros(std::span<const int> widths) { return Mlp(shaped(widths)); }

  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& mutable_layers() { return layers_; }
  Eigen::Index input_dim() const { return layers_.front().weight.rows(); }
  Eigen::Index output_dim() const { return layers_.back().weight.cols(); }

  Eigen::Index parameter_count() const {
    Eigen::Index n = 0;
    for (const Layer& layer : layers_) n += layer.weight.size() + layer.bias.size();
    return n;
  }

  // Logits for one example.
  Vector forward(const Vector& x) const {
    if (x.size() != input_dim()) throw DomainError("input dimension mismatch");
    Vector h = x;
    for (const Layer& layer : layers_) {
      Vector z = layer.weight.transpose() * h + layer.bias;
      h = layer.activation == Activation::kRelu ? Vector(z.cwiseMax(Scalar(0))) : z;
    }
    return h;
  }

  // Logits for a batch; one example per row.
  Matrix forward_batch(const Matrix& inputs) const {
    if (inputs.cols() != input_dim()) throw DomainError("input dimension mismatch");
    Matrix h = inputs;
    for (const Layer& layer : layers_) {
      Matrix z = (h * layer.weight).rowwise() + layer.bias.transpose();
      h = layer.activation == Activation::kRelu ? Matrix(z.cwiseMax(Scalar(0))) : z;
    }
    return h;
  }

  Vector flatten() const {
    Vector flat(parameter_count());
    Eigen::Index offset = 0;
    for (const Layer& layer : layers_) {
      Eigen::Map<RowMatrix>(flat.data() + offset, layer.weight.rows(), layer.weight.cols()) = layer.weight;
      offset += layer.weight.size();
      flat.segment(offset, layer.bias.size()) = layer.bias;
      offset += layer.bias.size();
    }
    return flat;
  }

  void assign_flat(const Vector& flat) {
    if (flat.size() != parameter_count()) throw DomainError("parameter vector size mismatch");
    Eigen::Index offset = 0;
    for (Layer& layer : layers_) {
      layer.weight = Eigen::Map<const RowMatrix>(flat.data() + offset, layer.weight.rows(), layer.weight.cols());
      offset += layer.weight.size();
      layer.bias = flat.segment(offset, layer.bias.size());
      offset += layer.bias.size();
    }
  }

  // [begin, end) of each layer's parameters in the flat layout.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> layer_ranges() const {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> ranges;
    Eigen::Index offset = 0;
    for (const Layer& layer : layers_) {
      const Eigen::Index n = layer.weight.size() + layer.bias.size();
      ranges.emplace_back(offset, offset + n);
      offset += n;
    }
    return ranges;
  }

 private:
  static std::vector<Layer> shaped(std::span<const int> widths) {
    if (widths.size() < 2) throw DomainError("need at least input and output widths");
    std::vector<Layer> layers;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
      if (widths[l] < 1 || widths[l + 1] < 1) throw DomainError("layer widths must be positive");
      Layer layer;
      layer.weight = Matrix::Zero(widths[l], widths[l + 1]);
      layer.bias = Vector::Zero(widths[l + 1]);
      layer.activation = l + 2 == widths.size() ? Activation::kNone : Activation::kRelu;
      layers.push_back(std::move(layer));
    }
    return layers;
  }

  std::vector<Layer> layers_;
};

// Row-wise softmax with the max subtracted first.
template <typename Derived>
auto softmax_rows(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> shifted =
      logits.colwise() - logits.rowwise().maxCoeff();
  shifted = shifted.array().exp().matrix();
  return Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>(
      shifted.array().colwise() / shifted.rowwise().sum().array());
}

// -log softmax(logits)[label], via log-sum-exp.
template <typename Derived>
typename Derived::Scalar cross_entropy(const Eigen::MatrixBase<Derived>& logits, int label) {
  const auto top = logits.maxCoeff();
  const auto lse = top + std::log((logits.array() - top).exp().sum());
  return lse - logits(label);
}

inline void check_labels(Eigen::Index rows, std::span<const int> labels, Eigen::Index classes) {
  if (static_cast<Eigen::Index>(labels.size()) != rows) throw DomainError("one label per example required");
  for (int y : labels) {
    if (y < 0 || y >= classes) throw DomainError("label out of range");
  }
}

template <typename Scalar>
Scalar mean_loss(const Mlp<Scalar>& model, const typename Mlp<Scalar>::Matrix& inputs,
                 std::span<const int> labels) {
  check_labels(inputs.rows(), labels, model.output_dim());
  if (inputs.rows() == 0) throw DomainError("empty batch");
  const auto logits = model.forward_batch(inputs);
  Scalar total = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) total += cross_entropy(logits.row(i), labels[i]);
  return total / static_cast<Scalar>(logits.rows());
}

template <typename Scalar>
std::vector<int> predict(const Mlp<Scalar>& model, const typename Mlp<Scalar>::Matrix& inputs) {
  const auto logits = model.forward_batch(inputs);
  std::vector<int> out(logits.rows());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index arg;
    logits.row(i).maxCoeff(&arg);
    out[i] = static_cast<int>(arg);
  }
  return out;
}

template <typename Scalar>
double accuracy(const Mlp<Scalar>& model, const typename Mlp<Scalar>::Matrix& inputs,
                std::span<const int> labels) {
  if (inputs.rows() == 0) return 0.0;
  const std::vector<int> predicted = predict(model, inputs);
  long correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) correct += predicted[i] == labels[i];
  return static_cast<double>(correct) / static_cast<double>(predicted.size());
}

namespace detail {

// Forward pass keeping every layer's input and pre-activation, then the
// backward recursion. `visit(l, inputs, deltas)` receives, for layer l, the
// batch of layer inputs and dLoss_i/dz for every example i (unnormalized,
// i.e. the gradient of each example's own loss).
template <typename Scalar, typename Visit>
void backprop(const Mlp<Scalar>& model, const typename Mlp<Scalar>::Matrix& inputs,
              std::span<const int> labels, Visit&& visit) {
  using Matrix = typename Mlp<Scalar>::Matrix;
  const auto& layers = model.layers();
  std::vector<Matrix> layer_inputs;
  std::vector<Matrix> pre;
  Matrix h = inputs;
  for (const auto& layer : layers) {
    layer_inputs.push_back(h);
    Matrix z = (h * layer.weight).rowwise() + layer.bias.transpose();
    h = layer.activation == Activation::kRelu ? Matrix(z.cwiseMax(Scalar(0))) : z;
    pre.push_back(std::move(z));
  }
  Matrix delta = softmax_rows(h);
  for (Eigen::Index i = 0; i < delta.rows(); ++i) delta(i, labels[i]) -= Scalar(1);
  for (std::size_t l = layers.size(); l-- > 0;) {
    visit(l, layer_inputs[l], delta);
    if (l == 0) break;
    Matrix back = delta * layers[l].weight.transpose();
    if (layers[l - 1].activation == Activation::kRelu) {
      // ReLU subgradient at 0 is taken as 0.
      back = (pre[l - 1].array() > Scalar(0)).select(back, Scalar(0));
    }
    delta = std::move(back);
  }
}

}  // namespace detail

// Gradient of each example's own loss; row i holds example i's flat gradient.
template <typename Scalar>
typename Mlp<Scalar>::Matrix per_example_gradients(const Mlp<Scalar>& model,
                                                   const typename Mlp<Scalar>::Matrix& inputs,
                                                   std::span<const int> labels) {
  using Matrix = typename Mlp<Scalar>::Matrix;
  using RowMatrix = typename Mlp<Scalar>::RowMatrix;
  using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
  if (inputs.rows() == 0) throw DomainError("empty batch");
  if (inputs.cols() != model.input_dim()) throw DomainError("input dimension mismatch");
  check_labels(inputs.rows(), labels, model.output_dim());

  const auto ranges = model.layer_ranges();
  Matrix grads(inputs.rows(), model.parameter_count());
  detail::backprop(model, inputs, labels, [&](std::size_t l, const Matrix& in, const Matrix& delta) {
    const Eigen::Index fan_in = in.cols();
    const Eigen::Index fan_out = delta.cols();
    const Eigen::Index begin = ranges[l].first;
    RowVector outer(fan_in * fan_out);
    for (Eigen::Index i = 0; i < in.rows(); ++i) {
      Eigen::Map<RowMatrix>(outer.data(), fan_in, fan_out) = in.row(i).transpose() * delta.row(i);
      grads.row(i).segment(begin, fan_in * fan_out) = outer;
      grads.row(i).segment(begin + fan_in * fan_out, fan_out) = delta.row(i);
    }
  });
  return grads;
}

// Gradient of the mean loss over the batch, accumulated with matrix
// products rather than per-example outer products.
template <typename Scalar>
typename Mlp<Scalar>::Vector batch_gradient(const Mlp<Scalar>& model,
                                            const typename Mlp<Scalar>::Matrix& inputs,
                                            std::span<const int> labels) {
  using Matrix = typename Mlp<Scalar>::Matrix;
  using RowMatrix = typename Mlp<Scalar>::RowMatrix;
  if (inputs.rows() == 0) throw DomainError("empty batch");
  if (inputs.cols() != model.input_dim()) throw DomainError("input dimension mismatch");
  check_labels(inputs.rows(), labels, model.output_dim());

  const auto ranges = model.layer_ranges();
  typename Mlp<Scalar>::Vector grad(model.parameter_count());
  const Scalar scale = Scalar(1) / static_cast<Scalar>(inputs.rows());
  detail::backprop(model, inputs, labels, [&](std::size_t l, const Matrix& in, const Matrix& delta) {
    const Eigen::Index begin = ranges[l].first;
    const Eigen::Index nw = in.cols() * delta.cols();
    Eigen::Map<RowMatrix>(grad.data() + begin, in.cols(), delta.cols()) = scale * (in.transpose() * delta);
    grad.segment(begin + nw, delta.cols()) = scale * delta.colwise().sum().transpose();
  });
  return grad;
}

// theta <- theta - eta * gradient.
template <typename Scalar>
Mlp<Scalar> sgd_step(Mlp<Scalar> model, const typename Mlp<Scalar>::Vector& gradient, Scalar eta) {
  if (gradient.size() != model.parameter_count()) throw DomainError("gradient size mismatch");
  model.assign_flat(model.flatten() - eta * gradient);
  return model;
}

// Text checkpoint:
//   dpbudget-mlp 1
//   layers <L>
//   <fan_in> <fan_out> <relu|none>      (L lines)
//   <flat parameters, one per line, max_digits10>
inline constexpr int kCheckpointVersion = 1;

template <typename Scalar>
void write_checkpoint(std::ostream& out, const Mlp<Scalar>& model) {
  out << "dpbudget-mlp " << kCheckpointVersion << "\n";
  out << "layers " << model.layers().size() << "\n";
  for (const auto& layer : model.layers()) {
    out << layer.weight.rows() << ' ' << layer.weight.cols() << ' '
        << (layer.activation == Activation::kRelu ? "relu" : "none") << "\n";
  }
  out << std::setprecision(std::numeric_limits<Scalar>::max_digits10);
  const auto flat = model.flatten();
  for (Eigen::Index i = 0; i < flat.size(); ++i) out << flat(i) << "\n";
}

template <typename Scalar = double>
Mlp<Scalar> read_checkpoint(std::istream& in) {
  std::string magic;
  int version = 0;
  std::size_t count = 0;
  std::string word;
  if (!(in >> magic >> version) || magic != "dpbudget-mlp") throw ParseError("not a model checkpoint", 1);
  if (version != kCheckpointVersion) throw ParseError("unsupported checkpoint version", 1);
  if (!(in >> word >> count) || word != "layers" || count == 0) throw ParseError("bad layer count", 2);
  std::vector<typename Mlp<Scalar>::Layer> layers(count);
  for (std::size_t l = 0; l < count; ++l) {
    Eigen::Index rows = 0, cols = 0;
    std::string act;
    if (!(in >> rows >> cols >> act) || rows < 1 || cols < 1 || (act != "relu" && act != "none")) {
      throw ParseError("bad layer header", static_cast<int>(3 + l));
    }
    layers[l].weight = Mlp<Scalar>::Matrix::Zero(rows, cols);
    layers[l].bias = Mlp<Scalar>::Vector::Zero(cols);
    layers[l].activation = act == "relu" ? Activation::kRelu : Activation::kNone;
  }
  Mlp<Scalar> model(std::move(layers));
  typename Mlp<Scalar>::Vector flat(model.parameter_count());
  for (Eigen::Index i = 0; i < flat.size(); ++i) {
    if (!(in >> flat(i))) throw ParseError("truncated parameter list", static_cast<int>(3 + count + i));
  }
  model.assign_flat(flat);
  return model;
}

}  // namespace dpbudget

#endif  // DPBUDGET_NN_H_
