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

#include "dpbudget/nn.h"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "dpbudget/errors.h"
#include "dpbudget/random.h"

namespace dpbudget {
namespace {

using Model = Mlp<double>;
using Eigen::MatrixXd;
using Eigen::VectorXd;

const std::vector<int> kCancerShape{9, 10, 20, 10, 2};
const std::vector<int> kToyShape{2, 8, 2};

MatrixXd random_inputs(int rows, int cols, Rng& rng) {
  MatrixXd x(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) x(i, j) = rng.normal();
  }
  return x;
}

std::vector<int> random_labels(int rows, int classes, Rng& rng) {
  std::vector<int> y(rows);
  for (int& v : y) v = static_cast<int>(rng.below(classes));
  return y;
}

// Loop-by-loop loss, written without Eigen expressions.
double naive_loss(const Model& model, const VectorXd& x, int label) {
  std::vector<double> h(x.data(), x.data() + x.size());
  for (const auto& layer : model.layers()) {
    std::vector<double> z(layer.weight.cols(), 0.0);
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
      double acc = layer.bias(c);
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) acc += h[r] * layer.weight(r, c);
      z[c] = layer.activation == Activation::kRelu ? std::max(acc, 0.0) : acc;
    }
    h = z;
  }
  double top = h[0];
  for (double v : h) top = std::max(top, v);
  double sum = 0.0;
  for (double v : h) sum += std::exp(v - top);
  return top + std::log(sum) - h[label];
}

TEST(Mlp, ZeroModelGivesUniformSoftmax) {
  const Model model = Model::zeros(kCancerShape);
  Rng rng(1);
  const MatrixXd x = random_inputs(5, 9, rng);
  const std::vector<int> y{0, 1, 1, 0, 1};
  EXPECT_NEAR(mean_loss(model, x, y), std::log(2.0), 1e-15);
  EXPECT_NEAR(mean_loss(model, x, y), 0.6931, 1e-4);
}

TEST(Mlp, IdentityLayerPassesInputsThrough) {
  Model::Layer layer{MatrixXd::Identity(3, 3), VectorXd::Zero(3), Activation::kNone};
  const Model model({layer});
  const VectorXd x = (VectorXd(3) << 1.5, -2.0, 0.25).finished();
  EXPECT_EQ(model.forward(x), x);
}

TEST(Mlp, ForwardMatchesNaiveImplementation) {
  Rng rng(42);
  const Model model = Model::glorot(kCancerShape, rng);
  const MatrixXd x = random_inputs(20, 9, rng);
  const std::vector<int> y = random_labels(20, 2, rng);
  double naive = 0.0;
  for (int i = 0; i < 20; ++i) naive += naive_loss(model, x.row(i).transpose(), y[i]);
  EXPECT_NEAR(mean_loss(model, x, y), naive / 20.0, 1e-12);
  const MatrixXd batch = model.forward_batch(x);
  for (int i = 0; i < 20; ++i) EXPECT_LT((batch.row(i).transpose() - model.forward(x.row(i).transpose())).norm(), 1e-12);
}

TEST(Mlp, ShapeChecks) {
  Model::Layer a{MatrixXd::Zero(3, 4), VectorXd::Zero(4), Activation::kRelu};
  Model::Layer b{MatrixXd::Zero(5, 2), VectorXd::Zero(2), Activation::kNone};
  EXPECT_THROW(Model({a, b}), DomainError);
  Model::Layer relu_out{MatrixXd::Zero(4, 2), VectorXd::Zero(2), Activation::kRelu};
  EXPECT_THROW(Model({a, relu_out}), DomainError);
  const Model ok = Model::zeros(kToyShape);
  EXPECT_THROW(ok.forward(VectorXd::Zero(3)), DomainError);
  EXPECT_THROW(per_example_gradients(ok, MatrixXd::Zero(0, 2), {}), DomainError);
}

TEST(Mlp, GlorotInitIsBoundedAndSeeded) {
  Rng a(5), b(5);
  const Model m1 = Model::glorot(kCancerShape, a);
  const Model m2 = Model::glorot(kCancerShape, b);
  EXPECT_EQ(m1.flatten(), m2.flatten());
  for (const auto& layer : m1.layers()) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.weight.rows() + layer.weight.cols()));
    EXPECT_LE(layer.weight.cwiseAbs().maxCoeff(), limit);
    EXPECT_EQ(layer.bias.norm(), 0.0);
  }
}

TEST(Mlp, FlattenRoundTripsAndIsRowMajor) {
  Rng rng(9);
  Model model = Model::glorot(kToyShape, rng);
  const VectorXd flat = model.flatten();
  EXPECT_EQ(flat.size(), 2 * 8 + 8 + 8 * 2 + 2);
  EXPECT_EQ(flat(1), model.layers()[0].weight(0, 1));
  EXPECT_EQ(flat(8), model.layers()[0].weight(1, 0));
  Model other = Model::zeros(kToyShape);
  other.assign_flat(flat);
  EXPECT_EQ(other.flatten(), flat);
}

class GradientCheck : public ::testing::TestWithParam<std::vector<int>> {};

TEST_P(GradientCheck, PerExampleMatchesCentralDifferences) {
  const std::vector<int> shape = GetParam();
  Rng rng(123);
  Model model = Model::glorot(shape, rng);
  // Nonzero biases so that ReLU kinks are unlikely to sit on an example.
  VectorXd flat = model.flatten();
  for (Eigen::Index i = 0; i < flat.size(); ++i) flat(i) += 0.05 * rng.normal();
  model.assign_flat(flat);
  const int batch = 4;
  const MatrixXd x = random_inputs(batch, shape.front(), rng);
  const std::vector<int> y = random_labels(batch, shape.back(), rng);
  const MatrixXd grads = per_example_gradients(model, x, y);
  ASSERT_EQ(grads.rows(), batch);
  ASSERT_EQ(grads.cols(), model.parameter_count());

  const double h = 1e-5;
  for (int i = 0; i < batch; ++i) {
    const VectorXd xi = x.row(i).transpose();
    VectorXd numeric(flat.size());
    for (Eigen::Index p = 0; p < flat.size(); ++p) {
      Model plus = model, minus = model;
      VectorXd fp = flat, fm = flat;
      fp(p) += h;
      fm(p) -= h;
      plus.assign_flat(fp);
      minus.assign_flat(fm);
      numeric(p) = (cross_entropy(plus.forward(xi), y[i]) - cross_entropy(minus.forward(xi), y[i])) / (2 * h);
    }
    const VectorXd analytic = grads.row(i).transpose();
    EXPECT_LT((analytic - numeric).norm() / std::max(numeric.norm(), 1e-12), 1e-4) << "example " << i;
  }
}

INSTANTIATE_TEST_SUITE_P(Shapes, GradientCheck,
                         ::testing::Values(std::vector<int>{9, 10, 20, 10, 2}, std::vector<int>{2, 8, 2}));

TEST(Gradients, MeanOfPerExampleEqualsBatchGradient) {
  Rng rng(77);
  const Model model = Model::glorot(kCancerShape, rng);
  const MatrixXd x = random_inputs(64, 9, rng);
  const std::vector<int> y = random_labels(64, 2, rng);
  const VectorXd mean = per_example_gradients(model, x, y).colwise().mean().transpose();
  EXPECT_LT((mean - batch_gradient(model, x, y)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Gradients, DuplicatedExampleGetsIdenticalRows) {
  Rng rng(8);
  const Model model = Model::glorot(kToyShape, rng);
  MatrixXd x = random_inputs(3, 2, rng);
  x.row(2) = x.row(0);
  const std::vector<int> y{1, 0, 1};
  const MatrixXd g = per_example_gradients(model, x, y);
  EXPECT_EQ(g.row(0), g.row(2));
}

TEST(Gradients, ReluSubgradientAtZeroIsZero) {
  // Hidden pre-activation exactly 0: nothing flows to the first layer.
  Model::Layer hidden{MatrixXd::Zero(1, 1), VectorXd::Zero(1), Activation::kRelu};
  Model::Layer out{MatrixXd::Ones(1, 2), VectorXd::Zero(2), Activation::kNone};
  const Model model({hidden, out});
  const MatrixXd g = per_example_gradients(model, MatrixXd::Ones(1, 1), std::vector<int>{0});
  EXPECT_EQ(g(0, 0), 0.0);
  EXPECT_EQ(g(0, 1), 0.0);
}

TEST(Loss, NonNegativeAndSoftmaxNormalized) {
  Rng rng(4);
  const Model model = Model::glorot(kCancerShape, rng);
  const MatrixXd x = random_inputs(50, 9, rng) * 10.0;
  const MatrixXd p = softmax_rows(model.forward_batch(x));
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-12);
    EXPECT_GE(cross_entropy(model.forward(x.row(i).transpose()), 1), 0.0);
  }
}

TEST(SgdStep, Linearity) {
  Rng rng(6);
  const Model model = Model::glorot(kToyShape, rng);
  VectorXd g(model.parameter_count());
  for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = rng.normal();
  EXPECT_EQ(sgd_step(model, g, 0.0).flatten(), model.flatten());
  EXPECT_EQ(sgd_step(model, VectorXd::Zero(g.size()).eval(), 0.3).flatten(), model.flatten());
  const VectorXd twice = sgd_step(sgd_step(model, g, 0.05), g, 0.05).flatten();
  EXPECT_LT((twice - sgd_step(model, g, 0.1).flatten()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(sgd_step(model, VectorXd::Zero(3).eval(), 0.1), DomainError);
}

TEST(Checkpoint, RoundTripsExactly) {
  Rng rng(10);
  const Model model = Model::glorot(kCancerShape, rng);
  std::stringstream buffer;
  write_checkpoint(buffer, model);
  const Model back = read_checkpoint(buffer);
  EXPECT_EQ(back.flatten(), model.flatten());
  EXPECT_EQ(back.layers().size(), model.layers().size());
  EXPECT_EQ(back.layers().back().activation, Activation::kNone);
}

TEST(Checkpoint, RejectsForeignInput) {
  std::stringstream wrong("something else 1\n");
  EXPECT_THROW(read_checkpoint(wrong), ParseError);
  std::stringstream future("dpbudget-mlp 99\nlayers 1\n1 1 none\n0\n0\n");
  EXPECT_THROW(read_checkpoint(future), ParseError);
  std::stringstream truncated("dpbudget-mlp 1\nlayers 1\n2 2 none\n0.5\n");
  EXPECT_THROW(read_checkpoint(truncated), ParseError);
}

}  // namespace
}  // namespace dpbudget
