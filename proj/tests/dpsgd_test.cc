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

#include "dpbudget/dpsgd.h"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "dpbudget/errors.h"

namespace dpbudget {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST(ClipGradient, Examples) {
  const VectorXd eight = (VectorXd(2) << 0.0, 8.0).finished();
  EXPECT_EQ(clip_gradient(eight, 4.0), eight / 2.0);
  EXPECT_DOUBLE_EQ(clip_gradient(eight, 4.0).norm(), 4.0);
  const VectorXd three = (VectorXd(2) << 0.0, 3.0).finished();
  EXPECT_EQ(clip_gradient(three, 4.0), three);
  EXPECT_EQ(clip_gradient(VectorXd::Zero(5), 4.0), VectorXd::Zero(5));
  EXPECT_THROW(clip_gradient(three, 0.0), DomainError);
}

TEST(ClipGradient, ScalingBeyondTheNormChangesNothing) {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    VectorXd g(6);
    for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = rng.normal();
    const double c = 0.5 * g.norm();
    const VectorXd once = clip_gradient(g, c);
    const VectorXd scaled = clip_gradient(g * (1.0 + 10.0 * rng.uniform()), c);
    EXPECT_LT((once - scaled).norm(), 1e-12 * c);
    EXPECT_LE(once.norm(), c * (1 + 1e-15));
  }
}

TEST(ClipRows, PerLayerBlocks) {
  MatrixXd g = MatrixXd::Constant(2, 6, 3.0);
  const LayerRanges ranges{{0, 2}, {2, 6}};
  clip_rows(g, 1.0, ranges);
  for (Eigen::Index i = 0; i < 2; ++i) {
    EXPECT_NEAR(g.row(i).segment(0, 2).norm(), 1.0, 1e-12);
    EXPECT_NEAR(g.row(i).segment(2, 4).norm(), 1.0, 1e-12);
  }
}

TEST(NoisyMean, ZeroNoiseIsTheClippedMean) {
  MatrixXd g(3, 2);
  g << 0, 8, 3, 0, 0, 0;
  Rng rng(2);
  const VectorXd mean = noisy_mean_gradient(g, 4.0, 0.0, 3.0, rng);
  EXPECT_DOUBLE_EQ(mean(0), 1.0);
  EXPECT_DOUBLE_EQ(mean(1), 4.0 / 3.0);
}

TEST(NoisyMean, NoiseStandardDeviation) {
  const MatrixXd g = MatrixXd::Constant(4, 3, 0.1);
  const double c = 2.0, sigma = 3.0, b = 4.0;
  const VectorXd clean = g.colwise().sum().transpose() / b;
  Rng rng(3);
  const int draws = 10000;
  VectorXd sum = VectorXd::Zero(3), sq = VectorXd::Zero(3);
  double cross = 0.0;
  for (int d = 0; d < draws; ++d) {
    const VectorXd noise = noisy_mean_gradient(g, c, sigma, b, rng) - clean;
    sum += noise;
    sq += noise.cwiseProduct(noise);
    cross += noise(0) * noise(1);
  }
  const double target = sigma * c / b;
  for (int j = 0; j < 3; ++j) {
    const double mean = sum(j) / draws;
    const double sd = std::sqrt(sq(j) / draws - mean * mean);
    EXPECT_LT(std::abs(sd / target - 1.0), 0.02) << j;
  }
  const double cov = cross / draws - (sum(0) / draws) * (sum(1) / draws);
  EXPECT_LT(std::abs(cov), 3.0 * target * target / std::sqrt(static_cast<double>(draws)));
}

TEST(LearningRate, ConstantAndRamp) {
  const LearningRatePlan constant;
  EXPECT_EQ(constant.at(0), 0.05);
  EXPECT_EQ(constant.at(500), 0.05);
  const LearningRatePlan ramp{0.1, 0.05, 10};
  EXPECT_EQ(ramp.at(0), 0.1);
  EXPECT_NEAR(ramp.at(5), 0.075, 1e-15);
  EXPECT_EQ(ramp.at(10), 0.05);
  EXPECT_EQ(ramp.at(99), 0.05);
}

struct Fixture {
  Dataset train = synth_dataset({120, 2, 2, 5, 3.0, 1.0});
  Dataset test = synth_dataset({60, 2, 2, 6, 3.0, 1.0});
  Model model() const {
    Rng rng(1);
    return Model::glorot(std::vector<int>{2, 8, 2}, rng);
  }
};

TEST(Train, UniformScheduleRunsOneHundredEpochs) {
  Fixture f;
  TrainConfig config;
  config.schedule = NoiseSchedule::uniform(8.0);
  config.rho_total = 0.78125;
  config.batch_size = 30;
  const TrainReport r = train(config, {&f.train, &f.test}, f.model());
  EXPECT_EQ(r.epochs_run, 100);
  EXPECT_EQ(r.termination, Termination::kBudgetExhausted);
  EXPECT_NEAR(r.ledger.rho_sum(), 0.78125, 1e-12);
  EXPECT_EQ(r.epochs.front().iterations, 4);
}

TEST(Train, ExpScheduleRunsSeventyOneEpochs) {
  Fixture f;
  TrainConfig config;
  config.schedule = NoiseSchedule::exp_decay(10.0, 0.01);
  config.rho_total = 0.78125;
  const TrainReport r = train(config, {&f.train}, f.model());
  EXPECT_EQ(r.epochs_run, 71);
  for (const EpochRecord& e : r.epochs) EXPECT_EQ(e.sigma, sigma_at(config.schedule, e.epoch));
}

TEST(Train, CancerShapedUniformRunSpendsExactlyTheBudget) {
  Fixture f;
  TrainConfig config;
  config.schedule = NoiseSchedule::uniform(25.0);
  config.rho_total = 0.4;
  config.max_epochs = 2000;
  const TrainReport r = train(config, {&f.train}, f.model());
  EXPECT_EQ(r.epochs_run, 500);
  EXPECT_NEAR(r.ledger.rho_sum(), 0.4, 1e-12);
}

TEST(Train, StopsAtMaxEpochs) {
  Fixture f;
  TrainConfig config;
  config.schedule = NoiseSchedule::uniform(8.0);
  config.max_epochs = 10;
  const TrainReport r = train(config, {&f.train}, f.model());
  EXPECT_EQ(r.epochs_run, 10);
  EXPECT_EQ(r.termination, Termination::kMaxEpochs);
}

TEST(Train, ChargesBeforeComputeAndMatchesReplay) {
  Fixture f;
  TrainConfig config;
  config.schedule = NoiseSchedule::step_decay(10.0, 0.6, 10);
  const TrainReport r = train(config, {&f.train}, f.model());
  EXPECT_EQ(r.ledger.steps().size(), static_cast<std::size_t>(r.epochs_run));
  EXPECT_LE(r.ledger.rho_sum(), config.rho_total + kBudgetTolerance);
  const AccountantLedger replayed = AccountantLedger::replay(BatchingMode::kRF, r.ledger.steps());
  EXPECT_EQ(replayed.to_dp(1e-5).eps, r.final_privacy.eps);
  double previous = 0.0;
  for (const EpochRecord& e : r.epochs) {
    EXPECT_GE(e.privacy, previous);
    previous = e.privacy;
  }
}

TEST(Train, DeterministicPerSeed) {
  Fixture f;
  TrainConfig config;
  config.schedule = NoiseSchedule::exp_decay(10.0, 0.01);
  config.batch_size = 16;
  config.seed = 99;
  const TrainReport a = train(config, {&f.train, &f.test}, f.model());
  const TrainReport b = train(config, {&f.train, &f.test}, f.model());
  EXPECT_EQ(a.model.flatten(), b.model.flatten());
  ASSERT_EQ(a.epochs.size(), b.epochs.size());
  for (std::size_t i = 0; i < a.epochs.size(); ++i) {
    EXPECT_EQ(a.epochs[i].test_accuracy, b.epochs[i].test_accuracy);
  }
  config.seed = 100;
  EXPECT_NE(train(config, {&f.train, &f.test}, f.model()).model.flatten(), a.model.flatten());
}

TEST(Train, RsStopsBeforeExceedingEps) {
  Fixture f;
  TrainConfig config;
  config.batching = BatchingMode::kRS;
  config.q = 0.03;
  config.schedule = NoiseSchedule::uniform(2.0);
  config.eps_total = 1.5;
  config.delta = 1e-5;
  const TrainReport r = train(config, {&f.train}, f.model());
  EXPECT_EQ(r.termination, Termination::kBudgetExhausted);
  EXPECT_LE(rs_ledger_to_dp(r.ledger, 1e-5).eps, 1.5);
  EXPECT_GT(r.ledger.eps_after_rs_iteration(0.03, 2.0, 1e-5), 1.5);
  EXPECT_EQ(r.epochs.front().iterations, 33);
  EXPECT_GT(r.epochs_run, 1);

  config.eps_total = 0.5;  // not even one iteration fits
  const TrainReport none = train(config, {&f.train}, f.model());
  EXPECT_EQ(none.epochs_run, 0);
  EXPECT_TRUE(none.ledger.empty());
}

TEST(Train, RsPreconditionBreachAborts) {
  Fixture f;
  TrainConfig config;
  config.batching = BatchingMode::kRS;
  config.q = 0.02;
  config.schedule = NoiseSchedule::uniform(6.0);
  EXPECT_THROW(train(config, {&f.train}, f.model()), PreconditionError);
}

TEST(Train, ValidationScheduleFollowsTheController) {
  Fixture f;
  const Dataset validation = synth_dataset({40, 2, 2, 7, 3.0, 1.0});
  TrainConfig config;
  config.schedule = NoiseSchedule::validation(10.0, 0.7, 5, 0.01, 3);
  config.learning_rate = {0.5, 0.5, 0};
  config.max_epochs = 60;
  const TrainReport r = train(config, {&f.train, nullptr, &validation}, f.model());
  ValidationController replay(config.schedule);
  for (const EpochRecord& e : r.epochs) {
    EXPECT_EQ(e.sigma, replay.sigma());
    replay.update(e.validation_accuracy);
  }
  EXPECT_THROW(train(config, {&f.train}, f.model()), ConfigError);
}

TEST(Train, NonPrivateSeparatesTwoBlobs) {
  const Dataset blobs = synth_dataset({200, 2, 2, 11, 4.0, 1.0});
  TrainConfig config;
  config.private_training = false;
  config.max_epochs = 200;
  config.batch_size = 20;
  config.learning_rate = {0.1, 0.1, 0};
  Rng rng(3);
  const TrainReport r = train(config, {&blobs}, Model::glorot(std::vector<int>{2, 8, 2}, rng));
  EXPECT_GE(r.epochs.back().train_accuracy, 0.99);
  EXPECT_EQ(r.termination, Termination::kMaxEpochs);
}

TEST(Train, InvalidConfigIsRejected) {
  Fixture f;
  TrainConfig config;
  config.clip_norm = 0.0;
  EXPECT_THROW(train(config, {&f.train}, f.model()), ConfigError);
  config = TrainConfig{};
  Rng rng(1);
  EXPECT_THROW(train(config, {&f.train}, Model::glorot(std::vector<int>{3, 2}, rng)), ConfigError);
}

}  // namespace
}  // namespace dpbudget
