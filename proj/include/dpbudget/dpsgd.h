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

// Differentially private SGD with clipped per-example gradients, Gaussian
// noise scaled by a schedule, and a ledger that admits each epoch (random
// reshuffling) or iteration (Poisson sampling) before it runs.

#ifndef DPBUDGET_DPSGD_H_
#define DPBUDGET_DPSGD_H_

#include <Eigen/Dense>
#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "dpbudget/accounting.h"
#include "dpbudget/data.h"
#include "dpbudget/nn.h"
#include "dpbudget/random.h"
#include "dpbudget/schedules.h"

namespace dpbudget {

using Model = Mlp<double>;
using LayerRanges = std::vector<std::pair<Eigen::Index, Eigen::Index>>;

// g / max(1, ||g|| / C).
Eigen::VectorXd clip_gradient(const Eigen::VectorXd& g, double clip_norm);

// Clips every row of a per-example gradient matrix in place. With layer
// ranges, each layer's block is clipped to clip_norm separately.
void clip_rows(Eigen::MatrixXd& per_example, double clip_norm, const LayerRanges& layers = {});

// (sum of clipped rows + N(0, (sigma * sensitivity)^2 I)) / denominator, where
// sensitivity is clip_norm for whole-vector clipping and
// clip_norm * sqrt(#layers) for per-layer clipping. Rows are summed in order.
Eigen::VectorXd noisy_mean_gradient(const Eigen::MatrixXd& per_example, double clip_norm, double sigma,
                                    double denominator, Rng& rng, const LayerRanges& layers = {});

// Constant rate, or a linear ramp from `initial` to `final` over
// ramp_epochs epochs followed by `final`.
struct LearningRatePlan {
  double initial = 0.05;
  double final = 0.05;
  int ramp_epochs = 0;

  double at(int epoch) const;
};

struct TrainConfig {
  double clip_norm = 1.0;
  int batch_size = 0;  // RF batch size; 0 means the whole training set
  BatchingMode batching = BatchingMode::kRF;
  double q = 0.01;  // RS sampling ratio
  NoiseSchedule schedule = NoiseSchedule::uniform(8.0);
  double rho_total = 0.78125;  // RF budget
  double eps_total = 1.0;      // RS budget, at delta
  double delta = 1e-5;
  double report_delta = 1e-5;
  LearningRatePlan learning_rate;
  int max_epochs = 1000;
  std::uint64_t seed = 1;
  bool per_layer_clipping = false;
  bool private_training = true;  // false: plain SGD, no clipping, noise or ledger

  // Throws ConfigError.
  void validate() const;
};

enum class Termination { kBudgetExhausted, kMaxEpochs };

std::string to_string(Termination t);

struct EpochRecord {
  int epoch = 0;
  double sigma = 0.0;
  double learning_rate = 0.0;
  int iterations = 0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;        // NaN without a test set
  double validation_accuracy = 0.0;  // NaN without a validation set
  double privacy = 0.0;              // RF: cumulative rho; RS: cumulative rho_hat
  double eps = 0.0;                  // cumulative eps at report_delta
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  int epochs_run = 0;
  Termination termination = Termination::kMaxEpochs;
  EpsDelta final_privacy;
  AccountantLedger ledger{BatchingMode::kRF};
  Model model;
};

struct TrainData {
  const Dataset* train = nullptr;
  const Dataset* test = nullptr;
  const Dataset* validation = nullptr;  // required by validation schedules
};

// Runs until the next epoch (RF) or iteration (RS) would exceed the budget,
// or max_epochs epochs have run. Throws PreconditionError when an RS step
// would violate q <= 1/(16 sigma).
TrainReport train(const TrainConfig& config, const TrainData& data, Model model);

// Per-epoch CSV, values with 6 decimals. Header lines are written by the
// caller.
void write_report_csv(std::ostream& out, const TrainReport& report);

}  // namespace dpbudget

#endif  // DPBUDGET_DPSGD_H_
