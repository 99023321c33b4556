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

#include <cmath>
#include <iomanip>
#include <limits>
#include <memory>
#include <optional>

#include "dpbudget/errors.h"

namespace dpbudget {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sensitivity(double clip_norm, const LayerRanges& layers) {
  return layers.empty() ? clip_norm : clip_norm * std::sqrt(static_cast<double>(layers.size()));
}

Eigen::MatrixXd rows_of(const Dataset& data, const std::vector<int>& idx, std::vector<int>& labels) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(idx.size()), data.dim());
  labels.resize(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = data.features.row(idx[i]);
    labels[i] = data.labels[idx[i]];
  }
  return x;
}

}  // namespace

Eigen::VectorXd clip_gradient(const Eigen::VectorXd& g, double clip_norm) {
  if (!(clip_norm > 0.0)) throw DomainError("clip norm must be positive");
  const double norm = g.norm();
  return g / std::max(1.0, norm / clip_norm);
}

void clip_rows(Eigen::MatrixXd& per_example, double clip_norm, const LayerRanges& layers) {
  if (!(clip_norm > 0.0)) throw DomainError("clip norm must be positive");
  for (Eigen::Index i = 0; i < per_example.rows(); ++i) {
    if (layers.empty()) {
      const double norm = per_example.row(i).norm();
      per_example.row(i) /= std::max(1.0, norm / clip_norm);
      continue;
    }
    for (const auto& [begin, end] : layers) {
      auto block = per_example.row(i).segment(begin, end - begin);
      const double norm = block.norm();
      block /= std::max(1.0, norm / clip_norm);
    }
  }
}

Eigen::VectorXd noisy_mean_gradient(const Eigen::MatrixXd& per_example, double clip_norm, double sigma,
                                    double denominator, Rng& rng, const LayerRanges& layers) {
  if (!(sigma >= 0.0)) throw DomainError("noise multiplier must be nonnegative");
  if (!(denominator > 0.0)) throw DomainError("batch denominator must be positive");
  Eigen::MatrixXd clipped = per_example;
  clip_rows(clipped, clip_norm, layers);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(per_example.cols());
  for (Eigen::Index i = 0; i < clipped.rows(); ++i) sum += clipped.row(i).transpose();
  const double scale = sigma * sensitivity(clip_norm, layers);
  if (scale > 0.0) {
    for (Eigen::Index j = 0; j < sum.size(); ++j) sum(j) += scale * rng.normal();
  }
  return sum / denominator;
}

double LearningRatePlan::at(int epoch) const {
  if (ramp_epochs <= 0 || epoch >= ramp_epochs) return ramp_epochs > 0 ? final : initial;
  return initial + (final - initial) * static_cast<double>(epoch) / ramp_epochs;
}

void TrainConfig::validate() const {
  if (!(clip_norm > 0.0)) throw ConfigError("clip_norm must be positive");
  if (batch_size < 0) throw ConfigError("batch_size must be nonnegative (0 = full batch)");
  if (max_epochs < 0) throw ConfigError("max_epochs must be nonnegative");
  if (!(learning_rate.initial >= 0.0) || !(learning_rate.final >= 0.0)) {
    throw ConfigError("learning rates must be nonnegative");
  }
  if (!(report_delta > 0.0 && report_delta < 1.0)) throw ConfigError("report_delta must lie in (0, 1)");
  if (!private_training) return;
  schedule.validate();
  if (batching == BatchingMode::kRF) {
    if (!(rho_total > 0.0) || !std::isfinite(rho_total)) throw ConfigError("rho_total must be positive");
  } else {
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("q must lie in (0, 1)");
    if (!(eps_total > 0.0)) throw ConfigError("eps_total must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  }
}

std::string to_string(Termination t) {
  return t == Termination::kBudgetExhausted ? "budget_exhausted" : "max_epochs";
}

TrainReport train(const TrainConfig& config, const TrainData& data, Model model) {
  config.validate();
  if (data.train == nullptr || data.train->size() == 0) throw UsageError("training set is empty");
  const Dataset& train_set = *data.train;
  if (train_set.dim() != model.input_dim() || train_set.num_classes != model.output_dim()) {
    throw ConfigError("model shape does not match the training data");
  }
  const bool adaptive = config.private_training && config.schedule.kind == ScheduleKind::kValidation;
  if (adaptive && data.validation == nullptr) {
    throw ConfigError("validation schedule needs a validation set");
  }

  const int n = static_cast<int>(train_set.size());
  const int batch = config.batch_size == 0 ? n : std::min(config.batch_size, n);
  const LayerRanges layers = config.per_layer_clipping ? model.layer_ranges() : LayerRanges{};
  Rng rng(config.seed);
  std::optional<ValidationController> controller;
  if (adaptive) controller.emplace(config.schedule);

  TrainReport report;
  report.ledger = AccountantLedger(config.batching);
  AccountantLedger& ledger = report.ledger;
  bool exhausted = false;
  std::vector<int> labels;

  auto step = [&](const std::vector<int>& idx, double sigma, double denominator, double eta) {
    if (idx.empty() && !config.private_training) return;
    Eigen::VectorXd grad;
    if (idx.empty()) {
      grad = noisy_mean_gradient(Eigen::MatrixXd(0, model.parameter_count()), config.clip_norm, sigma,
                                 denominator, rng, layers);
    } else {
      const Eigen::MatrixXd x = rows_of(train_set, idx, labels);
      if (config.private_training) {
        grad = noisy_mean_gradient(per_example_gradients(model, x, labels), config.clip_norm, sigma,
                                   denominator, rng, layers);
      } else {
        grad = batch_gradient(model, x, labels);
      }
    }
    model = sgd_step(std::move(model), grad, eta);
  };

  for (int epoch = 0; epoch < config.max_epochs && !exhausted; ++epoch) {
    double sigma = 0.0;
    if (config.private_training) {
      sigma = adaptive ? controller->sigma() : sigma_at(config.schedule, epoch);
    }
    const double eta = config.learning_rate.at(epoch);
    int iterations = 0;

    if (!config.private_training) {
      for (const auto& b : rf_batches(n, batch, rng)) {
        step(b, 0.0, static_cast<double>(b.size()), eta);
        ++iterations;
      }
    } else if (config.batching == BatchingMode::kRF) {
      if (ledger.rho_after_rf_epoch(sigma) > config.rho_total + kBudgetTolerance) {
        exhausted = true;
        break;
      }
      const auto batches = rf_batches(n, batch, rng);
      ledger.charge_rf_epoch(sigma, epoch, static_cast<int>(batches.size()));
      for (const auto& b : batches) {
        step(b, sigma, static_cast<double>(b.size()), eta);
        ++iterations;
      }
    } else {
      const int per_epoch = std::max(1, static_cast<int>(std::lround(1.0 / config.q)));
      const double expected = std::max(1.0, config.q * n);
      for (int it = 0; it < per_epoch; ++it) {
        if (config.q > 1.0 / (16.0 * sigma)) {
          throw PreconditionError("epoch " + std::to_string(epoch) + " iteration " + std::to_string(it) +
                                  ": q=" + std::to_string(config.q) + " exceeds 1/(16 sigma) at sigma=" +
                                  std::to_string(sigma));
        }
        if (ledger.eps_after_rs_iteration(config.q, sigma, config.delta) > config.eps_total) {
          exhausted = true;
          break;
        }
        ledger.charge_rs_iteration(config.q, sigma, epoch, it);
        step(rs_batch(n, config.q, rng), sigma, expected, eta);
        ++iterations;
      }
      if (iterations == 0) break;
    }

    EpochRecord record;
    record.epoch = epoch;
    record.sigma = sigma;
    record.learning_rate = eta;
    record.iterations = iterations;
    record.train_accuracy = accuracy(model, train_set.features, train_set.labels);
    record.test_accuracy = data.test ? accuracy(model, data.test->features, data.test->labels) : kNaN;
    record.validation_accuracy =
        data.validation ? accuracy(model, data.validation->features, data.validation->labels) : kNaN;
    if (config.private_training) {
      record.privacy = config.batching == BatchingMode::kRF ? ledger.rho_sum() : ledger.rho_hat();
      record.eps = ledger.to_dp(config.report_delta).eps;
    }
    report.epochs.push_back(record);
    if (controller) controller->update(record.validation_accuracy);
  }

  report.epochs_run = static_cast<int>(report.epochs.size());
  report.termination = exhausted ? Termination::kBudgetExhausted : Termination::kMaxEpochs;
  if (config.private_training && !ledger.empty()) {
    report.final_privacy = ledger.to_dp(config.report_delta);
  } else {
    report.final_privacy = {0.0, config.report_delta, config.private_training};
    if (!config.private_training) report.final_privacy.eps = std::numeric_limits<double>::infinity();
  }
  report.model = std::move(model);
  return report;
}

void write_report_csv(std::ostream& out, const TrainReport& report) {
  out << "epoch,sigma,learning_rate,iterations,train_accuracy,test_accuracy,validation_accuracy,"
         "privacy,eps\n";
  out << std::fixed << std::setprecision(6);
  for (const EpochRecord& r : report.epochs) {
    out << r.epoch << ',' << r.sigma << ',' << r.learning_rate << ',' << r.iterations << ','
        << r.train_accuracy << ',' << r.test_accuracy << ',' << r.validation_accuracy << ','
        << r.privacy << ',' << r.eps << '\n';
  }
}

}  // namespace dpbudget
