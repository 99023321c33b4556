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

#include "dpbudget/selection.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dpbudget/errors.h"

namespace dpbudget {

std::vector<double> selection_probabilities(std::span<const std::int64_t> z, double eps) {
  if (z.empty()) throw DomainError("no candidates to select from");
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw DomainError("eps must be finite and nonnegative");
  const std::int64_t best = *std::min_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] < 0) throw DomainError("scores must be nonnegative");
    p[i] = std::exp(-eps * static_cast<double>(z[i] - best) / 2.0);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

std::size_t exp_mechanism_select(std::span<const std::int64_t> z, double eps, Rng& rng) {
  const std::vector<double> p = selection_probabilities(z, eps);
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    cumulative += p[i];
    if (u < cumulative) return i;
  }
  return p.size() - 1;
}

ZcdpCost selection_zcdp_cost(double eps) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw DomainError("eps must be finite and nonnegative");
  return ZcdpCost(eps * eps / 2.0);
}

std::vector<std::vector<int>> balanced_partition(int n, int parts, Rng& rng) {
  if (parts < 1) throw DomainError("need at least one portion");
  std::vector<int> order(std::max(n, 0));
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<int>(order));
  std::vector<std::vector<int>> out(parts);
  for (int i = 0; i < n; ++i) out[i % parts].push_back(order[i]);
  return out;
}

TuneResult partition_tune(const Dataset& data, std::size_t k, const CandidateTrainer& trainer, double eps,
                          Rng& rng) {
  if (k < 1) throw DomainError("need at least one candidate");
  if (data.size() < static_cast<Eigen::Index>(k + 1)) {
    throw PreconditionError("dataset of " + std::to_string(data.size()) + " examples cannot be split into " +
                            std::to_string(k + 1) + " portions");
  }
  const auto portions = balanced_partition(static_cast<int>(data.size()), static_cast<int>(k + 1), rng);
  const Dataset holdout = subset(data, portions[k]);

  TuneResult result;
  for (const auto& p : portions) result.portion_sizes.push_back(static_cast<int>(p.size()));
  for (std::size_t i = 0; i < k; ++i) {
    const Mlp<double> model = trainer(i, subset(data, portions[i]));
    const std::vector<int> predicted = predict(model, holdout.features);
    std::int64_t wrong = 0;
    for (std::size_t j = 0; j < predicted.size(); ++j) wrong += predicted[j] != holdout.labels[j];
    result.scores.push_back(wrong);
  }
  result.probabilities = selection_probabilities(result.scores, eps);
  result.selected = exp_mechanism_select(result.scores, eps, rng);
  return result;
}

}  // namespace dpbudget
