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

// Private choice among candidate models with the exponential mechanism.
// Each candidate is scored by its number of wrong predictions z on held-out
// data; lower is better.

#ifndef DPBUDGET_SELECTION_H_
#define DPBUDGET_SELECTION_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dpbudget/accounting.h"
#include "dpbudget/data.h"
#include "dpbudget/nn.h"
#include "dpbudget/random.h"

namespace dpbudget {

// P(i) = exp(-eps z_i / 2) / sum_j exp(-eps z_j / 2). Computed from the
// integer offsets z_i - min(z), so shifting every score by a constant gives
// bit-identical probabilities.
std::vector<double> selection_probabilities(std::span<const std::int64_t> z, double eps);

std::size_t exp_mechanism_select(std::span<const std::int64_t> z, double eps, Rng& rng);

// An eps-DP selection is (eps^2 / 2)-zCDP.
ZcdpCost selection_zcdp_cost(double eps);

// Shuffles 0..n-1 and deals them round-robin into `parts` portions, so
// portion sizes differ by at most one.
std::vector<std::vector<int>> balanced_partition(int n, int parts, Rng& rng);

struct TuneResult {
  std::vector<std::int64_t> scores;  // z_i per candidate
  std::vector<double> probabilities;
  std::size_t selected = 0;
  std::vector<int> portion_sizes;  // k training portions, then the holdout
};

// Trains candidate i on portion i of k + 1 balanced portions and scores it on
// the last one. Throws PreconditionError when the dataset has fewer than
// k + 1 examples.
using CandidateTrainer = std::function<Mlp<double>(std::size_t candidate, const Dataset& portion)>;

TuneResult partition_tune(const Dataset& data, std::size_t k, const CandidateTrainer& trainer, double eps,
                          Rng& rng);

}  // namespace dpbudget

#endif  // DPBUDGET_SELECTION_H_
