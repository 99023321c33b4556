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

#ifndef DPBUDGET_DATA_H_
#define DPBUDGET_DATA_H_

#include <Eigen/Dense>
#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dpbudget/random.h"

namespace dpbudget {

// Immutable labelled examples, one per feature row.
struct Dataset {
  Eigen::MatrixXd features;  // N x d
  std::vector<int> labels;   // N, each in [0, num_classes)
  int num_classes = 2;
  std::string name;
  std::string normalization;  // human-readable description of preprocessing

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }
};

// Wisconsin breast-cancer (original) format: id, nine integer features in
// 1..10, class 2 (benign) or 4 (malignant); '?' marks a missing value.
// Rows with missing values are dropped, the id is discarded, classes map to
// 0/1 and features are divided by 10. Malformed rows raise ParseError with the
// 1-based line number.
Dataset parse_cancer_csv(std::istream& in, std::string name = "cancer");
Dataset load_cancer_csv(const std::string& path);

inline constexpr int kCancerTrainSize = 560;

// Rows at the given indices, in order.
Dataset subset(const Dataset& data, std::span<const int> indices);

// Seeded shuffle, then the first n_train rows for training and the rest for
// testing.
std::pair<Dataset, Dataset> shuffle_split(const Dataset& data, int n_train, std::uint64_t seed);

// One epoch of shuffled, disjoint batches of size B covering 0..n-1; the last
// batch holds the remainder.
std::vector<std::vector<int>> rf_batches(int n, int batch_size, Rng& rng);

// Each of 0..n-1 included independently with probability q.
std::vector<int> rs_batch(int n, double q, Rng& rng);

struct SynthSpec {
  int n = 200;
  int dim = 2;
  int classes = 2;
  std::uint64_t seed = 1;
  double separation = 4.0;  // distance of each class centre from the origin
  double spread = 1.0;      // per-coordinate standard deviation
};

// Gaussian blobs, one per class, with centres spread around a circle in the
// first two coordinates (or along the first axis when dim == 1). Labels
// cycle 0, 1, ..., classes-1.
Dataset synth_dataset(const SynthSpec& spec);

}  // namespace dpbudget

#endif  // DPBUDGET_DATA_H_
