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

#include "dpbudget/data.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "dpbudget/config.h"
#include "dpbudget/errors.h"

namespace dpbudget {
namespace {

TEST(CancerCsv, BundledFileHas683CompleteRecords) {
  const Dataset data = load_cancer_csv(bundled_cancer_path());
  EXPECT_EQ(data.size(), 683);
  EXPECT_EQ(data.dim(), 9);
  EXPECT_EQ(data.num_classes, 2);
  EXPECT_GE(data.features.minCoeff(), 0.1);
  EXPECT_LE(data.features.maxCoeff(), 1.0);
  const long malignant = std::count(data.labels.begin(), data.labels.end(), 1);
  EXPECT_EQ(malignant, 239);
}

TEST(CancerCsv, SplitIs560And123) {
  const Dataset data = load_cancer_csv(bundled_cancer_path());
  const auto [train, test] = shuffle_split(data, kCancerTrainSize, 1);
  EXPECT_EQ(train.size(), 560);
  EXPECT_EQ(test.size(), 123);
  const auto [train2, test2] = shuffle_split(data, kCancerTrainSize, 1);
  EXPECT_EQ(train.features, train2.features);
  EXPECT_EQ(test.labels, test2.labels);
}

TEST(CancerCsv, ParsesAndScales) {
  std::istringstream in("1000025,5,1,1,1,2,1,3,1,1,2\n1002945,5,4,4,5,7,10,3,2,1,4\n");
  const Dataset d = parse_cancer_csv(in);
  ASSERT_EQ(d.size(), 2);
  EXPECT_DOUBLE_EQ(d.features(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(d.features(1, 5), 1.0);
  EXPECT_EQ(d.labels, (std::vector<int>{0, 1}));
}

TEST(CancerCsv, DropsRowsWithMissingValues) {
  std::istringstream in("1,5,1,1,1,2,1,3,1,1,2\n2,5,1,1,1,2,?,3,1,1,4\n3,1,1,1,1,1,1,1,1,1,4\n");
  const Dataset d = parse_cancer_csv(in);
  EXPECT_EQ(d.size(), 2);
  EXPECT_EQ(d.labels, (std::vector<int>{0, 1}));
}

TEST(CancerCsv, MalformedRowReportsLine) {
  std::istringstream in("1,5,1,1,1,2,1,3,1,1,2\n\n2,5,1,1,1,2,1,3,1,1\n");
  try {
    parse_cancer_csv(in);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  std::istringstream bad_class("1,5,1,1,1,2,1,3,1,1,3\n");
  EXPECT_THROW(parse_cancer_csv(bad_class), ParseError);
  std::istringstream bad_value("1,5,x,1,1,2,1,3,1,1,2\n");
  EXPECT_THROW(parse_cancer_csv(bad_value), ParseError);
  std::istringstream out_of_range("1,11,1,1,1,2,1,3,1,1,2\n");
  EXPECT_THROW(parse_cancer_csv(out_of_range), ParseError);
}

TEST(CancerCsv, MissingFileIsUsageError) { EXPECT_THROW(load_cancer_csv("/nonexistent/file"), UsageError); }

TEST(Split, DisjointAndCovering) {
  const Dataset data = synth_dataset({50, 1, 2, 3, 4.0, 1.0});
  const auto [a, b] = shuffle_split(data, 30, 9);
  std::multiset<double> all(data.features.col(0).begin(), data.features.col(0).end());
  std::multiset<double> parts(a.features.col(0).begin(), a.features.col(0).end());
  parts.insert(b.features.col(0).begin(), b.features.col(0).end());
  EXPECT_EQ(all, parts);
  EXPECT_THROW(shuffle_split(data, 51, 1), DomainError);
}

TEST(RfBatches, MnistSizedEpoch) {
  Rng rng(1);
  const auto batches = rf_batches(60000, 600, rng);
  ASSERT_EQ(batches.size(), 100u);
  std::vector<int> seen(60000, 0);
  for (const auto& b : batches) {
    EXPECT_EQ(b.size(), 600u);
    for (int i : b) ++seen[i];
  }
  EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
}

TEST(RfBatches, FullBatch) {
  Rng rng(2);
  const auto batches = rf_batches(560, 560, rng);
  ASSERT_EQ(batches.size(), 1u);
  std::vector<int> sorted = batches[0];
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> expected(560);
  std::iota(expected.begin(), expected.end(), 0);
  EXPECT_EQ(sorted, expected);
}

TEST(RfBatches, PartitionPropertySweep) {
  Rng rng(3);
  for (int n : {1, 2, 7, 64, 101}) {
    for (int b = 1; b <= n; b += std::max(1, n / 5)) {
      const auto batches = rf_batches(n, b, rng);
      EXPECT_EQ(static_cast<int>(batches.size()), (n + b - 1) / b);
      std::vector<int> seen(n, 0);
      for (const auto& batch : batches) {
        EXPECT_LE(static_cast<int>(batch.size()), b);
        for (int i : batch) ++seen[i];
      }
      EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; })) << n << " " << b;
    }
  }
  EXPECT_THROW(rf_batches(10, 11, rng), DomainError);
  EXPECT_THROW(rf_batches(10, 0, rng), DomainError);
}

TEST(RsBatch, MeanSizeMatchesBinomial) {
  Rng rng(4);
  const int n = 60000;
  const double q = 0.01;
  const int draws = 1000;
  double total = 0.0;
  for (int d = 0; d < draws; ++d) total += static_cast<double>(rs_batch(n, q, rng).size());
  const double mean = total / draws;
  const double se = std::sqrt(n * q * (1 - q) / draws);
  EXPECT_LT(std::abs(mean - 600.0), 3.0 * se);
}

TEST(RsBatch, TinyRatioGivesMostlyEmptyBatches) {
  Rng rng(5);
  int empty = 0;
  for (int d = 0; d < 200; ++d) empty += rs_batch(100, 1e-5, rng).empty();
  EXPECT_GT(empty, 190);
}

TEST(RsBatch, InclusionsAreUncorrelated) {
  Rng rng(6);
  const int n = 2;
  const double q = 0.3;
  const int draws = 20000;
  double a = 0, b = 0, ab = 0;
  for (int d = 0; d < draws; ++d) {
    const auto batch = rs_batch(n, q, rng);
    const bool in0 = std::find(batch.begin(), batch.end(), 0) != batch.end();
    const bool in1 = std::find(batch.begin(), batch.end(), 1) != batch.end();
    a += in0;
    b += in1;
    ab += in0 && in1;
  }
  const double cov = ab / draws - (a / draws) * (b / draws);
  const double se = q * (1 - q) / std::sqrt(static_cast<double>(draws));
  EXPECT_LT(std::abs(cov), 3.0 * se);
}

TEST(Synthetic, DeterministicAndValidated) {
  const SynthSpec spec{100, 3, 3, 42, 4.0, 1.0};
  const Dataset a = synth_dataset(spec);
  const Dataset b = synth_dataset(spec);
  EXPECT_EQ(a.features, b.features);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.num_classes, 3);
  SynthSpec empty = spec;
  empty.n = 0;
  EXPECT_THROW(synth_dataset(empty), DomainError);
}

}  // namespace
}  // namespace dpbudget
