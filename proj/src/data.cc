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

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "dpbudget/errors.h"

namespace dpbudget {
namespace {

constexpr int kCancerColumns = 11;
constexpr double kCancerScale = 10.0;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

int parse_int(const std::string& field, int line) {
  int value = 0;
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ParseError("not an integer: '" + field + "'", line);
  return value;
}

}  // namespace

Dataset parse_cancer_csv(std::istream& in, std::string name) {
  std::vector<std::array<double, 9>> rows;
  std::vector<int> labels;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string text = trim(raw);
    if (text.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (text.back() == ',') fields.emplace_back();
    if (fields.size() != kCancerColumns) {
      throw ParseError("expected 11 columns, found " + std::to_string(fields.size()), line);
    }
    bool missing = false;
    for (int c = 1; c < 10; ++c) missing = missing || fields[c] == "?";
    if (fields[10] == "?") throw ParseError("missing class label", line);
    parse_int(fields[0], line);
    const int cls = parse_int(fields[10], line);
    if (cls != 2 && cls != 4) throw ParseError("class must be 2 or 4", line);
    if (missing) continue;
    std::array<double, 9> row{};
    for (int c = 1; c < 10; ++c) {
      const int v = parse_int(fields[c], line);
      if (v < 1 || v > 10) throw ParseError("feature outside 1..10", line);
      row[c - 1] = v / kCancerScale;
    }
    rows.push_back(row);
    labels.push_back(cls == 4 ? 1 : 0);
  }
  if (rows.empty()) throw ParseError("no complete records", line);

  Dataset data;
  data.features.resize(static_cast<Eigen::Index>(rows.size()), 9);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int c = 0; c < 9; ++c) data.features(static_cast<Eigen::Index>(i), c) = rows[i][c];
  }
  data.labels = std::move(labels);
  data.num_classes = 2;
  data.name = std::move(name);
  data.normalization = "features divided by 10";
  return data;
}

Dataset load_cancer_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open dataset file '" + path + "'");
  return parse_cancer_csv(in, path);
}

Dataset subset(const Dataset& data, std::span<const int> indices) {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(indices.size()), data.dim());
  out.labels.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const int j = indices[i];
    if (j < 0 || j >= data.size()) throw DomainError("subset index out of range");
    out.features.row(static_cast<Eigen::Index>(i)) = data.features.row(j);
    out.labels.push_back(data.labels[j]);
  }
  out.num_classes = data.num_classes;
  out.name = data.name;
  out.normalization = data.normalization;
  return out;
}

std::pair<Dataset, Dataset> shuffle_split(const Dataset& data, int n_train, std::uint64_t seed) {
  if (n_train < 0 || n_train > data.size()) throw DomainError("training size exceeds dataset size");
  std::vector<int> order(static_cast<std::size_t>(data.size()));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span<int>(order));
  const std::span<const int> all(order);
  return {subset(data, all.first(n_train)), subset(data, all.subspan(n_train))};
}

std::vector<std::vector<int>> rf_batches(int n, int batch_size, Rng& rng) {
  if (n < 1) throw DomainError("cannot batch an empty dataset");
  if (batch_size < 1 || batch_size > n) throw DomainError("batch size must lie in [1, N]");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<int>(order));
  std::vector<std::vector<int>> batches;
  for (int start = 0; start < n; start += batch_size) {
    const int end = std::min(n, start + batch_size);
    batches.emplace_back(order.begin() + start, order.begin() + end);
  }
  return batches;
}

std::vector<int> rs_batch(int n, double q, Rng& rng) {
  if (!(q > 0.0 && q <= 1.0)) throw DomainError("sampling ratio must lie in (0, 1]");
  std::vector<int> batch;
  for (int i = 0; i < n; ++i) {
    if (rng.bernoulli(q)) batch.push_back(i);
  }
  return batch;
}

Dataset synth_dataset(const SynthSpec& spec) {
  if (spec.n < 1) throw DomainError("synthetic dataset needs at least one example");
  if (spec.dim < 1 || spec.classes < 2) throw DomainError("need dim >= 1 and at least 2 classes");
  Rng rng(spec.seed);
  Dataset data;
  data.features.resize(spec.n, spec.dim);
  data.labels.resize(spec.n);
  for (int i = 0; i < spec.n; ++i) {
    const int cls = i % spec.classes;
    Eigen::VectorXd centre = Eigen::VectorXd::Zero(spec.dim);
    if (spec.dim == 1) {
      centre(0) = spec.separation * (2.0 * cls / (spec.classes - 1) - 1.0);
    } else {
      const double angle = 2.0 * std::numbers::pi * cls / spec.classes;
      centre(0) = spec.separation * std::cos(angle);
      centre(1) = spec.separation * std::sin(angle);
    }
    for (int c = 0; c < spec.dim; ++c) data.features(i, c) = centre(c) + spec.spread * rng.normal();
    data.labels[i] = cls;
  }
  data.num_classes = spec.classes;
  data.name = "synthetic";
  data.normalization = "none";
  return data;
}

}  // namespace dpbudget
