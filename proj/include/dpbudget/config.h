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

// JSON run descriptions and the comment header written at the top of every
// output file. Unknown keys are rejected so that typos do not silently fall
// back to defaults.

#ifndef DPBUDGET_CONFIG_H_
#define DPBUDGET_CONFIG_H_

#include <cstdint>
#include <nlohmann/json.hpp>
#include <ostream>
#include <string>
#include <vector>

#include "dpbudget/data.h"
#include "dpbudget/dpsgd.h"
#include "dpbudget/schedules.h"

namespace dpbudget {

using Json = nlohmann::ordered_json;

std::string version();

// Path of the bundled breast-cancer file.
std::string bundled_cancer_path();

NoiseSchedule schedule_from_json(const Json& j);
Json to_json(const NoiseSchedule& s);

TrainConfig train_config_from_json(const Json& j);
Json to_json(const TrainConfig& c);

// Where the examples come from and how they are split.
//   source "cancer": the bundled file; any other string is a path in the
//   same format; "synthetic" uses `synthetic`.
struct DataSpec {
  std::string source = "cancer";
  SynthSpec synthetic;
  int train_size = kCancerTrainSize;  // rest is the test set
  int validation_size = 0;            // carved from the end of the training part
  std::uint64_t split_seed = 1;
};

struct RunSpec {
  DataSpec data;
  std::vector<int> hidden = {10, 20, 10};
  std::uint64_t init_seed = 1;
  TrainConfig train;
};

RunSpec run_spec_from_json(const Json& j);
Json to_json(const RunSpec& r);
RunSpec read_run_spec(const std::string& path);

struct SplitData {
  Dataset train;
  Dataset test;
  Dataset validation;  // empty unless validation_size > 0
};

SplitData load_data(const DataSpec& spec);

// Layer widths input, hidden..., classes.
std::vector<int> model_widths(const RunSpec& spec, const Dataset& data);

// Candidate schedules scored by private selection.
struct TuneSpec {
  RunSpec base;
  std::vector<NoiseSchedule> candidates;
  double eps = 1.0;
  std::uint64_t seed = 1;
};

TuneSpec tune_spec_from_json(const Json& j);
Json to_json(const TuneSpec& t);
TuneSpec read_tune_spec(const std::string& path);

// "# key: value" lines: tool and version, command, seed, then the config as
// one JSON line.
void write_manifest(std::ostream& out, const std::string& command, std::uint64_t seed, const Json& config);

}  // namespace dpbudget

#endif  // DPBUDGET_CONFIG_H_
