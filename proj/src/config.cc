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

#include "dpbudget/config.h"

#include <fstream>
#include <initializer_list>
#include <set>

#include "dpbudget/errors.h"

#ifndef DPBUDGET_VERSION
#define DPBUDGET_VERSION "0.0.0"
#endif
#ifndef DPBUDGET_DATA_DIR
#define DPBUDGET_DATA_DIR "data"
#endif

namespace dpbudget {
namespace {

void only_keys(const Json& j, const char* what, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " must be a JSON object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& item : j.items()) {
    if (!keys.contains(item.key())) throw ConfigError(std::string(what) + ": unknown key '" + item.key() + "'");
  }
}

template <typename T>
void read(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("bad value for '") + key + "'");
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace

std::string version() { return DPBUDGET_VERSION; }

std::string bundled_cancer_path() { return std::string(DPBUDGET_DATA_DIR) + "/breast-cancer-wisconsin.data"; }

NoiseSchedule schedule_from_json(const Json& j) {
  only_keys(j, "schedule", {"kind", "sigma0", "k", "period", "sigma_end", "delta_thresh", "m", "decay_per_period"});
  NoiseSchedule s;
  std::string kind = "uniform";
  read(j, "kind", kind);
  s.kind = schedule_kind_from_string(kind);
  read(j, "sigma0", s.sigma0);
  read(j, "k", s.k);
  read(j, "period", s.period);
  read(j, "sigma_end", s.sigma_end);
  read(j, "delta_thresh", s.delta_thresh);
  read(j, "m", s.m);
  read(j, "decay_per_period", s.decay_per_period);
  s.validate();
  return s;
}

Json to_json(const NoiseSchedule& s) {
  Json j;
  j["kind"] = to_string(s.kind);
  j["sigma0"] = s.sigma0;
  switch (s.kind) {
    case ScheduleKind::kUniform:
      break;
    case ScheduleKind::kTime:
    case ScheduleKind::kExp:
      j["k"] = s.k;
      if (s.decay_per_period) {
        j["period"] = s.period;
        j["decay_per_period"] = true;
      }
      break;
    case ScheduleKind::kStep:
      j["k"] = s.k;
      j["period"] = s.period;
      break;
    case ScheduleKind::kPoly:
      j["k"] = s.k;
      j["period"] = s.period;
      j["sigma_end"] = s.sigma_end;
      break;
    case ScheduleKind::kValidation:
      j["k"] = s.k;
      j["period"] = s.period;
      j["delta_thresh"] = s.delta_thresh;
      j["m"] = s.m;
      break;
  }
  return j;
}

TrainConfig train_config_from_json(const Json& j) {
  only_keys(j, "train", {"clip_norm", "batch_size", "batching", "q", "schedule", "rho_total", "eps_total",
                         "delta", "report_delta", "learning_rate", "max_epochs", "seed", "per_layer_clipping",
                         "private"});
  TrainConfig c;
  read(j, "clip_norm", c.clip_norm);
  read(j, "batch_size", c.batch_size);
  std::string batching = "rf";
  read(j, "batching", batching);
  if (batching == "rf") {
    c.batching = BatchingMode::kRF;
  } else if (batching == "rs") {
    c.batching = BatchingMode::kRS;
  } else {
    throw ConfigError("batching must be 'rf' or 'rs'");
  }
  read(j, "q", c.q);
  if (j.contains("schedule")) c.schedule = schedule_from_json(j.at("schedule"));
  read(j, "rho_total", c.rho_total);
  read(j, "eps_total", c.eps_total);
  read(j, "delta", c.delta);
  read(j, "report_delta", c.report_delta);
  if (j.contains("learning_rate")) {
    const Json& lr = j.at("learning_rate");
    if (lr.is_number()) {
      c.learning_rate.initial = c.learning_rate.final = lr.get<double>();
    } else {
      only_keys(lr, "learning_rate", {"initial", "final", "ramp_epochs"});
      read(lr, "initial", c.learning_rate.initial);
      c.learning_rate.final = c.learning_rate.initial;
      read(lr, "final", c.learning_rate.final);
      read(lr, "ramp_epochs", c.learning_rate.ramp_epochs);
    }
  }
  read(j, "max_epochs", c.max_epochs);
  read(j, "seed", c.seed);
  read(j, "per_layer_clipping", c.per_layer_clipping);
  read(j, "private", c.private_training);
  c.validate();
  return c;
}

Json to_json(const TrainConfig& c) {
  Json j;
  j["private"] = c.private_training;
  j["clip_norm"] = c.clip_norm;
  j["batch_size"] = c.batch_size;
  j["batching"] = c.batching == BatchingMode::kRF ? "rf" : "rs";
  if (c.batching == BatchingMode::kRS) {
    j["q"] = c.q;
    j["eps_total"] = c.eps_total;
    j["delta"] = c.delta;
  } else {
    j["rho_total"] = c.rho_total;
  }
  j["schedule"] = to_json(c.schedule);
  j["report_delta"] = c.report_delta;
  j["learning_rate"] = {{"initial", c.learning_rate.initial},
                        {"final", c.learning_rate.final},
                        {"ramp_epochs", c.learning_rate.ramp_epochs}};
  j["max_epochs"] = c.max_epochs;
  j["seed"] = c.seed;
  j["per_layer_clipping"] = c.per_layer_clipping;
  return j;
}

RunSpec run_spec_from_json(const Json& j) {
  only_keys(j, "run", {"data", "hidden", "init_seed", "train"});
  RunSpec r;
  if (j.contains("data")) {
    const Json& d = j.at("data");
    only_keys(d, "data", {"source", "synthetic", "train_size", "validation_size", "split_seed"});
    read(d, "source", r.data.source);
    read(d, "train_size", r.data.train_size);
    read(d, "validation_size", r.data.validation_size);
    read(d, "split_seed", r.data.split_seed);
    if (d.contains("synthetic")) {
      const Json& s = d.at("synthetic");
      only_keys(s, "synthetic", {"n", "dim", "classes", "seed", "separation", "spread"});
      read(s, "n", r.data.synthetic.n);
      read(s, "dim", r.data.synthetic.dim);
      read(s, "classes", r.data.synthetic.classes);
      read(s, "seed", r.data.synthetic.seed);
      read(s, "separation", r.data.synthetic.separation);
      read(s, "spread", r.data.synthetic.spread);
    }
  }
  read(j, "hidden", r.hidden);
  for (int w : r.hidden) {
    if (w < 1) throw ConfigError("hidden widths must be positive");
  }
  read(j, "init_seed", r.init_seed);
  if (j.contains("train")) r.train = train_config_from_json(j.at("train"));
  if (r.data.train_size < 1) throw ConfigError("train_size must be positive");
  if (r.data.validation_size < 0 || r.data.validation_size >= r.data.train_size) {
    throw ConfigError("validation_size must lie in [0, train_size)");
  }
  return r;
}

Json to_json(const RunSpec& r) {
  Json j;
  j["data"] = {{"source", r.data.source},
               {"train_size", r.data.train_size},
               {"validation_size", r.data.validation_size},
               {"split_seed", r.data.split_seed}};
  if (r.data.source == "synthetic") {
    const SynthSpec& s = r.data.synthetic;
    j["data"]["synthetic"] = {{"n", s.n},         {"dim", s.dim},
                              {"classes", s.classes}, {"seed", s.seed},
                              {"separation", s.separation}, {"spread", s.spread}};
  }
  j["hidden"] = r.hidden;
  j["init_seed"] = r.init_seed;
  j["train"] = to_json(r.train);
  return j;
}

RunSpec read_run_spec(const std::string& path) { return run_spec_from_json(read_json_file(path)); }

SplitData load_data(const DataSpec& spec) {
  Dataset all;
  if (spec.source == "synthetic") {
    all = synth_dataset(spec.synthetic);
  } else {
    all = load_cancer_csv(spec.source == "cancer" ? bundled_cancer_path() : spec.source);
  }
  if (spec.train_size > all.size()) {
    throw ConfigError("train_size " + std::to_string(spec.train_size) + " exceeds the " +
                      std::to_string(all.size()) + " available examples");
  }
  SplitData out;
  auto [train, test] = shuffle_split(all, spec.train_size, spec.split_seed);
  out.test = std::move(test);
  if (spec.validation_size > 0) {
    const int keep = spec.train_size - spec.validation_size;
    std::vector<int> head(keep), tail(spec.validation_size);
    for (int i = 0; i < keep; ++i) head[i] = i;
    for (int i = 0; i < spec.validation_size; ++i) tail[i] = keep + i;
    out.validation = subset(train, tail);
    out.train = subset(train, head);
  } else {
    out.train = std::move(train);
  }
  return out;
}

std::vector<int> model_widths(const RunSpec& spec, const Dataset& data) {
  std::vector<int> widths{static_cast<int>(data.dim())};
  widths.insert(widths.end(), spec.hidden.begin(), spec.hidden.end());
  widths.push_back(data.num_classes);
  return widths;
}

TuneSpec tune_spec_from_json(const Json& j) {
  only_keys(j, "tune", {"base", "candidates", "eps", "seed"});
  TuneSpec t;
  if (j.contains("base")) t.base = run_spec_from_json(j.at("base"));
  if (!j.contains("candidates") || !j.at("candidates").is_array() || j.at("candidates").empty()) {
    throw ConfigError("tune: 'candidates' must be a nonempty array of schedules");
  }
  for (const Json& c : j.at("candidates")) t.candidates.push_back(schedule_from_json(c));
  read(j, "eps", t.eps);
  read(j, "seed", t.seed);
  if (!(t.eps >= 0.0)) throw ConfigError("tune: eps must be nonnegative");
  return t;
}

Json to_json(const TuneSpec& t) {
  Json j;
  j["base"] = to_json(t.base);
  j["candidates"] = Json::array();
  for (const auto& c : t.candidates) j["candidates"].push_back(to_json(c));
  j["eps"] = t.eps;
  j["seed"] = t.seed;
  return j;
}

TuneSpec read_tune_spec(const std::string& path) { return tune_spec_from_json(read_json_file(path)); }

void write_manifest(std::ostream& out, const std::string& command, std::uint64_t seed, const Json& config) {
  out << "# dpbudget " << version() << "\n";
  out << "# command: " << command << "\n";
  out << "# seed: " << seed << "\n";
  out << "# config: " << config.dump() << "\n";
}

}  // namespace dpbudget
