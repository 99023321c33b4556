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

// dpbudget: privacy accounting, noise schedules and differentially private
// training from the command line.

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "dpbudget/accounting.h"
#include "dpbudget/config.h"
#include "dpbudget/curves.h"
#include "dpbudget/data.h"
#include "dpbudget/dpsgd.h"
#include "dpbudget/errors.h"
#include "dpbudget/nn.h"
#include "dpbudget/renyi.h"
#include "dpbudget/schedules.h"
#include "dpbudget/selection.h"

namespace fs = std::filesystem;
using namespace dpbudget;

namespace {

// Training that ends because max_epochs was reached, not the budget.
constexpr int kExitMaxEpochs = 10;

std::ofstream open_output(const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path() && !fs::exists(p.parent_path())) {
    throw UsageError("output directory '" + p.parent_path().string() + "' does not exist");
  }
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write '" + path + "'");
  return out;
}

// ---- account / sweep ----

struct AccountArgs {
  AccountantCurveParams params;
  std::string out;
};

Json to_json(const AccountantCurveParams& p) {
  return {{"q", p.q},          {"sigma", p.sigma}, {"epochs", p.epochs}, {"iters_per_epoch", p.iterations_per_epoch},
          {"delta", p.delta},  {"lambda_max", p.lambda_max}};
}

int run_account(const AccountArgs& a) {
  const auto rows = accountant_curve(a.params);
  std::ofstream out = open_output(a.out);
  write_manifest(out, "account", 0, to_json(a.params));
  write_accountant_csv(out, rows);
  return 0;
}

struct SweepArgs {
  AccountantCurveParams params;
  double sigma_min = 5.0;
  double sigma_max = 14.0;
  double sigma_step = 1.0;
  std::string out;
};

int run_sweep(const SweepArgs& a) {
  if (!(a.sigma_step > 0.0) || a.sigma_min > a.sigma_max) throw UsageError("bad sigma range");
  Json config = to_json(a.params);
  config.erase("sigma");
  config["sigma_min"] = a.sigma_min;
  config["sigma_max"] = a.sigma_max;
  config["sigma_step"] = a.sigma_step;
  std::ofstream out = open_output(a.out);
  write_manifest(out, "sweep", 0, config);
  out << "sigma,eps_zcdp_rf,eps_strong,eps_zcdp_rs,eps_ma\n" << std::fixed << std::setprecision(6);
  for (int i = 0;; ++i) {
    AccountantCurveParams p = a.params;
    p.sigma = a.sigma_min + i * a.sigma_step;
    if (p.sigma > a.sigma_max + 1e-9) break;
    p.rs_outside_range_as_nan = true;
    const auto rows = accountant_curve(p);
    if (rows.empty()) continue;
    const AccountantRow& r = rows.back();
    out << p.sigma << ',' << r.eps_zcdp_rf << ',' << r.eps_strong << ',' << r.eps_zcdp_rs << ',' << r.eps_ma << '\n';
  }
  return 0;
}

// ---- epochs / solve-k ----

struct ScheduleArgs {
  std::string kind = "uniform";
  double sigma0 = 10.0;
  double decay_rate = 0.0;
  int period = 10;
  double sigma_end = 2.0;
  double rho_total = 0.78125;
};

NoiseSchedule schedule_of(const ScheduleArgs& a) {
  NoiseSchedule s;
  s.kind = schedule_kind_from_string(a.kind);
  s.sigma0 = a.sigma0;
  s.k = a.decay_rate;
  s.period = a.period;
  s.sigma_end = a.sigma_end;
  s.validate();
  return s;
}

int run_epochs(const ScheduleArgs& a) {
  const NoiseSchedule s = schedule_of(a);
  const int epochs = epochs_until_exhaustion(s, ZcdpCost(a.rho_total));
  std::cout << epochs << "\n";
  return 0;
}

struct SolveArgs {
  std::string kind;
  double sigma0 = 10.0;
  double rho_total = 0.78125;
  int target = 0;
  DecayRateSearch search;
};

int run_solve_k(const SolveArgs& a) {
  const DecayRateSolution s =
      solve_decay_rate(schedule_kind_from_string(a.kind), a.sigma0, ZcdpCost(a.rho_total), a.target, a.search);
  if (!s.feasible) {
    std::cerr << "infeasible: " << s.reason << "\n";
    return PreconditionError("").exit_code();
  }
  std::cout << std::setprecision(10) << s.k << "\n";
  return 0;
}

// ---- validate-bound ----

struct BoundArgs {
  bool smoke = false;
  std::optional<double> q;
  std::optional<double> sigma;
  BoundGrid grid;
  std::string out;
};

int run_validate_bound(BoundArgs a) {
  BoundGrid grid = a.grid;
  if (a.q || a.sigma) {
    if (!(a.q && a.sigma)) throw UsageError("single-point mode needs both --q and --sigma");
    grid = BoundGrid::single(*a.q, *a.sigma);
    grid.q_step = std::max(*a.q, 1e-3);
  } else if (a.smoke) {
    grid = BoundGrid::smoke();
  }
  const BoundReport report = validate_moment_bound(grid);
  Json config = {{"sigma_min", grid.sigma_min}, {"sigma_max", grid.sigma_max}, {"sigma_step", grid.sigma_step},
                 {"q_min", grid.q_min},         {"q_step", grid.q_step},       {"alpha_cap", grid.alpha_cap}};
  std::ofstream out = open_output(a.out);
  write_manifest(out, "validate-bound", 0, config);
  out << "# points: " << report.points.size() << "\n";
  out << "# alphas_checked: " << report.alphas_checked << "\n";
  out << "# violations: " << report.violations << "\n";
  out << "sigma,q,u_alpha,alphas_checked,worst_slack,worst_alpha,holds\n";
  for (const BoundPoint& p : report.points) {
    out << std::fixed << std::setprecision(6) << p.sigma << ',' << p.q << ',' << p.u_alpha << ',' << p.alphas_checked
        << ',' << std::scientific << std::setprecision(6) << p.worst_slack << ',' << p.worst_alpha << ','
        << (p.holds ? 1 : 0) << '\n';
  }
  std::cout << "points " << report.points.size() << ", violations " << report.violations << "\n";
  return 0;
}

// ---- train / tune ----

struct TrainOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> sigma0;
  std::optional<double> decay_rate;
  std::optional<double> rho_total;
  std::optional<double> clip_norm;
  std::optional<std::string> batching;
  std::optional<int> max_epochs;
};

void apply(const TrainOverrides& o, RunSpec& spec) {
  TrainConfig& t = spec.train;
  if (o.seed) t.seed = *o.seed;
  if (o.sigma0) t.schedule.sigma0 = *o.sigma0;
  if (o.decay_rate) t.schedule.k = *o.decay_rate;
  if (o.rho_total) t.rho_total = *o.rho_total;
  if (o.clip_norm) t.clip_norm = *o.clip_norm;
  if (o.batching) t.batching = *o.batching == "rs" ? BatchingMode::kRS : BatchingMode::kRF;
  if (o.max_epochs) t.max_epochs = *o.max_epochs;
  t.validate();
}

Model initial_model(const RunSpec& spec, const Dataset& train) {
  Rng rng(spec.init_seed);
  return Model::glorot(model_widths(spec, train), rng);
}

Json summary_json(const RunSpec& spec, const TrainReport& r) {
  Json j;
  j["manifest"] = {{"tool", "dpbudget"}, {"version", version()}, {"command", "train"}, {"seed", spec.train.seed},
                   {"config", to_json(spec)}};
  j["epochs_run"] = r.epochs_run;
  j["termination"] = to_string(r.termination);
  if (!r.epochs.empty()) {
    j["final_train_accuracy"] = r.epochs.back().train_accuracy;
    if (!std::isnan(r.epochs.back().test_accuracy)) j["final_test_accuracy"] = r.epochs.back().test_accuracy;
  }
  if (spec.train.private_training) {
    j["privacy"] = {{"batching", to_string(spec.train.batching)},
                    {"rho", r.ledger.mode() == BatchingMode::kRF ? r.ledger.rho_sum() : r.ledger.rho_hat()},
                    {"eps", r.final_privacy.eps},
                    {"delta", r.final_privacy.delta}};
  }
  return j;
}

struct TrainArgs {
  std::string config;
  std::string out_dir;
  TrainOverrides overrides;
};

int run_train(const TrainArgs& a) {
  RunSpec spec = read_run_spec(a.config);
  apply(a.overrides, spec);
  if (!fs::is_directory(a.out_dir)) throw UsageError("output directory '" + a.out_dir + "' does not exist");
  const SplitData data = load_data(spec.data);
  const TrainData inputs{&data.train, &data.test, data.validation.size() > 0 ? &data.validation : nullptr};
  const TrainReport report = train(spec.train, inputs, initial_model(spec, data.train));

  const fs::path dir(a.out_dir);
  {
    std::ofstream out = open_output((dir / "epochs.csv").string());
    write_manifest(out, "train", spec.train.seed, to_json(spec));
    write_report_csv(out, report);
  }
  {
    std::ofstream out = open_output((dir / "summary.json").string());
    out << summary_json(spec, report).dump(2) << "\n";
  }
  {
    std::ofstream out = open_output((dir / "model.txt").string());
    write_checkpoint(out, report.model);
  }
  std::cout << "epochs " << report.epochs_run << " (" << to_string(report.termination) << ")\n";
  return report.termination == Termination::kMaxEpochs && spec.train.private_training ? kExitMaxEpochs : 0;
}

struct TuneArgs {
  std::string config;
  std::string out;
};

int run_tune(const TuneArgs& a) {
  const TuneSpec spec = read_tune_spec(a.config);
  const SplitData data = load_data(spec.base.data);
  Rng rng(spec.seed);
  const TuneResult result = partition_tune(
      data.train, spec.candidates.size(),
      [&](std::size_t i, const Dataset& portion) {
        TrainConfig config = spec.base.train;
        config.schedule = spec.candidates[i];
        return train(config, {&portion}, initial_model(spec.base, portion)).model;
      },
      spec.eps, rng);

  Json j;
  j["manifest"] = {{"tool", "dpbudget"}, {"version", version()}, {"command", "tune"}, {"seed", spec.seed},
                   {"config", to_json(spec)}};
  j["scores"] = result.scores;
  j["probabilities"] = result.probabilities;
  j["selected"] = result.selected;
  j["selected_schedule"] = to_json(spec.candidates[result.selected]);
  j["portion_sizes"] = result.portion_sizes;
  j["selection_rho"] = selection_zcdp_cost(spec.eps).rho;
  std::ofstream out = open_output(a.out);
  out << j.dump(2) << "\n";
  std::cout << "selected candidate " << result.selected << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy accounting, noise schedules and differentially private training"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);
  const auto positive = CLI::PositiveNumber;
  const auto kinds = CLI::IsMember({"uniform", "time", "exp", "step", "poly"});

  AccountArgs account;
  auto* account_cmd = app.add_subcommand("account", "Cumulative eps per epoch under four accountants");
  account_cmd->add_option("--q", account.params.q, "Sampling ratio")->check(CLI::Range(0.0, 1.0));
  account_cmd->add_option("--sigma", account.params.sigma, "Noise multiplier")->check(positive);
  account_cmd->add_option("--epochs", account.params.epochs, "Epochs")->check(CLI::NonNegativeNumber);
  account_cmd->add_option("--iters-per-epoch", account.params.iterations_per_epoch, "Iterations per epoch")
      ->check(positive);
  account_cmd->add_option("--delta", account.params.delta, "Target delta")->check(CLI::Range(0.0, 1.0));
  account_cmd->add_option("--lambda-max", account.params.lambda_max, "Largest moment order (0: default)");
  account_cmd->add_option("--out", account.out, "CSV output path")->required();

  SweepArgs sweep;
  sweep.params.epochs = 200;
  auto* sweep_cmd = app.add_subcommand("sweep", "Final eps of each accountant across noise multipliers");
  sweep_cmd->add_option("--q", sweep.params.q, "Sampling ratio")->check(CLI::Range(0.0, 1.0));
  sweep_cmd->add_option("--sigma-min", sweep.sigma_min)->check(positive);
  sweep_cmd->add_option("--sigma-max", sweep.sigma_max)->check(positive);
  sweep_cmd->add_option("--sigma-step", sweep.sigma_step)->check(positive);
  sweep_cmd->add_option("--epochs", sweep.params.epochs)->check(positive);
  sweep_cmd->add_option("--iters-per-epoch", sweep.params.iterations_per_epoch)->check(positive);
  sweep_cmd->add_option("--delta", sweep.params.delta)->check(CLI::Range(0.0, 1.0));
  sweep_cmd->add_option("--lambda-max", sweep.params.lambda_max);
  sweep_cmd->add_option("--out", sweep.out, "CSV output path")->required();

  ScheduleArgs epochs;
  auto* epochs_cmd = app.add_subcommand("epochs", "Epochs a schedule runs before the budget is spent");
  epochs_cmd->add_option("--kind", epochs.kind)->required()->check(kinds);
  epochs_cmd->add_option("--sigma0", epochs.sigma0)->check(positive);
  epochs_cmd->add_option("--decay-rate", epochs.decay_rate);
  epochs_cmd->add_option("--period", epochs.period)->check(positive);
  epochs_cmd->add_option("--sigma-end", epochs.sigma_end)->check(positive);
  epochs_cmd->add_option("--rho-total", epochs.rho_total)->check(positive);

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve-k", "Decay rate that spends the budget in a target epoch count");
  solve_cmd->add_option("--kind", solve.kind)->required()->check(CLI::IsMember({"time", "exp", "step", "poly"}));
  solve_cmd->add_option("--sigma0", solve.sigma0)->check(positive);
  solve_cmd->add_option("--rho-total", solve.rho_total)->check(positive);
  solve_cmd->add_option("--target", solve.target, "Target epochs")->required()->check(positive);
  solve_cmd->add_option("--grid-step", solve.search.grid_step)->check(positive);
  solve_cmd->add_option("--period", solve.search.period)->check(positive);
  solve_cmd->add_option("--poly-period", solve.search.poly_period)->check(positive);
  solve_cmd->add_option("--sigma-end", solve.search.sigma_end)->check(positive);

  BoundArgs bound;
  auto* bound_cmd = app.add_subcommand("validate-bound", "Check D_alpha <= q^2 alpha / sigma^2 on a grid");
  bound_cmd->add_flag("--smoke", bound.smoke, "Coarse grid: sigma step 1, q step 0.005");
  bound_cmd->add_option("--q", bound.q, "Single point: sampling ratio")->check(CLI::Range(0.0, 1.0));
  bound_cmd->add_option("--sigma", bound.sigma, "Single point: noise multiplier")->check(positive);
  bound_cmd->add_option("--sigma-min", bound.grid.sigma_min)->check(positive);
  bound_cmd->add_option("--sigma-max", bound.grid.sigma_max)->check(positive);
  bound_cmd->add_option("--sigma-step", bound.grid.sigma_step)->check(positive);
  bound_cmd->add_option("--q-min", bound.grid.q_min)->check(positive);
  bound_cmd->add_option("--q-step", bound.grid.q_step)->check(positive);
  bound_cmd->add_option("--alpha-cap", bound.grid.alpha_cap)->check(positive);
  bound_cmd->add_option("--out", bound.out, "CSV report path")->required();

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train a classifier with differentially private SGD");
  train_cmd->add_option("--config", train_args.config, "JSON run description")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out-dir", train_args.out_dir, "Existing directory for outputs")->required();
  train_cmd->add_option("--seed", train_args.overrides.seed);
  train_cmd->add_option("--sigma0", train_args.overrides.sigma0)->check(positive);
  train_cmd->add_option("--decay-rate", train_args.overrides.decay_rate);
  train_cmd->add_option("--rho-total", train_args.overrides.rho_total)->check(positive);
  train_cmd->add_option("--clip-norm", train_args.overrides.clip_norm)->check(positive);
  train_cmd->add_option("--batching", train_args.overrides.batching)->check(CLI::IsMember({"rf", "rs"}));
  train_cmd->add_option("--max-epochs", train_args.overrides.max_epochs)->check(CLI::NonNegativeNumber);

  TuneArgs tune;
  auto* tune_cmd = app.add_subcommand("tune", "Pick a noise schedule with the exponential mechanism");
  tune_cmd->add_option("--config", tune.config, "JSON tuning description")->required()->check(CLI::ExistingFile);
  tune_cmd->add_option("--out", tune.out, "JSON result path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : UsageError("").exit_code();
  }

  try {
    if (*account_cmd) return run_account(account);
    if (*sweep_cmd) return run_sweep(sweep);
    if (*epochs_cmd) return run_epochs(epochs);
    if (*solve_cmd) return run_solve_k(solve);
    if (*bound_cmd) return run_validate_bound(bound);
    if (*train_cmd) return run_train(train_args);
    if (*tune_cmd) return run_tune(tune);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return NumericalError("").exit_code();
  }
  return 0;
}
