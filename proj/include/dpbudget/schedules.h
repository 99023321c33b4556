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

// Noise-scale schedules: map a 0-based epoch index to the Gaussian noise
// multiplier used for every iteration of that epoch.

#ifndef DPBUDGET_SCHEDULES_H_
#define DPBUDGET_SCHEDULES_H_

#include <string>
#include <string_view>
#include <vector>

#include "dpbudget/accounting.h"

namespace dpbudget {

enum class ScheduleKind { kUniform, kTime, kExp, kStep, kPoly, kValidation };

std::string to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(std::string_view name);  // throws ConfigError

//   uniform     sigma0
//   time        sigma0 / (1 + k t)
//   exp         sigma0 exp(-k t)
//   step        sigma0 k^floor(t / period)
//   poly        (sigma0 - sigma_end)(1 - t/period)^k + sigma_end, sigma_end once t >= period
//   validation  sigma0, multiplied by k whenever the moving-average validation
//               accuracy improves by at most delta_thresh between checks
//
// With decay_per_period set, time and exp use floor(t / period) in place of t.
struct NoiseSchedule {
  ScheduleKind kind = ScheduleKind::kUniform;
  double sigma0 = 1.0;
  double k = 0.0;
  int period = 1;
  double sigma_end = 0.0;
  double delta_thresh = 0.0;
  int m = 1;
  bool decay_per_period = false;

  // Throws ConfigError when the parameters violate the kind's constraints.
  void validate() const;
  bool deterministic() const { return kind != ScheduleKind::kValidation; }

  static NoiseSchedule uniform(double sigma);
  static NoiseSchedule time_decay(double sigma0, double k);
  static NoiseSchedule exp_decay(double sigma0, double k);
  static NoiseSchedule step_decay(double sigma0, double k, int period);
  static NoiseSchedule poly_decay(double sigma0, double sigma_end, double k, int period);
  static NoiseSchedule validation(double sigma0, double k, int period, double delta_thresh, int m);
};

// Noise multiplier at epoch t >= 0. Throws ConfigError for validation
// schedules, whose values depend on observed accuracy.
double sigma_at(const NoiseSchedule& schedule, int t);

// Feedback controller for the validation-based schedule.
//
// update() is called once per validation epoch with that epoch's accuracy.
// Every `period` validation epochs (and once at least m accuracies exist) it
// compares the mean of the last m accuracies against the mean recorded at the
// previous check (0 before the first check) and multiplies sigma by k when the
// improvement is at most delta_thresh.
class ValidationController {
 public:
  explicit ValidationController(const NoiseSchedule& schedule);

  double sigma() const { return sigma_; }
  const std::vector<double>& history() const { return history_; }
  double last_checked_average() const { return last_checked_avg_; }
  int decays() const { return decays_; }
  int checks() const { return checks_; }

  // Returns true if this update triggered a decay.
  bool update(double accuracy);

 private:
  NoiseSchedule schedule_;
  std::vector<double> history_;
  double sigma_;
  double last_checked_avg_ = 0.0;
  int decays_ = 0;
  int checks_ = 0;
};

// Number of epochs run before the budget is exhausted when each epoch t is
// charged 1/(2 sigma_at(t)^2) before it starts: the largest E with
// sum_{t<E} 1/(2 sigma_t^2) <= rho_total (+ kBudgetTolerance). Stops at
// max_epochs.
int epochs_until_exhaustion(const NoiseSchedule& schedule, ZcdpCost rho_total,
                            int max_epochs = 10'000'000);

// Uniform noise multiplier that spends rho_total in exactly T epochs.
double uniform_sigma_for_epochs(int epochs, ZcdpCost rho_total);

struct DecayRateSolution {
  bool feasible = false;
  double k = 0.0;
  int epochs = 0;  // epochs_until_exhaustion at the returned k (or at the grid edge)
  std::string reason;
};

struct DecayRateSearch {
  double grid_step = 1e-4;
  int period = 10;         // step decay
  int poly_period = 100;   // poly decay
  double sigma_end = 2.0;  // poly decay
  double poly_k_max = 50.0;
};

// Smallest k on the grid {step, 2 step, ...} whose schedule runs exactly
// target_epochs before exhausting rho_total. Epoch counts are monotone in k
// (nonincreasing for time/exp/poly, nondecreasing for step), so the grid is
// searched by bisection.
DecayRateSolution solve_decay_rate(ScheduleKind kind, double sigma0, ZcdpCost rho_total,
                                   int target_epochs, const DecayRateSearch& search = {});

}  // namespace dpbudget

#endif  // DPBUDGET_SCHEDULES_H_
