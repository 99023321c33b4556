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

#include "dpbudget/schedules.h"

#include <cmath>
#include <numeric>
#include <sstream>

#include "dpbudget/errors.h"

namespace dpbudget {

std::string to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::kUniform: return "uniform";
    case ScheduleKind::kTime: return "time";
    case ScheduleKind::kExp: return "exp";
    case ScheduleKind::kStep: return "step";
    case ScheduleKind::kPoly: return "poly";
    case ScheduleKind::kValidation: return "validation";
  }
  return "unknown";
}

ScheduleKind schedule_kind_from_string(std::string_view name) {
  for (ScheduleKind kind : {ScheduleKind::kUniform, ScheduleKind::kTime, ScheduleKind::kExp,
                            ScheduleKind::kStep, ScheduleKind::kPoly, ScheduleKind::kValidation}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown schedule kind '" + std::string(name) + "'");
}

void NoiseSchedule::validate() const {
  auto fail = [this](const std::string& what) {
    throw ConfigError(to_string(kind) + " schedule: " + what);
  };
  if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) fail("sigma0 must be positive");
  switch (kind) {
    case ScheduleKind::kUniform:
      break;
    case ScheduleKind::kTime:
    case ScheduleKind::kExp:
      if (!(k > 0.0)) fail("decay rate k must be positive");
      if (decay_per_period && period < 1) fail("period must be at least 1");
      break;
    case ScheduleKind::kStep:
      if (!(k > 0.0 && k < 1.0)) fail("decay factor k must lie in (0, 1)");
      if (period < 1) fail("period must be at least 1");
      break;
    case ScheduleKind::kPoly:
      if (!(k > 0.0)) fail("decay power k must be positive");
      if (period < 1) fail("period must be at least 1");
      if (!(sigma_end > 0.0 && sigma_end < sigma0)) fail("sigma_end must lie in (0, sigma0)");
      break;
    case ScheduleKind::kValidation:
      if (!(k > 0.0 && k < 1.0)) fail("decay factor k must lie in (0, 1)");
      if (period < 1) fail("period must be at least 1");
      if (m < 1 || m > period) fail("window m must satisfy 1 <= m <= period");
      break;
  }
}

NoiseSchedule NoiseSchedule::uniform(double sigma) {
  NoiseSchedule s;
  s.kind = ScheduleKind::kUniform;
  s.sigma0 = sigma;
  return s;
}

NoiseSchedule NoiseSchedule::time_decay(double sigma0, double k) {
  NoiseSchedule s;
  s.kind = ScheduleKind::kTime;
  s.sigma0 = sigma0;
  s.k = k;
  return s;
}

NoiseSchedule NoiseSchedule::exp_decay(double sigma0, double k) {
  NoiseSchedule s;
  s.kind = ScheduleKind::kExp;
  s.sigma0 = sigma0;
  s.k = k;
  return s;
}

NoiseSchedule NoiseSchedule::step_decay(double sigma0, double k, int period) {
  NoiseSchedule s;
  s.kind = ScheduleKind::kStep;
  s.sigma0 = sigma0;
  s.k = k;
  s.period = period;
  return s;
}

NoiseSchedule NoiseSchedule::poly_decay(double sigma0, double sigma_end, double k, int period) {
  NoiseSchedule s;
  s.kind = ScheduleKind::kPoly;
  s.sigma0 = sigma0;
  s.sigma_end = sigma_end;
  s.k = k;
  s.period = period;
  return s;
}

NoiseSchedule NoiseSchedule::validation(double sigma0, double k, int period, double delta_thresh,
                                        int m) {
  NoiseSchedule s;
  s.kind = ScheduleKind::kValidation;
  s.sigma0 = sigma0;
  s.k = k;
  s.period = period;
  s.delta_thresh = delta_thresh;
  s.m = m;
  return s;
}

double sigma_at(const NoiseSchedule& schedule, int t) {
  schedule.validate();
  if (t < 0) throw DomainError("epoch index must be nonnegative");
  const auto& s = schedule;
  const double elapsed = s.decay_per_period ? std::floor(static_cast<double>(t) / s.period) : t;
  switch (s.kind) {
    case ScheduleKind::kUniform:
      return s.sigma0;
    case ScheduleKind::kTime:
      return s.sigma0 / (1.0 + s.k * elapsed);
    case ScheduleKind::kExp:
      return s.sigma0 * std::exp(-s.k * elapsed);
    case ScheduleKind::kStep:
      return s.sigma0 * std::pow(s.k, t / s.period);
    case ScheduleKind::kPoly:
      if (t >= s.period) return s.sigma_end;
      return (s.sigma0 - s.sigma_end) * std::pow(1.0 - static_cast<double>(t) / s.period, s.k) +
             s.sigma_end;
    case ScheduleKind::kValidation:
      throw ConfigError("validation schedule has no closed form; drive it with ValidationController");
  }
  return s.sigma0;
}

ValidationController::ValidationController(const NoiseSchedule& schedule)
    : schedule_(schedule), sigma_(schedule.sigma0) {
  if (schedule.kind != ScheduleKind::kValidation) {
    throw ConfigError("ValidationController needs a validation schedule");
  }
  schedule.validate();
}

bool ValidationController::update(double accuracy) {
  history_.push_back(accuracy);
  const int epochs = static_cast<int>(history_.size());
  if (epochs % schedule_.period != 0 || epochs < schedule_.m) return false;
  const double average =
      std::accumulate(history_.end() - schedule_.m, history_.end(), 0.0) / schedule_.m;
  const bool decay = average - last_checked_avg_ <= schedule_.delta_thresh;
  if (decay) {
    sigma_ *= schedule_.k;
    ++decays_;
  }
  last_checked_avg_ = average;
  ++checks_;
  return decay;
}

int epochs_until_exhaustion(const NoiseSchedule& schedule, ZcdpCost rho_total, int max_epochs) {
  if (!schedule.deterministic()) {
    throw ConfigError("epochs_until_exhaustion needs a deterministic schedule");
  }
  schedule.validate();
  double spent = 0.0;
  for (int t = 0; t < max_epochs; ++t) {
    spent += rho_of_gaussian(sigma_at(schedule, t)).rho;
    if (spent > rho_total.rho + kBudgetTolerance) return t;
  }
  return max_epochs;
}

double uniform_sigma_for_epochs(int epochs, ZcdpCost rho_total) {
  if (epochs < 1) throw DomainError("epoch count must be at least 1");
  if (!(rho_total.rho > 0.0)) throw DomainError("rho_total must be positive");
  return std::sqrt(epochs / (2.0 * rho_total.rho));
}

DecayRateSolution solve_decay_rate(ScheduleKind kind, double sigma0, ZcdpCost rho_total,
                                   int target_epochs, const DecayRateSearch& search) {
  if (target_epochs < 1) throw DomainError("target epoch count must be at least 1");
  if (!(search.grid_step > 0.0)) throw DomainError("grid step must be positive");

  double k_max = 0.0;
  bool increasing = false;  // epochs as a function of k
  switch (kind) {
    case ScheduleKind::kTime:
    case ScheduleKind::kExp:
      k_max = 1.0;
      break;
    case ScheduleKind::kStep:
      k_max = 1.0 - search.grid_step;
      increasing = true;
      break;
    case ScheduleKind::kPoly:
      k_max = search.poly_k_max;
      break;
    default:
      throw ConfigError("solve_decay_rate supports time, exp, step and poly schedules");
  }

  auto schedule_for = [&](long long index) {
    const double k = static_cast<double>(index) * search.grid_step;
    switch (kind) {
      case ScheduleKind::kTime: return NoiseSchedule::time_decay(sigma0, k);
      case ScheduleKind::kExp: return NoiseSchedule::exp_decay(sigma0, k);
      case ScheduleKind::kStep: return NoiseSchedule::step_decay(sigma0, k, search.period);
      default: return NoiseSchedule::poly_decay(sigma0, search.sigma_end, k, search.poly_period);
    }
  };
  auto epochs_at = [&](long long index) {
    return epochs_until_exhaustion(schedule_for(index), rho_total);
  };

  const long long last = static_cast<long long>(std::floor(k_max / search.grid_step + 1e-9));
  // First grid index whose epoch count has reached the target from the
  // starting side: epochs <= target for decreasing kinds, >= for step.
  auto reached = [&](long long index) {
    const int e = epochs_at(index);
    return increasing ? e >= target_epochs : e <= target_epochs;
  };

  DecayRateSolution out;
  if (!reached(last)) {
    out.epochs = epochs_at(last);
    std::ostringstream msg;
    msg << "target of " << target_epochs << " epochs is out of reach: k="
        << static_cast<double>(last) * search.grid_step << " gives " << out.epochs << " epochs";
    out.reason = msg.str();
    return out;
  }
  long long lo = 1;
  long long hi = last;
  while (lo < hi) {
    const long long mid = lo + (hi - lo) / 2;
    if (reached(mid)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  out.k = static_cast<double>(lo) * search.grid_step;
  out.epochs = epochs_at(lo);
  if (out.epochs != target_epochs) {
    std::ostringstream msg;
    msg << "no k on the " << search.grid_step << " grid gives exactly " << target_epochs
        << " epochs; k=" << out.k << " gives " << out.epochs;
    out.reason = msg.str();
    return out;
  }
  out.feasible = true;
  return out;
}

}  // namespace dpbudget
