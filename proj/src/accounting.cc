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

#include "dpbudget/accounting.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dpbudget/errors.h"

namespace dpbudget {
namespace {

void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    std::ostringstream msg;
    msg << "sigma must be positive and finite, got " << sigma;
    throw DomainError(msg.str());
  }
}

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    std::ostringstream msg;
    msg << "delta must lie in (0, 1), got " << delta;
    throw DomainError(msg.str());
  }
}

void check_ratio(double q) {
  if (!(q > 0.0 && q <= 1.0)) {
    std::ostringstream msg;
    msg << "sampling ratio must lie in (0, 1], got " << q;
    throw DomainError(msg.str());
  }
}

void check_rs_precondition(double q, double sigma) {
  if (q > 1.0 / (16.0 * sigma)) {
    std::ostringstream msg;
    msg << "subsampled accounting requires q <= 1/(16 sigma): q=" << q << ", sigma=" << sigma
        << ", limit=" << 1.0 / (16.0 * sigma);
    throw PreconditionError(msg.str());
  }
}

}  // namespace

ZcdpCost::ZcdpCost(double value) : rho(value) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    std::ostringstream msg;
    msg << "rho must be finite and nonnegative, got " << value;
    throw DomainError(msg.str());
  }
}

ZcdpCost rho_of_gaussian(double sigma) {
  check_sigma(sigma);
  return ZcdpCost(1.0 / (2.0 * sigma * sigma));
}

EpsDelta zcdp_to_dp(ZcdpCost rho, double delta) {
  check_delta(delta);
  return {rho.rho + 2.0 * std::sqrt(rho.rho * std::log(1.0 / delta)), delta};
}

ZcdpCost budget_from_eps(double eps, double delta) {
  check_delta(delta);
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw DomainError("eps must be finite and nonnegative");
  const double log_inv_delta = std::log(1.0 / delta);
  // (sqrt(L + eps) - sqrt(L))^2 rewritten as eps^2 / (sqrt(L + eps) + sqrt(L))^2
  // to avoid cancellation for small eps.
  const double denom = std::sqrt(log_inv_delta + eps) + std::sqrt(log_inv_delta);
  return ZcdpCost(eps * eps / (denom * denom));
}

EpsDelta dp_of_gaussian_classic(double sigma, double delta) {
  check_delta(delta);
  if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
  if (std::isinf(sigma)) return {0.0, delta, false};
  const double eps = std::sqrt(2.0 * std::log(1.25 / delta)) / sigma;
  return {eps, delta, eps > 0.0 && eps < 1.0};
}

EpsDelta basic_composition(std::span<const EpsDelta> costs) {
  if (costs.empty()) throw UsageError("basic_composition needs at least one mechanism");
  EpsDelta total{0.0, 0.0, true};
  for (const EpsDelta& c : costs) {
    total.eps += c.eps;
    total.delta += c.delta;
    total.valid = total.valid && c.valid;
  }
  return total;
}

EpsDelta strong_composition_baseline(double eps0, double delta0, double q, long long k,
                                     double delta_prime) {
  if (k < 1) throw DomainError("strong composition needs k >= 1");
  if (!(eps0 >= 0.0)) throw DomainError("eps0 must be nonnegative");
  if (!(delta0 >= 0.0 && delta0 < 1.0)) throw DomainError("delta0 must lie in [0, 1)");
  check_ratio(q);
  check_delta(delta_prime);
  const double eps_step = std::log1p(q * std::expm1(eps0));
  const double kd = static_cast<double>(k);
  const double eps =
      eps_step * std::sqrt(2.0 * kd * std::log(1.0 / delta_prime)) + kd * eps_step * std::expm1(eps_step);
  return {eps, kd * q * delta0 + delta_prime};
}

double u_alpha(double q, double sigma) {
  check_ratio(q);
  check_sigma(sigma);
  return sigma * sigma * std::log(1.0 / (q * sigma)) + 1.0;
}

double subsampled_rho_hat(double q, double sigma) {
  check_ratio(q);
  check_sigma(sigma);
  return q * q / (sigma * sigma);
}

double rs_eps_interior(double rho_hat, double delta) {
  return rho_hat + 2.0 * std::sqrt(rho_hat * std::log(1.0 / delta));
}

double rs_eps_boundary(double rho_hat, double u_alpha, double delta) {
  return rho_hat * u_alpha - std::log(delta) / (u_alpha - 1.0);
}

EpsDelta rs_bound_to_dp(double rho_hat, double u_alpha_value, double delta) {
  check_delta(delta);
  if (!(rho_hat >= 0.0)) throw DomainError("rho_hat must be nonnegative");
  if (!(u_alpha_value > 1.0)) throw DomainError("u_alpha must exceed 1");
  const double span = u_alpha_value - 1.0;
  // delta >= exp(-rho_hat (u-1)^2)  <=>  ln(1/delta) <= rho_hat (u-1)^2
  if (std::log(1.0 / delta) <= rho_hat * span * span) {
    return {rs_eps_interior(rho_hat, delta), delta};
  }
  return {rs_eps_boundary(rho_hat, u_alpha_value, delta), delta};
}

std::string to_string(BatchingMode mode) { return mode == BatchingMode::kRF ? "rf" : "rs"; }

void AccountantLedger::charge_rf_epoch(double sigma, int epoch, int iterations) {
  if (mode_ != BatchingMode::kRF) throw UsageError("charge_rf_epoch on a non-RF ledger");
  const double cost = rho_of_gaussian(sigma).rho;
  rho_sum_ += cost;
  steps_.push_back({epoch, iterations, 1.0, sigma, cost, "epoch"});
}

void AccountantLedger::charge_rf_cost(ZcdpCost cost, std::string label, int epoch) {
  if (mode_ != BatchingMode::kRF) throw UsageError("charge_rf_cost on a non-RF ledger");
  rho_sum_ += cost.rho;
  steps_.push_back({epoch, 0, 1.0, 0.0, cost.rho, std::move(label)});
}

void AccountantLedger::charge_rs_iteration(double q, double sigma, int epoch, int iteration) {
  if (mode_ != BatchingMode::kRS) throw UsageError("charge_rs_iteration on a non-RS ledger");
  check_ratio(q);
  check_sigma(sigma);
  check_rs_precondition(q, sigma);
  const double cost = subsampled_rho_hat(q, sigma);
  rho_hat_ += cost;
  u_alpha_min_ = std::min(u_alpha_min_, u_alpha(q, sigma));
  steps_.push_back({epoch, iteration, q, sigma, cost, "iteration"});
}

double AccountantLedger::rho_after_rf_epoch(double sigma) const {
  if (mode_ != BatchingMode::kRF) throw UsageError("rho_after_rf_epoch on a non-RF ledger");
  return rho_sum_ + rho_of_gaussian(sigma).rho;
}

double AccountantLedger::eps_after_rs_iteration(double q, double sigma, double delta) const {
  if (mode_ != BatchingMode::kRS) throw UsageError("eps_after_rs_iteration on a non-RS ledger");
  check_rs_precondition(q, sigma);
  const double rho_hat = rho_hat_ + subsampled_rho_hat(q, sigma);
  const double u = std::min(u_alpha_min_, u_alpha(q, sigma));
  return rs_bound_to_dp(rho_hat, u, delta).eps;
}

EpsDelta AccountantLedger::to_dp(double delta) const {
  if (mode_ == BatchingMode::kRF) return zcdp_to_dp(ZcdpCost(rho_sum_), delta);
  return rs_ledger_to_dp(*this, delta);
}

AccountantLedger AccountantLedger::replay(BatchingMode mode, std::span<const LedgerStep> steps) {
  AccountantLedger ledger(mode);
  for (const LedgerStep& s : steps) {
    if (mode == BatchingMode::kRS) {
      ledger.charge_rs_iteration(s.q, s.sigma, s.epoch, s.iteration);
    } else if (s.sigma > 0.0) {
      ledger.charge_rf_epoch(s.sigma, s.epoch, s.iteration);
    } else {
      ledger.charge_rf_cost(ZcdpCost(s.charged), s.label, s.epoch);
    }
  }
  return ledger;
}

EpsDelta rs_ledger_to_dp(const AccountantLedger& ledger, double delta) {
  if (ledger.mode() != BatchingMode::kRS) throw UsageError("rs_ledger_to_dp on a non-RS ledger");
  if (ledger.empty()) throw UsageError("rs_ledger_to_dp on an empty ledger");
  return rs_bound_to_dp(ledger.rho_hat(), ledger.u_alpha_min(), delta);
}

}  // namespace dpbudget
