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

// Privacy-loss bookkeeping in zero-concentrated DP (zCDP) and conversions to
// (epsilon, delta)-DP. All logarithms are natural.

#ifndef DPBUDGET_ACCOUNTING_H_
#define DPBUDGET_ACCOUNTING_H_

#include <limits>
#include <span>
#include <string>
#include <vector>

namespace dpbudget {

// Absolute slack used whenever a cumulative cost is compared to a budget.
inline constexpr double kBudgetTolerance = 1e-12;

// A rho value of rho-zCDP.
struct ZcdpCost {
  double rho = 0.0;

  ZcdpCost() = default;
  explicit ZcdpCost(double rho);  // throws DomainError unless finite and >= 0

  friend ZcdpCost operator+(ZcdpCost a, ZcdpCost b) { return ZcdpCost(a.rho + b.rho); }
  friend auto operator<=>(const ZcdpCost&, const ZcdpCost&) = default;
};

struct EpsDelta {
  double eps = 0.0;
  double delta = 0.0;
  // False when eps came from a bound outside its validity range (the classic
  // Gaussian-mechanism bound is only proven for eps < 1).
  bool valid = true;
};

struct GaussianMech {
  double sigma;
  double sensitivity = 1.0;
};

struct SubsampledMech {
  double q;
  double sigma;
};

// rho = 1 / (2 sigma^2).
ZcdpCost rho_of_gaussian(double sigma);

// eps = rho + 2 sqrt(rho ln(1/delta)).
EpsDelta zcdp_to_dp(ZcdpCost rho, double delta);

// Exact inverse of zcdp_to_dp in rho: rho = (sqrt(L + eps) - sqrt(L))^2 with
// L = ln(1/delta). For small eps this is close to eps^2 / (4L).
ZcdpCost budget_from_eps(double eps, double delta);

// Smallest eps with sigma^2 >= 2 ln(1.25/delta) / eps^2. The result is flagged
// invalid when it falls outside (0, 1).
EpsDelta dp_of_gaussian_classic(double sigma, double delta);

// Sum of eps and sum of delta. Throws UsageError on an empty list.
EpsDelta basic_composition(std::span<const EpsDelta> costs);

// Amplifies a per-step (eps0, delta0) mechanism by Poisson sampling at ratio q
// to (ln(1 + q(e^eps0 - 1)), q delta0), then composes k such steps with the
// advanced composition theorem at slack delta_prime.
EpsDelta strong_composition_baseline(double eps0, double delta0, double q, long long k,
                                     double delta_prime);

// Upper end of the moment-order range on which the subsampled Gaussian obeys
// D_alpha <= q^2 alpha / sigma^2: sigma^2 ln(1/(q sigma)) + 1.
double u_alpha(double q, double sigma);

// The per-step Renyi slope bound q^2 / sigma^2.
double subsampled_rho_hat(double q, double sigma);

// Converts a Renyi bound D_alpha <= alpha * rho_hat, valid for
// 1 < alpha <= u_alpha, to (eps, delta)-DP. Uses the unconstrained optimum
// when it lies inside the range (delta >= exp(-rho_hat (u_alpha - 1)^2)) and
// the boundary alpha = u_alpha otherwise.
EpsDelta rs_bound_to_dp(double rho_hat, double u_alpha, double delta);

// The two branches of rs_bound_to_dp, exposed for continuity checks.
double rs_eps_interior(double rho_hat, double delta);
double rs_eps_boundary(double rho_hat, double u_alpha, double delta);

enum class BatchingMode { kRF, kRS };

std::string to_string(BatchingMode mode);

struct LedgerStep {
  int epoch = 0;
  int iteration = 0;  // iterations in the epoch for RF entries
  double q = 1.0;     // sampling ratio for RS entries, 1 for RF entries
  double sigma = 0.0; // 0 for costs charged directly (e.g. parameter selection)
  double charged = 0.0;
  std::string label;
};

// Append-only cumulative privacy state for one batching regime.
//
// RF: epochs compose linearly in rho; iterations inside an epoch touch
// disjoint batches and so cost nothing beyond the epoch's 1/(2 sigma^2).
// RS: every iteration adds q^2/sigma^2 to rho_hat and narrows the admissible
// moment-order range to the smallest u_alpha seen so far.
class AccountantLedger {
 public:
  explicit AccountantLedger(BatchingMode mode) : mode_(mode) {}

  BatchingMode mode() const { return mode_; }
  double rho_sum() const { return rho_sum_; }
  double rho_hat() const { return rho_hat_; }
  double u_alpha_min() const { return u_alpha_min_; }
  const std::vector<LedgerStep>& steps() const { return steps_; }
  bool empty() const { return steps_.empty(); }

  // Charges one RF epoch at noise scale sigma. `iterations` is recorded for
  // the history only; it does not change the charge.
  void charge_rf_epoch(double sigma, int epoch = 0, int iterations = 1);

  // Charges an arbitrary zCDP cost to an RF ledger (e.g. a private
  // hyperparameter selection).
  void charge_rf_cost(ZcdpCost cost, std::string label, int epoch = 0);

  // Throws PreconditionError unless q <= 1/(16 sigma).
  void charge_rs_iteration(double q, double sigma, int epoch = 0, int iteration = 0);

  // rho_sum after a hypothetical RF epoch at sigma.
  double rho_after_rf_epoch(double sigma) const;
  // eps after a hypothetical RS iteration, at the given delta.
  double eps_after_rs_iteration(double q, double sigma, double delta) const;

  // (eps, delta) of the current state. RF uses zcdp_to_dp on rho_sum; RS uses
  // rs_bound_to_dp and throws UsageError on an empty ledger.
  EpsDelta to_dp(double delta) const;

  // Rebuilds a ledger from its step list.
  static AccountantLedger replay(BatchingMode mode, std::span<const LedgerStep> steps);

 private:
  BatchingMode mode_;
  double rho_sum_ = 0.0;
  double rho_hat_ = 0.0;
  double u_alpha_min_ = std::numeric_limits<double>::infinity();
  std::vector<LedgerStep> steps_;
};

// rs_bound_to_dp applied to an RS ledger.
EpsDelta rs_ledger_to_dp(const AccountantLedger& ledger, double delta);

}  // namespace dpbudget

#endif  // DPBUDGET_ACCOUNTING_H_
