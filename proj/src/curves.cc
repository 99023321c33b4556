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

#include "dpbudget/curves.h"

#include <iomanip>
#include <limits>
#include <string>

#include "dpbudget/errors.h"
#include "dpbudget/renyi.h"

namespace dpbudget {

EpsDelta strong_composition_at_total_delta(double q, double sigma, long long k, double delta) {
  if (k < 1) throw DomainError("composition count must be at least 1");
  const double delta_prime = delta / 2.0;
  const double delta0 = delta / (2.0 * static_cast<double>(k) * q);
  const EpsDelta step = dp_of_gaussian_classic(sigma, delta0);
  return strong_composition_baseline(step.eps, delta0, q, k, delta_prime);
}

std::vector<AccountantRow> accountant_curve(const AccountantCurveParams& p) {
  if (p.epochs < 0) throw UsageError("epochs must be nonnegative");
  if (p.iterations_per_epoch < 1) throw UsageError("iterations per epoch must be at least 1");
  if (!(p.q > 0.0 && p.q < 1.0)) throw UsageError("q must lie in (0, 1)");
  if (!(p.sigma > 0.0)) throw UsageError("sigma must be positive");
  if (!(p.delta > 0.0 && p.delta < 1.0)) throw UsageError("delta must lie in (0, 1)");
  if (p.lambda_max < 0) throw UsageError("lambda_max must be nonnegative");
  const bool rs_applies = p.q <= 1.0 / (16.0 * p.sigma);
  if (!rs_applies && !p.rs_outside_range_as_nan) {
    throw PreconditionError("subsampled accounting requires q <= 1/(16 sigma); got q=" + std::to_string(p.q) +
                            " at sigma=" + std::to_string(p.sigma));
  }
  std::vector<AccountantRow> rows;
  if (p.epochs == 0) return rows;

  const MomentsAccountant ma = p.lambda_max == 0 ? MomentsAccountant(p.q, p.sigma)
                                                 : MomentsAccountant(p.q, p.sigma, p.lambda_max);
  AccountantLedger rf(BatchingMode::kRF);
  AccountantLedger rs(BatchingMode::kRS);
  for (int epoch = 1; epoch <= p.epochs; ++epoch) {
    rf.charge_rf_epoch(p.sigma, epoch - 1, p.iterations_per_epoch);
    if (rs_applies) {
      for (int it = 0; it < p.iterations_per_epoch; ++it) rs.charge_rs_iteration(p.q, p.sigma, epoch - 1, it);
    }
    const long long steps = static_cast<long long>(epoch) * p.iterations_per_epoch;
    AccountantRow row;
    row.epoch = epoch;
    row.eps_zcdp_rf = rf.to_dp(p.delta).eps;
    row.eps_strong = strong_composition_at_total_delta(p.q, p.sigma, steps, p.delta).eps;
    row.eps_zcdp_rs = rs_applies ? rs_ledger_to_dp(rs, p.delta).eps : std::numeric_limits<double>::quiet_NaN();
    row.eps_ma = ma.eps(steps, p.delta).eps;
    rows.push_back(row);
  }
  return rows;
}

void write_accountant_csv(std::ostream& out, const std::vector<AccountantRow>& rows) {
  out << "epoch,eps_zcdp_rf,eps_strong,eps_zcdp_rs,eps_ma\n";
  out << std::fixed << std::setprecision(6);
  for (const AccountantRow& r : rows) {
    out << r.epoch << ',' << r.eps_zcdp_rf << ',' << r.eps_strong << ',' << r.eps_zcdp_rs << ','
        << r.eps_ma << '\n';
  }
}

}  // namespace dpbudget
