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

// Cumulative-eps curves of one subsampled Gaussian configuration under the
// four accountants, epoch by epoch.

#ifndef DPBUDGET_CURVES_H_
#define DPBUDGET_CURVES_H_

#include <ostream>
#include <vector>

#include "dpbudget/accounting.h"

namespace dpbudget {

struct AccountantCurveParams {
  double q = 0.01;
  double sigma = 6.0;
  int epochs = 400;
  int iterations_per_epoch = 100;
  double delta = 1e-5;
  int lambda_max = 0;  // 0 picks default_lambda_max(q, sigma)
  // When q > 1/(16 sigma) the subsampled zCDP bound does not apply. By
  // default that is a PreconditionError; with this set the column is NaN.
  bool rs_outside_range_as_nan = false;
};

struct AccountantRow {
  int epoch = 0;
  double eps_zcdp_rf = 0.0;
  double eps_strong = 0.0;
  double eps_zcdp_rs = 0.0;
  double eps_ma = 0.0;
};

// Advanced composition of k amplified Gaussian steps with the total delta
// split evenly: delta_prime = delta / 2 and per-step delta0 = delta / (2 k q),
// so k q delta0 + delta_prime = delta. eps0 comes from the classic
// Gaussian-mechanism bound at delta0.
EpsDelta strong_composition_at_total_delta(double q, double sigma, long long k, double delta);

// Rows for epochs 1..epochs. RF charges 1/(2 sigma^2) per epoch, RS charges
// every iteration, MA and strong composition compose epoch * iterations steps.
std::vector<AccountantRow> accountant_curve(const AccountantCurveParams& params);

// "epoch,eps_zcdp_rf,eps_strong,eps_zcdp_rs,eps_ma" with 6 decimals.
void write_accountant_csv(std::ostream& out, const std::vector<AccountantRow>& rows);

}  // namespace dpbudget

#endif  // DPBUDGET_CURVES_H_
