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

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "dpbudget/errors.h"
#include "dpbudget/renyi.h"

namespace dpbudget {
namespace {

TEST(StrongAtTotalDelta, SplitsDeltaEvenly) {
  const EpsDelta r = strong_composition_at_total_delta(0.01, 6.0, 40000, 1e-5);
  EXPECT_NEAR(r.delta, 1e-5, 1e-18);
  const double delta0 = 1e-5 / (2.0 * 40000 * 0.01);
  const double eps0 = std::sqrt(2.0 * std::log(1.25 / delta0)) / 6.0;
  EXPECT_DOUBLE_EQ(r.eps, strong_composition_baseline(eps0, delta0, 0.01, 40000, 5e-6).eps);
}

TEST(AccountantCurve, ZeroEpochsGivesHeaderOnly) {
  AccountantCurveParams p;
  p.epochs = 0;
  std::ostringstream out;
  write_accountant_csv(out, accountant_curve(p));
  EXPECT_EQ(out.str(), "epoch,eps_zcdp_rf,eps_strong,eps_zcdp_rs,eps_ma\n");
}

TEST(AccountantCurve, RowsEqualDirectCalls) {
  AccountantCurveParams p;
  p.epochs = 5;
  p.iterations_per_epoch = 10;
  const auto rows = accountant_curve(p);
  ASSERT_EQ(rows.size(), 5u);
  const MomentsAccountant ma(p.q, p.sigma);
  for (const AccountantRow& r : rows) {
    EXPECT_DOUBLE_EQ(r.eps_zcdp_rf, zcdp_to_dp(ZcdpCost(r.epoch / 72.0), 1e-5).eps);
    EXPECT_DOUBLE_EQ(r.eps_ma, ma.eps(r.epoch * 10LL, 1e-5).eps);
    EXPECT_DOUBLE_EQ(r.eps_strong, strong_composition_at_total_delta(p.q, p.sigma, r.epoch * 10LL, 1e-5).eps);
  }
}

TEST(AccountantCurve, OrderingAtEveryEpoch) {
  AccountantCurveParams p;
  p.epochs = 400;
  const auto rows = accountant_curve(p);
  for (const AccountantRow& r : rows) {
    EXPECT_LE(r.eps_ma, r.eps_zcdp_rs) << r.epoch;
    EXPECT_LE(r.eps_zcdp_rs, r.eps_strong) << r.epoch;
  }
  EXPECT_GT(rows.back().eps_strong, rows.back().eps_zcdp_rf);
}

TEST(AccountantCurve, SigmaSweepShapes) {
  // RF eps falls steeply with sigma; RS eps barely moves.
  double rf_lo = 0, rf_hi = 0, rs_lo = 0, rs_hi = 0;
  for (double sigma : {5.0, 14.0}) {
    AccountantCurveParams p;
    p.sigma = sigma;
    p.epochs = 200;
    p.q = 0.004;  // keeps q <= 1/(16 sigma) across the sweep
    p.lambda_max = 1;
    const AccountantRow last = accountant_curve(p).back();
    (sigma == 5.0 ? rf_lo : rf_hi) = last.eps_zcdp_rf;
    (sigma == 5.0 ? rs_lo : rs_hi) = last.eps_zcdp_rs;
  }
  EXPECT_GT(rf_lo / rf_hi, 2.5);
  EXPECT_LT(rs_lo - rs_hi, rf_lo - rf_hi);
}

TEST(AccountantCurve, RejectsBadParameters) {
  AccountantCurveParams p;
  p.q = 0.0;
  EXPECT_THROW(accountant_curve(p), UsageError);
  p = {};
  p.iterations_per_epoch = 0;
  EXPECT_THROW(accountant_curve(p), UsageError);
  p = {};
  p.sigma = 14.0;
  EXPECT_THROW(accountant_curve(p), PreconditionError);
}

}  // namespace
}  // namespace dpbudget
