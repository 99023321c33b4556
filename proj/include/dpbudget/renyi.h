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

// Numerical Renyi divergences of the subsampled Gaussian mechanism and the
// moments accountant built on them.
//
// With base = N(0, sigma^2) and shifted = N(1, sigma^2), the mechanism run on
// a Poisson subsample with ratio q compares mixture = q*shifted + (1-q)*base
// against base. Divergences are computed by adaptive quadrature of the
// alpha-power integrand, evaluated in log space and shifted by its maximum so
// that alpha up to a few hundred does not overflow.

#ifndef DPBUDGET_RENYI_H_
#define DPBUDGET_RENYI_H_

#include <limits>
#include <vector>

#include "dpbudget/accounting.h"

namespace dpbudget {

enum class Direction {
  kMixtureToBase,  // D_alpha(mixture || base)
  kBaseToMixture,  // D_alpha(base || mixture)
};

// Absolute tolerance on the normalized integrand (which integrates to ~1).
inline constexpr double kRenyiQuadratureTolerance = 1e-12;

// ln E_base[(mixture/base)^alpha] for kMixtureToBase, and
// ln E_base[(mixture/base)^(1-alpha)] for kBaseToMixture; both equal
// (alpha - 1) * D_alpha in the stated direction. Throws NumericalError if the
// quadrature does not converge.
double subsampled_log_moment(double q, double sigma, double alpha,
                             Direction direction = Direction::kMixtureToBase);

// D_alpha between the mixture and the base Gaussian. q = 1 gives the plain
// Gaussian pair, whose divergence is alpha / (2 sigma^2).
double renyi_divergence_subsampled(double q, double sigma, double alpha,
                                   Direction direction = Direction::kMixtureToBase);

// min(ceil(sigma^2 ln(1/(q sigma))), 200), and at least 1.
int default_lambda_max(double q, double sigma);

// Moments accountant for k-fold composition of one subsampled Gaussian.
//
// The per-step log moment at integer order lambda is
// lambda * D_{lambda+1}, maximized over both directions; it is computed once
// at construction for lambda = 1..lambda_max and reused for every k.
class MomentsAccountant {
 public:
  MomentsAccountant(double q, double sigma, int lambda_max);
  MomentsAccountant(double q, double sigma) : MomentsAccountant(q, sigma, default_lambda_max(q, sigma)) {}

  // eps = min over lambda of (k * logmoment(lambda) + ln(1/delta)) / lambda.
  EpsDelta eps(long long k, double delta) const;
  // The lambda attaining the minimum in eps().
  int best_lambda(long long k, double delta) const;

  int lambda_max() const { return static_cast<int>(log_moments_.size()); }
  double log_moment(int lambda) const { return log_moments_.at(lambda - 1); }

 private:
  double q_;
  double sigma_;
  std::vector<double> log_moments_;
};

EpsDelta moments_accountant_eps(double q, double sigma, long long k, double delta, int lambda_max);

// Grid for checking D_alpha <= q^2 alpha / sigma^2 on both directions.
// sigma runs over sigma_min, sigma_min + sigma_step, ... <= sigma_max; for
// each sigma, q runs over q_min, q_min + q_step, ... <= 1/(16 sigma); alpha
// runs over the integers 2..floor(min(u_alpha(q, sigma), alpha_cap)).
struct BoundGrid {
  double sigma_min = 2.0;
  double sigma_max = 30.0;
  double sigma_step = 0.001;
  double q_min = 0.001;
  double q_step = 0.001;
  double alpha_cap = 200.0;

  static BoundGrid smoke() { return {2.0, 30.0, 1.0, 0.005, 0.005, 200.0}; }
  static BoundGrid single(double q, double sigma) { return {sigma, sigma, 1.0, q, 1.0, 200.0}; }
};

struct BoundPoint {
  double sigma;
  double q;
  double u_alpha;       // capped upper end of the alpha range
  int alphas_checked;
  double worst_slack;   // max over alpha and direction of D_alpha - bound
  int worst_alpha;
  bool holds;
};

struct BoundReport {
  std::vector<BoundPoint> points;
  long long alphas_checked = 0;
  int violations = 0;  // grid points with any alpha violating the bound
  double worst_slack = -std::numeric_limits<double>::infinity();
};

BoundReport validate_moment_bound(const BoundGrid& grid);

// One grid point; exposed for spot checks.
BoundPoint check_moment_bound(double q, double sigma, double alpha_cap = 200.0);

}  // namespace dpbudget

#endif  // DPBUDGET_RENYI_H_
