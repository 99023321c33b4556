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

#include "dpbudget/renyi.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "dpbudget/errors.h"
#include "dpbudget/quadrature.h"

namespace dpbudget {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(-std::abs(a - b)));
}

// Everything the integrand needs, precomputed once per call.
struct MixtureIntegrand {
  double log_one_minus_q;
  double log_q;
  double inv_two_var;
  double log_norm;  // ln(sigma sqrt(2 pi))
  double exponent;  // alpha or 1 - alpha

  // ln(mixture(x) / base(x)) = ln(1 - q + q exp((2x - 1) / (2 sigma^2))).
  double log_ratio(double x) const {
    return log_add_exp(log_one_minus_q, log_q + (2.0 * x - 1.0) * inv_two_var);
  }
  double log_value(double x) const {
    return exponent * log_ratio(x) - x * x * inv_two_var - log_norm;
  }
};

}  // namespace

double subsampled_log_moment(double q, double sigma, double alpha, Direction direction) {
  if (!(q > 0.0 && q <= 1.0)) throw DomainError("sampling ratio must lie in (0, 1]");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("sigma must be positive");
  if (!(alpha > 1.0) || !std::isfinite(alpha)) throw DomainError("alpha must exceed 1");

  const MixtureIntegrand g{
      q < 1.0 ? std::log1p(-q) : kNegInf, std::log(q), 1.0 / (2.0 * sigma * sigma),
      std::log(sigma * std::sqrt(2.0 * std::numbers::pi)),
      direction == Direction::kMixtureToBase ? alpha : 1.0 - alpha};

  // The tilted integrand concentrates near 0 and, for the q = 1 component,
  // near alpha (forward) or 1 - alpha (reverse); R covers the Gaussian tails.
  const double tail = sigma * std::sqrt(2.0 * (alpha * std::numbers::ln10 + 30.0));
  const double lo = -(alpha - 1.0) - tail;
  const double hi = alpha + tail;

  // Shift by the (sampled) maximum so the integrand peaks near
  // 1 / (sigma sqrt(2 pi)) and integrates to O(1).
  double peak = kNegInf;
  constexpr int kSamples = 4096;
  for (int i = 0; i <= kSamples; ++i) {
    peak = std::max(peak, g.log_value(lo + (hi - lo) * i / kSamples));
  }
  for (double x : {0.0, 0.5, 1.0, alpha, 1.0 - alpha}) peak = std::max(peak, g.log_value(x));
  const double shift = peak + g.log_norm;

  auto integrand = [&g, shift](double x) { return std::exp(g.log_value(x) - shift); };
  const QuadratureResult r = integrate_adaptive(integrand, lo, hi, kRenyiQuadratureTolerance,
                                                {0.0, 0.5, 1.0, alpha, 1.0 - alpha}, 64);
  if (!r.converged || !(r.value > 0.0) || !std::isfinite(r.value)) {
    std::ostringstream msg;
    msg << "Renyi quadrature did not converge: q=" << q << " sigma=" << sigma << " alpha=" << alpha
        << " direction=" << (direction == Direction::kMixtureToBase ? "forward" : "reverse")
        << " value=" << r.value << " error=" << r.error << " panels=" << r.intervals;
    throw NumericalError(msg.str());
  }
  return std::log(r.value) + shift;
}

double renyi_divergence_subsampled(double q, double sigma, double alpha, Direction direction) {
  return subsampled_log_moment(q, sigma, alpha, direction) / (alpha - 1.0);
}

int default_lambda_max(double q, double sigma) {
  const double range = std::ceil(sigma * sigma * std::log(1.0 / (q * sigma)));
  if (!(range >= 1.0)) return 1;
  return static_cast<int>(std::min(range, 200.0));
}

MomentsAccountant::MomentsAccountant(double q, double sigma, int lambda_max) : q_(q), sigma_(sigma) {
  if (lambda_max < 1) throw DomainError("lambda_max must be at least 1");
  log_moments_.reserve(lambda_max);
  for (int lambda = 1; lambda <= lambda_max; ++lambda) {
    const double alpha = lambda + 1.0;
    log_moments_.push_back(
        std::max(subsampled_log_moment(q_, sigma_, alpha, Direction::kMixtureToBase),
                 subsampled_log_moment(q_, sigma_, alpha, Direction::kBaseToMixture)));
  }
}

int MomentsAccountant::best_lambda(long long k, double delta) const {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  if (k < 0) throw DomainError("composition count must be nonnegative");
  const double log_inv_delta = std::log(1.0 / delta);
  double best = std::numeric_limits<double>::infinity();
  int best_lambda = 1;
  for (int lambda = 1; lambda <= lambda_max(); ++lambda) {
    const double eps = (static_cast<double>(k) * log_moments_[lambda - 1] + log_inv_delta) / lambda;
    if (eps < best) {
      best = eps;
      best_lambda = lambda;
    }
  }
  return best_lambda;
}

EpsDelta MomentsAccountant::eps(long long k, double delta) const {
  const int lambda = best_lambda(k, delta);
  return {(static_cast<double>(k) * log_moments_[lambda - 1] + std::log(1.0 / delta)) / lambda, delta};
}

EpsDelta moments_accountant_eps(double q, double sigma, long long k, double delta, int lambda_max) {
  return MomentsAccountant(q, sigma, lambda_max).eps(k, delta);
}

BoundPoint check_moment_bound(double q, double sigma, double alpha_cap) {
  const double upper = std::min(u_alpha(q, sigma), alpha_cap);
  BoundPoint point{sigma, q, upper, 0, -std::numeric_limits<double>::infinity(), 0, true};
  const double slope = q * q / (sigma * sigma);
  for (int alpha = 2; alpha <= static_cast<int>(std::floor(upper)); ++alpha) {
    const double bound = slope * alpha;
    for (Direction d : {Direction::kMixtureToBase, Direction::kBaseToMixture}) {
      const double slack = renyi_divergence_subsampled(q, sigma, alpha, d) - bound;
      if (slack > point.worst_slack) {
        point.worst_slack = slack;
        point.worst_alpha = alpha;
      }
    }
    ++point.alphas_checked;
  }
  point.holds = !(point.worst_slack > 0.0);
  return point;
}

BoundReport validate_moment_bound(const BoundGrid& grid) {
  BoundReport report;
  if (!(grid.sigma_step > 0.0) || !(grid.q_step > 0.0)) throw DomainError("grid steps must be positive");
  constexpr double kEdge = 1e-9;
  for (long long i = 0;; ++i) {
    const double sigma = grid.sigma_min + static_cast<double>(i) * grid.sigma_step;
    if (sigma > grid.sigma_max + kEdge) break;
    const double q_limit = 1.0 / (16.0 * sigma);
    for (long long j = 0;; ++j) {
      const double q = grid.q_min + static_cast<double>(j) * grid.q_step;
      if (q > q_limit + kEdge * grid.q_step) break;
      BoundPoint point = check_moment_bound(q, sigma, grid.alpha_cap);
      report.alphas_checked += point.alphas_checked;
      if (!point.holds) ++report.violations;
      if (point.alphas_checked > 0) report.worst_slack = std::max(report.worst_slack, point.worst_slack);
      report.points.push_back(point);
    }
  }
  return report;
}

}  // namespace dpbudget
