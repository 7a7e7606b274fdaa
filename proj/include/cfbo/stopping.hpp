// Copyright 2026 The CFBO Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Regret-based stopping.
//
// The run stops once the estimated normalized regret of the most recent
// utility,
//
//   R = (U_max_seen - U_prev) / (U_max_seen - U_min_est),
//
// exceeds a threshold. The threshold is either fixed or adapts to the
// probability p that the chosen configuration still improves the utility:
//
//   threshold(p) = I_p(beta, beta) ^ gamma
//
// where I is the regularized incomplete beta function. gamma pins the
// threshold at p = 0.5 to 0.5^gamma; beta interpolates between a flat
// threshold (beta -> 0) and a step at p = 0.5 (beta -> infinity).

#ifndef CFBO_STOPPING_HPP_
#define CFBO_STOPPING_HPP_

#include <cmath>
#include <limits>
#include <string>

#include "cfbo/common.hpp"

namespace cfbo {
namespace internal {

// Continued fraction for I_x(a, b), modified Lentz evaluation. Converges
// quickly for x < (a + 1) / (a + b + 2).
template <typename Scalar>
Scalar IncompleteBetaContinuedFraction(Scalar x, Scalar a, Scalar b) {
  constexpr int kMaxIter = 1000000;
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  const Scalar tiny = std::numeric_limits<Scalar>::min() / eps;
  const Scalar qab = a + b;
  const Scalar qap = a + Scalar(1);
  const Scalar qam = a - Scalar(1);
  Scalar c = 1;
  Scalar d = Scalar(1) - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = Scalar(1) / d;
  Scalar h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const Scalar m2 = Scalar(2 * m);
    Scalar aa = Scalar(m) * (b - Scalar(m)) * x / ((qam + m2) * (a + m2));
    d = Scalar(1) + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = Scalar(1) + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = Scalar(1) / d;
    h *= d * c;
    aa = -(a + Scalar(m)) * (qab + Scalar(m)) * x / ((a + m2) * (qap + m2));
    d = Scalar(1) + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = Scalar(1) + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = Scalar(1) / d;
    const Scalar del = d * c;
    h *= del;
    if (std::abs(del - Scalar(1)) <= eps) return h;
  }
  throw Error(ErrorCode::kNumeric, "incomplete beta continued fraction did not converge");
}

}  // namespace internal

// Regularized incomplete beta I_x(a, b) for x in [0,1], a, b > 0.
template <typename Scalar>
Scalar RegularizedIncompleteBeta(Scalar x, Scalar a, Scalar b) {
  if (!(x >= Scalar(0) && x <= Scalar(1)) || !(a > Scalar(0)) ||
      !(b > Scalar(0))) {
    throw Error(ErrorCode::kDomain,
                "incomplete beta needs x in [0,1] and positive shapes");
  }
  if (x == Scalar(0)) return Scalar(0);
  if (x == Scalar(1)) return Scalar(1);
  using std::exp;
  using std::lgamma;
  using std::log;
  const Scalar log_front = lgamma(a + b) - lgamma(a) - lgamma(b) +
                           a * log(x) + b * std::log1p(-x);
  if (x < (a + Scalar(1)) / (a + b + Scalar(2))) {
    return exp(log_front) *
           internal::IncompleteBetaContinuedFraction(x, a, b) / a;
  }
  // I_x(a, b) = 1 - I_{1-x}(b, a)
  return Scalar(1) - exp(log_front) *
                         internal::IncompleteBetaContinuedFraction(
                             Scalar(1) - x, b, a) /
                         b;
}

// CDF of the symmetric Beta(beta, beta) distribution.
template <typename Scalar>
Scalar BetaCdf(Scalar x, Scalar beta) {
  if (x == Scalar(0.5) && beta > Scalar(0)) return Scalar(0.5);
  return RegularizedIncompleteBeta(x, beta, beta);
}

enum class StopMode { kFixed, kAdaptive };

struct StopConfig {
  StopMode mode = StopMode::kAdaptive;
  double delta = 0.2;                                 // fixed threshold
  double beta = 0.36787944117144233;                  // exp(-1)
  double gamma = 2.321928094887362;                   // log_0.5(0.2)

  static StopConfig Fixed(double delta);
  static StopConfig Adaptive(double beta, double gamma);
  // Throws Error(kDomain) on delta outside [0,1] or non-positive beta/gamma.
  void Validate() const;
  std::string Describe() const;
};

// I_p(beta, beta) ^ gamma.
double AdaptiveThreshold(double p_b, double beta, double gamma);
inline double AdaptiveThreshold(double p_b, const StopConfig& cfg) {
  return AdaptiveThreshold(p_b, cfg.beta, cfg.gamma);
}

// Threshold in effect for a step: delta for fixed mode, the adaptive value
// for adaptive mode.
double StepThreshold(const StopConfig& cfg, double p_b);

struct RegretEstimate {
  double value = 0.0;       // clamped to [0,1]
  bool degenerate = false;  // U_max_seen <= U_min_est; value forced to 0
};

RegretEstimate EstimatedRegret(double u_max_hat, double u_p, double u_min_hat);

// Strict comparison: equality never stops.
inline bool ShouldStop(double r_hat, double threshold) {
  return r_hat > threshold;
}

}  // namespace cfbo

#endif  // CFBO_STOPPING_HPP_
