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

// Independent reference computations for tests. Nothing here calls the
// library's numerical routines.

#ifndef CFBO_TESTS_ORACLES_HPP_
#define CFBO_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace cfbo::oracle {

// Adaptive Simpson quadrature with Richardson correction.
inline double AdaptiveSimpson(const std::function<double(double)>& f, double a,
                              double b, double tol, int max_depth = 60) {
  struct Rec {
    static double Run(const std::function<double(double)>& f, double a, double b,
                      double fa, double fm, double fb, double whole, double tol,
                      int depth) {
      const double m = 0.5 * (a + b);
      const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
      const double flm = f(lm), frm = f(rm);
      const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
      const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
      const double diff = left + right - whole;
      if (depth <= 0 || std::abs(diff) <= 15.0 * tol) {
        return left + right + diff / 15.0;
      }
      return Run(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
             Run(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    }
  };
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return Rec::Run(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// Unnormalized integral of x^(beta-1) (1-x)^(beta-1) over [0, x], x <= 0.5.
// For beta < 1 the endpoint singularity is removed with x = u^(1/beta).
inline double BetaKernelIntegral(double x, double beta) {
  if (x <= 0.0) return 0.0;
  const double tol = 1e-15;
  if (beta >= 1.0) {
    return AdaptiveSimpson(
        [beta](double s) {
          return std::pow(s, beta - 1.0) * std::pow(1.0 - s, beta - 1.0);
        },
        0.0, x, tol);
  }
  return AdaptiveSimpson(
             [beta](double u) {
               return std::pow(1.0 - std::pow(u, 1.0 / beta), beta - 1.0);
             },
             0.0, std::pow(x, beta), tol) /
         beta;
}

// CDF of Beta(beta, beta) by quadrature, normalized by the same quadrature
// so the normalizing Beta function is never needed in closed form.
inline double BetaCdfByQuadrature(double x, double beta) {
  const double half = BetaKernelIntegral(0.5, beta);
  if (x <= 0.5) return BetaKernelIntegral(x, beta) / (2.0 * half);
  return 1.0 - BetaKernelIntegral(1.0 - x, beta) / (2.0 * half);
}

// Enumerated EI/PI for explicit sample paths under a linear-in-b penalty
// U(b, y) = y - alpha * (b / B)^c. paths[s][h] is the raw sampled value at
// step h + 1 (the oracle takes its own running max).
struct BruteForceAcquisition {
  std::vector<double> ei;  // per dt
  double ei_max = 0.0;
  int best_dt = 1;
  double pi = 0.0;
};

inline BruteForceAcquisition EnumerateAcquisition(
    const std::vector<std::vector<double>>& paths, double incumbent, int b,
    double u_prev, double alpha, double c, int budget) {
  BruteForceAcquisition out;
  const int horizon = static_cast<int>(paths.front().size());
  const double num = static_cast<double>(paths.size());
  out.ei.assign(horizon, 0.0);
  std::vector<double> hits(horizon, 0.0);
  for (int dt = 1; dt <= horizon; ++dt) {
    for (const std::vector<double>& path : paths) {
      double best = incumbent;
      for (int k = 0; k < dt; ++k) best = std::max(best, path[k]);
      const double u =
          best - alpha * std::pow(static_cast<double>(b + dt) / budget, c);
      if (u > u_prev) {
        out.ei[dt - 1] += (u - u_prev) / num;
        hits[dt - 1] += 1.0 / num;
      }
    }
  }
  for (int dt = 1; dt <= horizon; ++dt) {
    if (dt == 1 || out.ei[dt - 1] > out.ei_max) {
      out.ei_max = out.ei[dt - 1];
      out.best_dt = dt;
    }
  }
  out.pi = *std::max_element(hits.begin(), hits.end());
  return out;
}

// Two-pass mean and population standard deviation.
inline std::pair<double, double> MeanStd(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double sq = 0.0;
  for (double x : v) sq += (x - mean) * (x - mean);
  return {mean, std::sqrt(sq / static_cast<double>(v.size()))};
}

}  // namespace cfbo::oracle

#endif  // CFBO_TESTS_ORACLES_HPP_
