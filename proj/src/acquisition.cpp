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

#include "cfbo/acquisition.hpp"

#include <algorithm>
#include <vector>

namespace cfbo {
namespace {

// Calls fn(dt, utility) for every sample and every dt, where utility is
// U(b + dt, best^(s)(dt)), in sample-major order.
template <typename Fn>
void ForEachFutureUtility(const UtilityFn& u, const CurveSamples& samples,
                          const History& history, Fn&& fn) {
  if (samples.num_samples() < 1 || samples.horizon() < 1) {
    throw Error(ErrorCode::kEmpty, "acquisition needs at least one sample");
  }
  const int horizon = samples.horizon();
  const double b = history.budget_spent();
  const double incumbent = history.incumbent();
  // U(b', y) == y - Penalty(b'), so the penalty is hoisted out of the
  // sample loop; hard-capped budgets stay infeasible.
  std::vector<double> penalty(horizon);
  std::vector<char> infeasible(horizon);
  for (int dt = 1; dt <= horizon; ++dt) {
    infeasible[dt - 1] = u(b + dt, 0.0) == kNegInf;
    penalty[dt - 1] = u.Penalty(b + dt);
  }
  for (int s = 0; s < samples.num_samples(); ++s) {
    double best = incumbent;
    for (int dt = 1; dt <= horizon; ++dt) {
      best = std::max(best, samples.paths(s, dt - 1));
      fn(dt, infeasible[dt - 1] ? kNegInf : best - penalty[dt - 1]);
    }
  }
}

}  // namespace

AcquisitionResult ExpectedImprovement(const UtilityFn& u,
                                      const CurveSamples& samples,
                                      const History& history) {
  const double u_prev = history.prev_utility();
  VectorXd total = VectorXd::Zero(samples.horizon());
  ForEachFutureUtility(u, samples, history, [&](int dt, double util) {
    // An infeasible (hard-capped) utility never improves.
    if (util > u_prev) total(dt - 1) += util - u_prev;
  });
  AcquisitionResult result;
  result.per_dt = total / static_cast<double>(samples.num_samples());
  result.value = result.per_dt(0);
  result.best_dt = 1;
  for (int dt = 2; dt <= samples.horizon(); ++dt) {
    if (result.per_dt(dt - 1) > result.value) {
      result.value = result.per_dt(dt - 1);
      result.best_dt = dt;
    }
  }
  return result;
}

double ProbImprovement(const UtilityFn& u, const CurveSamples& samples,
                       const History& history) {
  const double u_prev = history.prev_utility();
  Eigen::VectorXi hits = Eigen::VectorXi::Zero(samples.horizon());
  ForEachFutureUtility(u, samples, history, [&](int dt, double util) {
    if (util > u_prev) ++hits(dt - 1);
  });
  return static_cast<double>(hits.maxCoeff()) / samples.num_samples();
}

Selection SelectConfig(const UtilityFn& u, const CurveExtrapolator& model,
                       const History& history, const SamplingOptions& sampling,
                       Rng& rng) {
  if (sampling.group_size < 1 || sampling.raw_samples < sampling.group_size) {
    throw Error(ErrorCode::kDomain,
                "need group_size >= 1 and raw_samples >= group_size");
  }
  Selection best;
  for (int n = 0; n < history.num_configs(); ++n) {
    if (history.frontier(n) >= history.num_epochs()) continue;
    CurveSamples samples = VarianceReduce(
        model.Sample(n, history, sampling.raw_samples, rng), sampling.group_size);
    AcquisitionResult acq = ExpectedImprovement(u, samples, history);
    if (best.n < 0 || acq.value > best.acquisition.value) {
      best.n = n;
      best.acquisition = std::move(acq);
      best.samples = std::move(samples);
    }
  }
  if (best.n < 0) {
    throw Error(ErrorCode::kExhausted, "every configuration is fully trained");
  }
  return best;
}

}  // namespace cfbo
