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

// Expected improvement of utility over a dynamically chosen target epoch.
//
// For a candidate n with sampled futures y^(s)_{n, t_n + 1..T}, the best
// value reachable after dt more epochs is
//
//   best^(s)(dt) = max(incumbent, y^(s)_{n, t_n + 1}, ..., y^(s)_{n, t_n + dt})
//
// and the acquisition is
//
//   A(n) = max_dt  mean_s [U(b + dt, best^(s)(dt)) - U_prev]^+.
//
// U_prev is the utility after the most recent step, not the best utility seen:
// spent budget cannot be recovered, so the reference can go down.

#ifndef CFBO_ACQUISITION_HPP_
#define CFBO_ACQUISITION_HPP_

#include "cfbo/common.hpp"
#include "cfbo/lc_data.hpp"
#include "cfbo/surrogate.hpp"
#include "cfbo/utility.hpp"

namespace cfbo {

struct AcquisitionResult {
  double value = 0.0;  // max over per_dt, >= 0
  int best_dt = 1;     // first dt attaining the max
  VectorXd per_dt;     // per_dt(dt - 1) = EI at dt
};

// Throws Error(kEmpty) on empty samples.
AcquisitionResult ExpectedImprovement(const UtilityFn& u,
                                      const CurveSamples& samples,
                                      const History& history);

// p_b = max_dt mean_s 1[U(b + dt, best^(s)(dt)) > U_prev].
double ProbImprovement(const UtilityFn& u, const CurveSamples& samples,
                       const History& history);

struct SamplingOptions {
  int raw_samples = 5000;
  int group_size = 5;  // raw samples are averaged in groups of this size

  int reduced_samples() const { return raw_samples / group_size; }
};

struct Selection {
  int n = -1;
  AcquisitionResult acquisition;
  CurveSamples samples;  // the reduced samples behind `acquisition`
};

// Scores every configuration with t_n < T on fresh variance-reduced samples
// and returns the argmax (lowest index on ties). Throws Error(kExhausted)
// when no configuration can be trained further.
Selection SelectConfig(const UtilityFn& u, const CurveExtrapolator& model,
                       const History& history, const SamplingOptions& sampling,
                       Rng& rng);

}  // namespace cfbo

#endif  // CFBO_ACQUISITION_HPP_
