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

// Cost-sensitive freeze-thaw optimization loop.
//
// Each step spends one epoch of budget:
//
//   1. condition the extrapolator on the history;
//   2. pick n* maximizing the expected improvement of utility;
//   3. compute the probability of improvement p_b for n* and the step's
//      threshold (fixed delta or the adaptive Beta-CDF threshold);
//   4. stop if the regret estimate from the previous step exceeds it;
//   5. otherwise reveal y_{n*, t_n* + 1} and update the incumbent, U_prev and
//      the regret estimate.
//
// The stop check starts at b = 2, once a previous step exists. The first
// observation always becomes the incumbent; the 0-epoch value only
// conditions the extrapolator.
//
// Trace files are JSON lines: a header, one record per step, an optional
// stop record and a summary. Configuration indices are 0-based.

#ifndef CFBO_ENGINE_HPP_
#define CFBO_ENGINE_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cfbo/acquisition.hpp"
#include "cfbo/lc_data.hpp"
#include "cfbo/stopping.hpp"
#include "cfbo/surrogate.hpp"
#include "cfbo/utility.hpp"

namespace cfbo {

inline constexpr char kToolVersion[] = "cfbo 1.0.0";

enum class Method { kCfbo, kCfboFixedThreshold, kRandom };

const char* MethodName(Method method);
// Throws Error(kDomain) for unknown names.
Method ParseMethod(const std::string& name);

struct StepRecord {
  int b = 0;  // budget spent after this step
  int n = 0;
  int best_dt = 0;
  double acquisition = 0.0;
  double y = 0.0;          // revealed value
  double incumbent = 0.0;  // best value after this step
  double u_p = 0.0;        // U(b, incumbent)
  std::optional<double> p_b;
  std::optional<double> threshold;
  double r_hat = 0.0;  // regret estimate after this step
};

// The step at which the run broke off without spending budget.
struct StopRecord {
  int b = 0;  // the step index that was not executed
  int n = 0;
  double p_b = 0.0;
  double threshold = 0.0;
  double r_hat = 0.0;  // estimate that exceeded the threshold
};

struct IncumbentTriple {
  int n = -1;
  int t = 0;
  double y = 0.0;
};

struct BOTrace {
  // Header.
  std::string task_name;
  std::string method;
  std::uint64_t seed = 0;
  int budget = 0;
  std::string utility_json;
  std::optional<StopConfig> stop_config;
  int raw_samples = 0;
  int group_size = 0;

  std::vector<StepRecord> steps;
  std::optional<StopRecord> stop;
  bool exhausted = false;
  int stop_step = 0;  // budget spent at termination
  IncumbentTriple incumbent;
};

struct RunOptions {
  SamplingOptions sampling;
  SurrogateOptions surrogate;  // its seed is derived from `seed`
  std::uint64_t seed = 0;
};

// Runs with the default power-law ensemble extrapolator. The total budget is
// the utility's B.
BOTrace Run(const LCTask& task, const UtilityFn& u, const StopConfig& stop,
            const RunOptions& options);

// Same loop with a caller-supplied extrapolator.
BOTrace RunWithExtrapolator(const LCTask& task, const UtilityFn& u,
                            const StopConfig& stop, const RunOptions& options,
                            CurveExtrapolator& model);

// Random search: trains uniformly drawn untrained configurations to their last
// epoch, one epoch per step, until the budget or the pool runs out. Never
// stops early.
BOTrace RunBaselineRandom(const LCTask& task, const UtilityFn& u,
                          const RunOptions& options);

BOTrace RunMethod(Method method, const LCTask& task, const UtilityFn& u,
                  const StopConfig& stop, const RunOptions& options);

std::string SerializeTrace(const BOTrace& trace);
BOTrace ParseTrace(const std::string& contents);
BOTrace LoadTrace(const std::string& path);

}  // namespace cfbo

#endif  // CFBO_ENGINE_HPP_
