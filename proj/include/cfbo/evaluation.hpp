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

// Normalized regret, multi-run aggregation and synthetic benchmark tasks.
//
//   R = (U_max - U_p) / (U_max - U_min), clamped to [0,1],
//
// where U_max = max_{n,t} U(t, y_{n,t}) is a full scan of the task,
// U_min = min_n U(B, y_{n,1}) approximates the worst outcome and U_p is the
// utility of the trace at termination.

#ifndef CFBO_EVALUATION_HPP_
#define CFBO_EVALUATION_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "cfbo/engine.hpp"
#include "cfbo/lc_data.hpp"
#include "cfbo/utility.hpp"

namespace cfbo {

struct RegretBounds {
  double u_max = 0.0;
  double u_min = 0.0;
};

RegretBounds TrueRegretBounds(const LCTask& task, const UtilityFn& u);

// Clamped ratio; 0 when U_max <= U_min (nothing to lose).
double NormalizedRegretFromUtilities(double u_max, double u_p, double u_min);

// U(stop_step, incumbent y). Throws Error(kEmpty) for a trace without
// observations.
double TerminalUtility(const UtilityFn& u, const BOTrace& trace);

// Throws Error(kMismatch) if the trace's B, task name or incumbent disagree
// with `u` and `task`.
double NormalizedRegret(const LCTask& task, const UtilityFn& u,
                        const BOTrace& trace);

struct RunRegret {
  std::string method;
  std::string task;
  std::uint64_t seed = 0;
  double regret = 0.0;
};

struct SummaryRow {
  std::string method;
  std::string task;
  double mean = 0.0;
  double std = 0.0;  // population (ddof = 0); 0 for a single run
  int runs = 0;
};

struct RankRow {
  std::string method;
  double avg_rank = 0.0;
  int tasks = 0;  // tasks that entered the average
};

struct RegretReport {
  std::vector<RunRegret> runs;        // sorted by (method, task, seed)
  std::vector<SummaryRow> summary;    // sorted by (method, task)
  std::vector<RankRow> ranks;         // sorted by method
  std::vector<std::string> warnings;  // tasks excluded from ranking, etc.
};

// Per (method, task) mean and std over seeds; per method the average over
// tasks of its rank by ascending mean regret, ties sharing the mean rank.
// Tasks lacking some method are excluded from ranking with a warning.
// Throws Error(kEmpty) on no runs.
RegretReport Aggregate(std::vector<RunRegret> runs);

// "method,task,seed,regret" and friends, with a header line.
std::string RunsCsv(const RegretReport& report);
std::string SummaryCsv(const RegretReport& report);
std::string RanksCsv(const RegretReport& report);

// Synthetic pool of pow3 curves y_{n,t} = y_inf - a_n * t^(-rate_n) with
//   y_inf  = y_inf_lo + y_inf_span * mean(x_n),
//   a_n    = a * (1 + a_spread * (2 x_n0 - 1)),
//   rate_n = rate * exp(rate_spread * (2 x_n,last - 1)),
// plus iid N(0, noise^2) per epoch, clamped to [0,1] and made monotone by a
// running max. y0_bar is half the mean first-epoch value.
struct SynthSpec {
  std::string name = "synth";
  int num_configs = 50;
  int num_epochs = 50;
  int config_dim = 3;
  double y_inf_lo = 0.5;
  double y_inf_span = 0.4;
  double a = 0.4;
  double a_spread = 0.0;
  double rate = 0.8;
  double rate_spread = 0.0;
  double noise = 0.0;
  std::uint64_t seed = 0;
};

// Throws Error(kDomain) on invalid fields.
void ValidateSynthSpec(const SynthSpec& spec);
LCTask GenSyntheticTask(const SynthSpec& spec);

}  // namespace cfbo

#endif  // CFBO_EVALUATION_HPP_
