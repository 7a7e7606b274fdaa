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

#include "cfbo/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <tuple>

namespace cfbo {

RegretBounds TrueRegretBounds(const LCTask& task, const UtilityFn& u) {
  if (task.num_configs() < 1 || task.num_epochs() < 1) {
    throw Error(ErrorCode::kEmpty, "task has no curves");
  }
  RegretBounds bounds{kNegInf, -kNegInf};
  for (int n = 0; n < task.num_configs(); ++n) {
    for (int t = 1; t <= task.num_epochs(); ++t) {
      bounds.u_max = std::max(bounds.u_max, u(t, task.curves(n, t - 1)));
    }
    bounds.u_min = std::min(bounds.u_min, u(u.budget(), task.curves(n, 0)));
  }
  return bounds;
}

double NormalizedRegretFromUtilities(double u_max, double u_p, double u_min) {
  const double span = u_max - u_min;
  if (!(span > 0.0)) return 0.0;
  return std::clamp((u_max - u_p) / span, 0.0, 1.0);
}

double TerminalUtility(const UtilityFn& u, const BOTrace& trace) {
  if (trace.incumbent.n < 0 || trace.stop_step < 1) {
    throw Error(ErrorCode::kEmpty, "trace has no observations");
  }
  return u(trace.stop_step, trace.incumbent.y);
}

double NormalizedRegret(const LCTask& task, const UtilityFn& u,
                        const BOTrace& trace) {
  if (trace.budget != u.budget()) {
    throw Error(ErrorCode::kMismatch,
                "trace budget " + std::to_string(trace.budget) +
                    " != utility budget " + std::to_string(u.budget()));
  }
  if (trace.task_name != task.name) {
    throw Error(ErrorCode::kMismatch,
                "trace task " + trace.task_name + " != " + task.name);
  }
  const IncumbentTriple& inc = trace.incumbent;
  if (inc.n >= 0 &&
      (inc.n >= task.num_configs() || inc.t < 1 || inc.t > task.num_epochs() ||
       task.curves(inc.n, inc.t - 1) != inc.y)) {
    throw Error(ErrorCode::kMismatch, "trace incumbent does not match task");
  }
  const RegretBounds bounds = TrueRegretBounds(task, u);
  return NormalizedRegretFromUtilities(bounds.u_max, TerminalUtility(u, trace),
                                       bounds.u_min);
}

RegretReport Aggregate(std::vector<RunRegret> runs) {
  if (runs.empty()) throw Error(ErrorCode::kEmpty, "no runs to aggregate");
  std::sort(runs.begin(), runs.end(), [](const RunRegret& a, const RunRegret& b) {
    return std::tie(a.method, a.task, a.seed) < std::tie(b.method, b.task, b.seed);
  });
  RegretReport report;
  report.runs = runs;

  std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
  std::set<std::string> methods;
  for (const RunRegret& r : runs) {
    groups[{r.method, r.task}].push_back(r.regret);
    methods.insert(r.method);
  }
  std::map<std::string, std::vector<std::pair<double, std::string>>> by_task;
  for (const auto& [key, values] : groups) {
    SummaryRow row;
    row.method = key.first;
    row.task = key.second;
    row.runs = static_cast<int>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    row.mean = sum / row.runs;
    double sq = 0.0;
    for (double v : values) sq += (v - row.mean) * (v - row.mean);
    row.std = std::sqrt(sq / row.runs);
    report.summary.push_back(row);
    by_task[row.task].emplace_back(row.mean, row.method);
  }

  std::map<std::string, std::pair<double, int>> rank_sums;
  for (const std::string& m : methods) rank_sums[m] = {0.0, 0};
  for (auto& [task, entries] : by_task) {
    if (entries.size() != methods.size()) {
      report.warnings.push_back("task " + task +
                                " lacks some methods; excluded from ranking");
      continue;
    }
    std::sort(entries.begin(), entries.end());
    for (size_t i = 0; i < entries.size();) {
      size_t j = i;
      while (j < entries.size() && entries[j].first == entries[i].first) ++j;
      // Positions i..j-1 share ranks i+1..j.
      const double rank = 0.5 * static_cast<double>(i + 1 + j);
      for (size_t k = i; k < j; ++k) {
        rank_sums[entries[k].second].first += rank;
        rank_sums[entries[k].second].second += 1;
      }
      i = j;
    }
  }
  for (const auto& [method, acc] : rank_sums) {
    if (acc.second == 0) {
      report.warnings.push_back("method " + method + " has no ranked task");
      continue;
    }
    report.ranks.push_back({method, acc.first / acc.second, acc.second});
  }
  return report;
}

std::string RunsCsv(const RegretReport& report) {
  std::string out = "method,task,seed,regret\n";
  for (const RunRegret& r : report.runs) {
    out += r.method + "," + r.task + "," + std::to_string(r.seed) + "," +
           FormatDouble(r.regret) + "\n";
  }
  return out;
}

std::string SummaryCsv(const RegretReport& report) {
  std::string out = "method,task,mean,std\n";
  for (const SummaryRow& r : report.summary) {
    out += r.method + "," + r.task + "," + FormatDouble(r.mean) + "," +
           FormatDouble(r.std) + "\n";
  }
  return out;
}

std::string RanksCsv(const RegretReport& report) {
  std::string out = "method,avg_rank\n";
  for (const RankRow& r : report.ranks) {
    out += r.method + "," + FormatDouble(r.avg_rank) + "\n";
  }
  return out;
}

void ValidateSynthSpec(const SynthSpec& spec) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::kDomain, std::string("synthetic spec: ") + what);
  };
  require(spec.num_configs >= 1, "num_configs must be >= 1");
  require(spec.num_epochs >= 2, "num_epochs must be >= 2");
  require(spec.config_dim >= 1, "config_dim must be >= 1");
  require(std::isfinite(spec.y_inf_lo) && std::isfinite(spec.y_inf_span) &&
              spec.y_inf_span >= 0.0,
          "y_inf_lo must be finite and y_inf_span >= 0");
  require(std::isfinite(spec.a) && spec.a >= 0.0, "a must be >= 0");
  require(std::isfinite(spec.a_spread) && spec.a_spread >= 0.0 &&
              spec.a_spread <= 1.0,
          "a_spread must lie in [0,1]");
  require(std::isfinite(spec.rate) && spec.rate > 0.0, "rate must be > 0");
  require(std::isfinite(spec.rate_spread) && spec.rate_spread >= 0.0,
          "rate_spread must be >= 0");
  require(std::isfinite(spec.noise) && spec.noise >= 0.0, "noise must be >= 0");
}

LCTask GenSyntheticTask(const SynthSpec& spec) {
  ValidateSynthSpec(spec);
  Rng rng(MixSeed(spec.seed, 0x5e7));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  LCTask task;
  task.name = spec.name;
  task.configs.resize(spec.num_configs, spec.config_dim);
  task.curves.resize(spec.num_configs, spec.num_epochs);
  for (int n = 0; n < spec.num_configs; ++n) {
    for (int d = 0; d < spec.config_dim; ++d) task.configs(n, d) = unit(rng);
  }
  for (int n = 0; n < spec.num_configs; ++n) {
    const auto x = task.configs.row(n);
    const double y_inf = spec.y_inf_lo + spec.y_inf_span * x.mean();
    const double a = spec.a * (1.0 + spec.a_spread * (2.0 * x(0) - 1.0));
    const double rate =
        spec.rate * std::exp(spec.rate_spread * (2.0 * x(spec.config_dim - 1) - 1.0));
    double best = 0.0;
    for (int t = 1; t <= spec.num_epochs; ++t) {
      double y = y_inf - a * std::pow(static_cast<double>(t), -rate);
      if (spec.noise > 0.0) y += spec.noise * gauss(rng);
      y = std::clamp(y, 0.0, 1.0);
      best = t == 1 ? y : std::max(best, y);
      task.curves(n, t - 1) = best;
    }
  }
  task.y0_bar = 0.5 * task.curves.col(0).mean();
  ValidateTask(task);
  return task;
}

}  // namespace cfbo
