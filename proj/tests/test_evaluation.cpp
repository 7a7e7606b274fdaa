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

#include <cmath>
#include <string>
#include <vector>

#include "cfbo/evaluation.hpp"
#include "doctest.h"
#include "oracles.hpp"

namespace cfbo {
namespace {

// Three configurations, four epochs; U(b, y) = y - 0.25 * b / 10.
LCTask HandTask() {
  LCTask task;
  task.name = "hand";
  task.configs.resize(3, 1);
  task.configs << 0.0, 0.5, 1.0;
  task.curves.resize(3, 4);
  task.curves << 0.2, 0.4, 0.5, 0.55,  //
      0.6, 0.65, 0.7, 0.9,             //
      0.1, 0.3, 0.35, 0.4;
  task.y0_bar = 0.05;
  return task;
}

BOTrace HandTrace(int n, int t, double y, int stop_step) {
  BOTrace trace;
  trace.task_name = "hand";
  trace.budget = 10;
  trace.incumbent = {n, t, y};
  trace.stop_step = stop_step;
  return trace;
}

TEST_CASE("Regret bounds and normalized regret by hand") {
  const LCTask task = HandTask();
  const UtilityFn u = UtilityFn::Power(10, 0.25, 1.0);
  // Best single (n, t): config 1 at t = 4, 0.9 - 0.1 = 0.8.
  // Worst first-epoch value at the full budget: 0.1 - 0.25 = -0.15.
  const RegretBounds bounds = TrueRegretBounds(task, u);
  CHECK(bounds.u_max == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(bounds.u_min == doctest::Approx(-0.15).epsilon(1e-14));
  // Incumbent 0.5 at budget 6: U = 0.35, R = 0.45 / 0.95.
  CHECK(std::abs(NormalizedRegret(task, u, HandTrace(0, 3, 0.5, 6)) -
                 0.45 / 0.95) <= 1e-12);
  CHECK(NormalizedRegret(task, u, HandTrace(1, 4, 0.9, 4)) == 0.0);
  CHECK(NormalizedRegret(task, u, HandTrace(2, 1, 0.1, 10)) == 1.0);
}

TEST_CASE("Regret validates the trace against the task") {
  const LCTask task = HandTask();
  const UtilityFn u = UtilityFn::Power(10, 0.25, 1.0);
  auto code = [&](const BOTrace& trace, const UtilityFn& util) {
    try {
      NormalizedRegret(task, util, trace);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kParse;
  };
  CHECK(code(HandTrace(0, 3, 0.5, 6), UtilityFn::Power(11, 0.25, 1.0)) ==
        ErrorCode::kMismatch);
  BOTrace renamed = HandTrace(0, 3, 0.5, 6);
  renamed.task_name = "other";
  CHECK(code(renamed, u) == ErrorCode::kMismatch);
  CHECK(code(HandTrace(0, 3, 0.51, 6), u) == ErrorCode::kMismatch);
  CHECK(code(HandTrace(5, 1, 0.5, 6), u) == ErrorCode::kMismatch);
  CHECK(code(HandTrace(-1, 0, 0.0, 0), u) == ErrorCode::kEmpty);
}

TEST_CASE("Normalized regret is clamped and affine invariant") {
  CHECK(NormalizedRegretFromUtilities(1.0, 1.2, 0.0) == 0.0);
  CHECK(NormalizedRegretFromUtilities(1.0, -0.5, 0.0) == 1.0);
  CHECK(NormalizedRegretFromUtilities(0.3, 0.3, 0.3) == 0.0);
  for (double k : {-2.0, 0.0, 3.5}) {
    for (double s : {0.5, 1.0, 7.0}) {
      CHECK(NormalizedRegretFromUtilities(s * 0.8 + k, s * 0.35 + k,
                                          s * -0.15 + k) ==
            doctest::Approx(0.45 / 0.95).epsilon(1e-12));
    }
  }
}

TEST_CASE("Aggregate matches two-pass statistics and ranks ties") {
  std::vector<RunRegret> runs = {
      {"b", "t1", 1, 0.3}, {"a", "t1", 0, 0.1}, {"a", "t1", 1, 0.5},
      {"b", "t1", 0, 0.3}, {"a", "t2", 0, 0.2}, {"b", "t2", 0, 0.4},
      {"c", "t1", 0, 0.9},
  };
  const RegretReport report = Aggregate(runs);
  REQUIRE(report.runs.size() == 7);
  CHECK(report.runs.front().method == "a");
  CHECK(report.runs.front().regret == 0.1);
  REQUIRE(report.summary.size() == 5);
  const auto [mean, sd] = oracle::MeanStd({0.1, 0.5});
  CHECK(report.summary[0].method == "a");
  CHECK(report.summary[0].task == "t1");
  CHECK(report.summary[0].mean == doctest::Approx(mean).epsilon(1e-15));
  CHECK(report.summary[0].std == doctest::Approx(sd).epsilon(1e-15));
  CHECK(report.summary[0].runs == 2);
  CHECK(report.summary[1].std == 0.0);
  // t1: a and b tie at 0.3 (rank 1.5 each), c ranks 3; t2 lacks c.
  REQUIRE(report.ranks.size() == 3);
  CHECK(report.ranks[0].avg_rank == 1.5);
  CHECK(report.ranks[1].avg_rank == 1.5);
  CHECK(report.ranks[2].avg_rank == 3.0);
  CHECK(report.ranks[0].tasks == 1);
  REQUIRE(report.warnings.size() == 1);
  CHECK(report.warnings[0].find("t2") != std::string::npos);

  const RegretReport single = Aggregate({{"a", "x", 0, 0.4}, {"a", "y", 0, 0.1}});
  REQUIRE(single.ranks.size() == 1);
  CHECK(single.ranks[0].avg_rank == 1.0);
  CHECK(single.ranks[0].tasks == 2);
  CHECK_THROWS_AS(Aggregate({}), Error);
}

TEST_CASE("Report CSVs") {
  const RegretReport report =
      Aggregate({{"a", "x", 0, 0.25}, {"b", "x", 0, 0.5}});
  CHECK(RunsCsv(report).rfind("method,task,seed,regret\n", 0) == 0);
  CHECK(RunsCsv(report).find("a,x,0,0.25\n") != std::string::npos);
  CHECK(SummaryCsv(report).find("\nb,x,") != std::string::npos);
  CHECK(RanksCsv(report).find("a,1") != std::string::npos);
}

TEST_CASE("Synthetic tasks") {
  SynthSpec spec;
  spec.num_configs = 20;
  spec.num_epochs = 15;
  spec.seed = 4;
  const LCTask a = GenSyntheticTask(spec);
  const LCTask b = GenSyntheticTask(spec);
  CHECK(SerializeTask(a, TaskFormat::kCsv) == SerializeTask(b, TaskFormat::kCsv));
  CHECK(a.num_configs() == 20);
  CHECK(a.num_epochs() == 15);
  CHECK(a.config_dim() == 3);
  for (int n = 0; n < a.num_configs(); ++n) {
    for (int t = 1; t < a.num_epochs(); ++t) {
      CHECK(a.curves(n, t) > a.curves(n, t - 1));
    }
    CHECK(a.curves(n, 14) <= spec.y_inf_lo + spec.y_inf_span);
    CHECK(a.curves(n, 0) >= 0.0);
  }
  CHECK(a.y0_bar == doctest::Approx(0.5 * a.curves.col(0).mean()));
  spec.seed = 5;
  CHECK(GenSyntheticTask(spec).curves != a.curves);

  spec.noise = 0.05;
  spec.a_spread = 0.5;
  spec.rate_spread = 0.5;
  const LCTask noisy = GenSyntheticTask(spec);
  CHECK(noisy.curves.minCoeff() >= 0.0);
  CHECK(noisy.curves.maxCoeff() <= 1.0);
  for (int n = 0; n < noisy.num_configs(); ++n) {
    for (int t = 1; t < noisy.num_epochs(); ++t) {
      CHECK(noisy.curves(n, t) >= noisy.curves(n, t - 1));
    }
  }

  SynthSpec bad;
  bad.num_epochs = 1;
  CHECK_THROWS_AS(GenSyntheticTask(bad), Error);
  bad = SynthSpec{};
  bad.a_spread = 1.5;
  CHECK_THROWS_AS(ValidateSynthSpec(bad), Error);
}

}  // namespace
}  // namespace cfbo
