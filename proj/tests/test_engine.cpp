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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cfbo/engine.hpp"
#include "cfbo/evaluation.hpp"
#include "doctest.h"

namespace cfbo {
namespace {

LCTask SmallTask(int n, int t, std::uint64_t seed) {
  SynthSpec spec;
  spec.name = "small";
  spec.num_configs = n;
  spec.num_epochs = t;
  spec.a_spread = 0.5;
  spec.rate_spread = 0.5;
  spec.noise = 0.01;
  spec.seed = seed;
  return GenSyntheticTask(spec);
}

RunOptions FastOptions(std::uint64_t seed) {
  RunOptions opts;
  opts.sampling.raw_samples = 50;
  opts.sampling.group_size = 5;
  opts.seed = seed;
  return opts;
}

// Replays a trace against the task: contiguous prefixes, true values,
// running incumbent, utility bookkeeping and total budget.
void CheckConservation(const BOTrace& trace, const LCTask& task,
                       const UtilityFn& u) {
  std::vector<int> t(task.num_configs(), 0);
  double best = kNegInf;
  for (size_t i = 0; i < trace.steps.size(); ++i) {
    const StepRecord& s = trace.steps[i];
    CHECK(s.b == static_cast<int>(i) + 1);
    REQUIRE(s.n >= 0);
    REQUIRE(s.n < task.num_configs());
    REQUIRE(t[s.n] < task.num_epochs());
    CHECK(s.y == task.curves(s.n, t[s.n]));
    ++t[s.n];
    best = std::max(best, s.y);
    CHECK(s.incumbent == best);
    CHECK(s.u_p == u(s.b, best));
  }
  int total = 0;
  for (int v : t) total += v;
  CHECK(total == trace.stop_step);
  if (!trace.steps.empty()) {
    const StepRecord& last = trace.steps.back();
    CHECK(trace.incumbent.y == last.incumbent);
    CHECK(task.curves(trace.incumbent.n, trace.incumbent.t - 1) ==
          trace.incumbent.y);
    CHECK(trace.incumbent.t <= t[trace.incumbent.n]);
  }
}

TEST_CASE("Zero penalty never stops early") {
  const LCTask task = SmallTask(6, 20, 1);
  const UtilityFn u = UtilityFn::Power(40, 0.0, 1.0);
  const BOTrace trace = Run(task, u, StopConfig{}, FastOptions(3));
  CHECK(trace.stop_step == 40);
  CHECK_FALSE(trace.stop.has_value());
  CHECK_FALSE(trace.exhausted);
  CheckConservation(trace, task, u);
}

TEST_CASE("A single short curve exhausts the pool") {
  const LCTask task = SmallTask(1, 5, 2);
  const UtilityFn u = UtilityFn::Power(300, 0.0, 1.0);
  const BOTrace trace = Run(task, u, StopConfig{}, FastOptions(0));
  CHECK(trace.exhausted);
  CHECK(trace.stop_step == 5);
  CHECK(trace.incumbent.t == 5);
  CheckConservation(trace, task, u);
}

TEST_CASE("Random baseline trains whole curves") {
  const LCTask task = SmallTask(4, 6, 3);
  const UtilityFn u = UtilityFn::Power(30, 0.1, 1.0);
  const BOTrace trace = RunBaselineRandom(task, u, FastOptions(5));
  CHECK(trace.exhausted);
  CHECK(trace.stop_step == 24);
  CheckConservation(trace, task, u);
  for (size_t i = 0; i < trace.steps.size(); ++i) {
    CHECK(trace.steps[i].n == trace.steps[i - i % 6].n);
  }
  const BOTrace short_run =
      RunBaselineRandom(task, UtilityFn::Power(10, 0.1, 1.0), FastOptions(5));
  CHECK(short_run.stop_step == 10);
  CHECK_FALSE(short_run.exhausted);
}

TEST_CASE("Runs are deterministic and traces round-trip") {
  const LCTask task = SmallTask(8, 15, 4);
  const UtilityFn u = UtilityFn::Power(60, 0.25, 1.0);
  for (Method m : {Method::kCfbo, Method::kCfboFixedThreshold, Method::kRandom}) {
    const BOTrace a = RunMethod(m, task, u, StopConfig{}, FastOptions(7));
    const BOTrace b = RunMethod(m, task, u, StopConfig{}, FastOptions(7));
    const std::string text = SerializeTrace(a);
    CHECK(text == SerializeTrace(b));
    CHECK(SerializeTrace(ParseTrace(text)) == text);
    CheckConservation(a, task, u);
  }
  CHECK(SerializeTrace(Run(task, u, StopConfig{}, FastOptions(7))) !=
        SerializeTrace(Run(task, u, StopConfig{}, FastOptions(8))));
}

TEST_CASE("Stops only when the previous estimate exceeds the threshold") {
  const LCTask task = SmallTask(10, 20, 5);
  const UtilityFn u = UtilityFn::Power(120, 0.5, 1.0);
  for (std::uint64_t seed : {0, 1, 2}) {
    const BOTrace trace = Run(task, u, StopConfig{}, FastOptions(seed));
    CheckConservation(trace, task, u);
    for (size_t i = 1; i < trace.steps.size(); ++i) {
      REQUIRE(trace.steps[i].threshold.has_value());
      CHECK(trace.steps[i - 1].r_hat <= *trace.steps[i].threshold);
    }
    if (trace.stop) {
      CHECK(trace.stop->b == trace.stop_step + 1);
      CHECK(trace.stop_step >= 1);
      CHECK(trace.stop->r_hat == trace.steps.back().r_hat);
      CHECK(trace.stop->r_hat > trace.stop->threshold);
      CHECK(trace.stop->threshold ==
            doctest::Approx(AdaptiveThreshold(trace.stop->p_b, StopConfig{})));
    }
  }
}

TEST_CASE("Fixed threshold records the fixed value") {
  const LCTask task = SmallTask(6, 10, 6);
  const UtilityFn u = UtilityFn::Power(40, 0.25, 1.0);
  const BOTrace trace =
      RunMethod(Method::kCfboFixedThreshold, task, u, StopConfig{}, FastOptions(1));
  REQUIRE(trace.stop_config.has_value());
  CHECK(trace.stop_config->mode == StopMode::kFixed);
  for (const StepRecord& s : trace.steps) {
    if (s.threshold) CHECK(*s.threshold == 0.2);
  }
}

TEST_CASE("Method names and trace errors") {
  CHECK(ParseMethod(MethodName(Method::kRandom)) == Method::kRandom);
  CHECK(ParseMethod("cfbo") == Method::kCfbo);
  CHECK_THROWS_AS(ParseMethod("bohb"), Error);
  CHECK_THROWS_AS(ParseTrace("{\"type\":\"step\"}\n"), Error);
  CHECK_THROWS_AS(ParseTrace("not json\n"), Error);
  const std::string path =
      (std::filesystem::temp_directory_path() / "cfbo_test_bad.jsonl").string();
  std::ofstream(path) << "garbage\n";
  try {
    LoadTrace(path);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find(path) != std::string::npos);
  }
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace cfbo
