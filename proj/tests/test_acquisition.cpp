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
#include <random>
#include <vector>

#include "cfbo/acquisition.hpp"
#include "doctest.h"
#include "oracles.hpp"

namespace cfbo {
namespace {

// A history with b reveals on configuration 0, the last being `incumbent`.
History MakeHistory(int b, double incumbent, double u_prev) {
  History h(3, 20);
  for (int i = 0; i < b; ++i) h.Reveal(0, i + 1 == b ? incumbent : 0.0);
  h.set_prev_utility(u_prev);
  return h;
}

CurveSamples FromRows(const std::vector<std::vector<double>>& rows) {
  CurveSamples s;
  s.paths.resize(rows.size(), rows.front().size());
  for (size_t r = 0; r < rows.size(); ++r) {
    for (size_t k = 0; k < rows[r].size(); ++k) s.paths(r, k) = rows[r][k];
  }
  return s;
}

// Returns samples whose rows are `paths[i]` chosen by the bits of `mask`.
std::vector<std::vector<double>> Pick(int mask, int count,
                                      const std::vector<double>& low,
                                      const std::vector<double>& high) {
  std::vector<std::vector<double>> out;
  for (int i = 0; i < count; ++i) out.push_back((mask >> i) & 1 ? high : low);
  return out;
}

// A fixed extrapolator returning preset sample rows for each configuration.
class FixedModel : public CurveExtrapolator {
 public:
  explicit FixedModel(std::vector<std::vector<std::vector<double>>> rows)
      : rows_(std::move(rows)) {}
  void Condition(const History&, const LCTask&) override {}
  CurveSamples Sample(int n, const History&, int num_samples,
                      Rng&) const override {
    CurveSamples s = FromRows(rows_[n]);
    CHECK(s.num_samples() == num_samples);
    return s;
  }

 private:
  std::vector<std::vector<std::vector<double>>> rows_;
};

TEST_CASE("No improvement gives zero EI") {
  const UtilityFn u = UtilityFn::Power(10, 0.5, 1.0);
  const History h = MakeHistory(2, 0.8, u(2, 0.8));
  const CurveSamples s = FromRows({{0.1, 0.5, 0.8}, {0.7, 0.7, 0.75}});
  const AcquisitionResult r = ExpectedImprovement(u, s, h);
  CHECK(r.value == 0.0);
  CHECK(r.best_dt == 1);
  CHECK(r.per_dt == VectorXd::Zero(3));
  CHECK(ProbImprovement(u, s, h) == 0.0);
}

TEST_CASE("Zero penalty picks the first epoch reaching the best value") {
  const UtilityFn u = UtilityFn::Power(10, 0.0, 1.0);
  const History h = MakeHistory(1, 0.5, 0.5);
  const CurveSamples s = FromRows({{0.3, 0.45, 0.6, 0.6, 0.6}});
  const AcquisitionResult r = ExpectedImprovement(u, s, h);
  CHECK(r.best_dt == 3);
  for (int k = 0; k < 5; ++k) {
    CHECK(r.per_dt(k) == doctest::Approx(k < 2 ? 0.0 : 0.1).epsilon(1e-12));
  }
}

TEST_CASE("Two-outcome set matches enumeration") {
  const UtilityFn u = UtilityFn::Power(4, 0.25, 1.0);
  const History h = MakeHistory(1, 0.4, u(1, 0.4));
  const std::vector<std::vector<double>> rows = {{0.6, 0.7}, {0.3, 0.5}};
  const CurveSamples s = FromRows(rows);
  const oracle::BruteForceAcquisition want =
      oracle::EnumerateAcquisition(rows, 0.4, 1, u(1, 0.4), 0.25, 1.0, 4);
  const AcquisitionResult got = ExpectedImprovement(u, s, h);
  for (int k = 0; k < 2; ++k) CHECK(std::abs(got.per_dt(k) - want.ei[k]) <= 1e-12);
  CHECK(got.best_dt == want.best_dt);
  CHECK(std::abs(ProbImprovement(u, s, h) - want.pi) <= 1e-12);
}

TEST_CASE("Probability of improvement examples") {
  const UtilityFn u = UtilityFn::Power(10, 0.1, 1.0);
  const History h = MakeHistory(1, 0.5, u(1, 0.5));
  CHECK(ProbImprovement(u, FromRows({{0.9, 0.9}, {0.2, 0.95}}), h) == 1.0);
  CHECK(ProbImprovement(u, FromRows({{0.9, 0.9}, {0.2, 0.3}}), h) == 0.5);
  const UtilityFn steep = UtilityFn::Power(10, 50.0, 1.0);
  const History h2 = MakeHistory(1, 0.5, steep(1, 0.5));
  CHECK(ProbImprovement(steep, FromRows({{1.0, 1.0}}), h2) == 0.0);
  CHECK_THROWS_AS(ProbImprovement(u, CurveSamples{}, h), Error);
}

TEST_CASE("EI and PI match brute force on binary sample sets") {
  const UtilityFn u = UtilityFn::Power(12, 0.25, 1.0);
  const std::vector<double> low = {0.35, 0.42, 0.44};
  const std::vector<double> high = {0.4, 0.55, 0.7};
  for (int b : {1, 4}) {
    for (double inc : {0.3, 0.45}) {
      for (double u_prev : {u(b, inc), u(b, inc) - 0.05}) {
        const History h = MakeHistory(b, inc, u_prev);
        for (int count : {1, 4, 8}) {
          for (int mask = 0; mask < (1 << count); ++mask) {
            const auto rows = Pick(mask, count, low, high);
            const CurveSamples s = FromRows(rows);
            const auto want =
                oracle::EnumerateAcquisition(rows, inc, b, u_prev, 0.25, 1.0, 12);
            const AcquisitionResult got = ExpectedImprovement(u, s, h);
            for (int k = 0; k < 3; ++k) {
              CHECK(std::abs(got.per_dt(k) - want.ei[k]) <= 1e-12);
            }
            CHECK(std::abs(got.value - want.ei_max) <= 1e-12);
            CHECK(got.best_dt == want.best_dt);
            CHECK(std::abs(ProbImprovement(u, s, h) - want.pi) <= 1e-12);
          }
        }
      }
    }
  }
}

TEST_CASE("Positive EI implies positive PI and zero penalty is monotone") {
  Rng rng(11);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const UtilityFn flat = UtilityFn::Power(30, 0.0, 1.0);
  const UtilityFn costly = UtilityFn::Power(30, 0.3, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::vector<double>> rows(6, std::vector<double>(4));
    for (auto& r : rows) {
      for (double& v : r) v = unif(rng);
    }
    const double inc = unif(rng);
    const CurveSamples s = FromRows(rows);
    const History hc = MakeHistory(3, inc, costly(3, inc));
    const AcquisitionResult rc = ExpectedImprovement(costly, s, hc);
    CHECK(rc.value >= 0.0);
    if (rc.value > 0.0) CHECK(ProbImprovement(costly, s, hc) > 0.0);
    const History hf = MakeHistory(3, inc, inc);
    const AcquisitionResult rf = ExpectedImprovement(flat, s, hf);
    for (int k = 1; k < 4; ++k) CHECK(rf.per_dt(k) >= rf.per_dt(k - 1));
  }
}

TEST_CASE("Shifting every utility leaves the acquisition unchanged") {
  // Staircase with a zero-budget step shifts U by a constant everywhere.
  const UtilityFn shifted(10,
                          {PowerTerm{1.0, 0.2}, StaircaseTerm{{0.0}, {0.3}}},
                          {0.5, 0.5});
  // shifted = y - 0.1 (b/B) - 0.15, so compare against base with alpha 0.1.
  const UtilityFn half = UtilityFn::Power(10, 0.1, 1.0);
  const CurveSamples s = FromRows({{0.5, 0.6, 0.9}, {0.45, 0.5, 0.52}});
  const History h1 = MakeHistory(2, 0.48, half(2, 0.48));
  const History h2 = MakeHistory(2, 0.48, shifted(2, 0.48));
  CHECK(std::abs(shifted(2, 0.48) - (half(2, 0.48) - 0.15)) <= 1e-12);
  const AcquisitionResult a = ExpectedImprovement(half, s, h1);
  const AcquisitionResult b = ExpectedImprovement(shifted, s, h2);
  CHECK(a.best_dt == b.best_dt);
  CHECK(std::abs(a.value - b.value) <= 1e-12);
  CHECK(ProbImprovement(half, s, h1) == ProbImprovement(shifted, s, h2));
}

TEST_CASE("Hard cap forbids futures beyond the budget") {
  const UtilityFn u = UtilityFn::Power(5, 0.0, 1.0, /*hard_cap=*/true);
  const History h = MakeHistory(4, 0.2, 0.2);
  const AcquisitionResult r = ExpectedImprovement(u, FromRows({{0.3, 0.9}}), h);
  CHECK(r.per_dt(0) == doctest::Approx(0.1));
  CHECK(r.per_dt(1) == 0.0);
  CHECK(r.best_dt == 1);
}

TEST_CASE("SelectConfig") {
  const UtilityFn u = UtilityFn::Power(10, 0.1, 1.0);
  SamplingOptions sampling;
  sampling.raw_samples = 2;
  sampling.group_size = 1;
  Rng rng(1);
  {
    History h(1, 4);
    FixedModel model({{{0.0, 0.0, 0.0, 0.0}, {0.0, 0.0, 0.0, 0.0}}});
    const Selection sel = SelectConfig(u, model, h, sampling, rng);
    CHECK(sel.n == 0);
    CHECK(sel.acquisition.value == 0.0);
  }
  {
    History h(3, 3);
    const std::vector<std::vector<double>> weak = {{0.3, 0.4, 0.5}, {0.2, 0.6, 0.6}};
    const std::vector<std::vector<double>> strong = {{0.4, 0.5, 0.6}, {0.3, 0.7, 0.8}};
    FixedModel model({weak, strong, weak});
    const Selection sel = SelectConfig(u, model, h, sampling, rng);
    CHECK(sel.n == 1);
    // Equal candidates tie to the lowest index.
    FixedModel tied({strong, strong, weak});
    CHECK(SelectConfig(u, tied, h, sampling, rng).n == 0);
  }
  {
    History h(2, 1);
    h.Reveal(0, 0.5);
    FixedModel model({{}, {{0.1}, {0.1}}});
    CHECK(SelectConfig(u, model, h, sampling, rng).n == 1);
    h.Reveal(1, 0.1);
    try {
      SelectConfig(u, model, h, sampling, rng);
      FAIL("expected exhaustion");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kExhausted);
    }
  }
  sampling.group_size = 3;
  History h(1, 2);
  FixedModel model({{{0.1, 0.2}}});
  CHECK_THROWS_AS(SelectConfig(u, model, h, sampling, rng), Error);
}

}  // namespace
}  // namespace cfbo
