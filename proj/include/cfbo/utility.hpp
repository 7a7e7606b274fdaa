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

// Cost/performance utilities and their estimation from pairwise preferences.
//
// A utility scores the state of an optimization run after spending budget b
// with best-so-far performance y:
//
//   U(b, y) = y - sum_i w_i * penalty_i(b / B)
//
// where a power term penalizes alpha * (b/B)^c and a staircase term adds
// alpha_j once b reaches edges[j] (so the staircase penalty only grows).
// Mixing weights are nonnegative and sum to one.
//
// Preferences between two states follow a Bradley-Terry model with
// temperature tau:  P(left preferred) = sigmoid((U_left - U_right) / tau).
// Fitting minimizes the mean binary cross-entropy of that model by
// full-batch gradient descent.

#ifndef CFBO_UTILITY_HPP_
#define CFBO_UTILITY_HPP_

#include <string>
#include <variant>
#include <vector>

#include "cfbo/common.hpp"

namespace cfbo {

struct PowerTerm {
  double c = 1.0;
  double alpha = 0.0;
};

struct StaircaseTerm {
  std::vector<double> edges;   // sorted budgets
  std::vector<double> alphas;  // one per edge
};

using UtilityTerm = std::variant<PowerTerm, StaircaseTerm>;

class UtilityFn {
 public:
  // Throws Error(kDomain) if B < 1, any alpha < 0, c <= 0, unsorted edges,
  // or the weights are not a probability vector matching the term count.
  UtilityFn(int budget, std::vector<UtilityTerm> terms,
            std::vector<double> weights, bool hard_cap = false);

  // Single power term with weight 1: y - alpha * (b/B)^c.
  static UtilityFn Power(int budget, double alpha, double c,
                         bool hard_cap = false);

  int budget() const { return budget_; }
  bool hard_cap() const { return hard_cap_; }
  const std::vector<UtilityTerm>& terms() const { return terms_; }
  const std::vector<double>& weights() const { return weights_; }

  // Unweighted penalty of a single term.
  double TermPenalty(size_t term, double b) const;
  // sum_i w_i * penalty_i(b / B).
  double Penalty(double b) const;

  // U(b, y). Returns kNegInf when the hard cap is enabled and b > B; that
  // value orders below every real utility.
  double operator()(double b, double y) const;

  bool AllPenaltiesZero() const;

 private:
  int budget_;
  std::vector<UtilityTerm> terms_;
  std::vector<double> weights_;
  bool hard_cap_;
};

struct UtilityPoint {
  double b = 1.0;
  double y = 0.0;
};

struct PreferencePair {
  UtilityPoint left;
  UtilityPoint right;
  int label = 0;  // 1 iff left is preferred
};

inline constexpr double kDefaultTemperature = 0.05;

// Bradley-Terry probability that `pair.left` is preferred, evaluated as a
// sigmoid of the scaled utility gap.
double BtProbability(const UtilityFn& u, const PreferencePair& pair,
                     double tau = kDefaultTemperature);

// Mean binary cross-entropy over `data`; probabilities are floored at 1e-12
// before the log. Throws Error(kEmpty) on empty data.
double BtLoss(const UtilityFn& u, const std::vector<PreferencePair>& data,
              double tau = kDefaultTemperature);

struct FitOptions {
  int iters = 1000;
  double step_size = 0.05;
  double tau = kDefaultTemperature;
  double init_alpha = 1e-4;
  bool fit_weights = true;  // ignored for single-term families
};

struct FitResult {
  UtilityFn utility;
  double final_loss = 0.0;
  std::vector<double> loss_history;  // loss before each step, then final
};

// Fits the alphas (and mixing weights) of `family`; the term forms, exponents
// and staircase edges are kept fixed. Parameters start at init_alpha and
// uniform weights. Alphas are clamped to [0,1] and weights projected onto the
// simplex after every step.
FitResult FitUtility(const std::vector<PreferencePair>& data,
                     const UtilityFn& family, const FitOptions& options = {});

// Euclidean projection onto {w : w >= 0, sum w = 1} (sort based).
std::vector<double> ProjectOntoSimplex(const std::vector<double>& v);

enum class PreferenceSampler { kUniformMeaningful, kAroundTrajectory };

// Budgets excluded at the start of a reference trajectory.
inline constexpr int kTrajectoryBurnIn = 50;

// kUniformMeaningful draws b/B and y uniformly and keeps only pairs where
// neither point dominates (one has both higher performance and higher
// budget). kAroundTrajectory pairs an above- and a below-trajectory
// performance at one budget b > 50, where trajectory[b - 1] is the reference
// best-so-far performance. Labels come from `true_u`.
std::vector<PreferencePair> SimulatePreferences(
    const UtilityFn& true_u, PreferenceSampler sampler, int n_pairs, Rng& rng,
    const std::vector<double>& trajectory = {});

// Random ground-truth utility over the given term shapes: alphas drawn from
// Uniform(0,1), weights from a symmetric Dirichlet with `concentration`.
UtilityFn SampleRandomUtility(int budget, std::vector<UtilityTerm> shapes,
                              double concentration, Rng& rng);

// JSON utility spec:
//   {"B": int, "terms": [{"form":"power","c":f,"alpha":f} |
//                        {"form":"staircase","edges":[...],"alphas":[...]}],
//    "weights": [...], "hard_cap": bool (optional)}
UtilityFn ParseUtilityJson(const std::string& contents);
std::string SerializeUtilityJson(const UtilityFn& u);
UtilityFn LoadUtility(const std::string& path);

// Preference CSV: "b,y,b2,y2,label" per line. An optional header line
// starting with "b," is skipped. Parse errors name the offending line.
std::vector<PreferencePair> ParsePreferencesCsv(const std::string& contents);
std::string SerializePreferencesCsv(const std::vector<PreferencePair>& data);

}  // namespace cfbo

#endif  // CFBO_UTILITY_HPP_
