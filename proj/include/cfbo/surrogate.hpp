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

// Probabilistic learning-curve extrapolation.
//
// The optimizer only consumes Monte-Carlo samples of each configuration's
// remaining curve, so extrapolators sit behind CurveExtrapolator. The
// default, PowerLawEnsemble, fits
//
//   y(t) = y_inf - a * t^(-rate),   y_inf in [0,1], a >= 0, rate in (0,5],
//
// to every configuration with at least three observed epochs, bootstraps
// an ensemble of eight such fits, and pools the fitted parameters so that
// barely observed configurations borrow from the pool and unobserved ones
// borrow from their nearest observed neighbours in configuration space.
// With no fitted curve at all, samples are flat curves around the 0-epoch
// value.

#ifndef CFBO_SURROGATE_HPP_
#define CFBO_SURROGATE_HPP_

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cfbo/common.hpp"
#include "cfbo/lc_data.hpp"

namespace cfbo {

struct Observation {
  int n = 0;  // configuration index
  int t = 0;  // epoch, 1-based
  double y = 0.0;
};

// Freeze-thaw observation state. Each configuration's observations are the
// contiguous prefix y_{n,1..t_n}; Reveal appends exactly one epoch.
class History {
 public:
  History(int num_configs, int num_epochs);

  // Appends y_{n, t_n + 1}. Throws Error(kIndex) for a bad n and
  // Error(kExhausted) when t_n == T.
  void Reveal(int n, double y);

  int num_configs() const { return static_cast<int>(prefixes_.size()); }
  int num_epochs() const { return num_epochs_; }
  int frontier(int n) const { return static_cast<int>(prefixes_[n].size()); }
  std::span<const double> prefix(int n) const { return prefixes_[n]; }
  const std::vector<Observation>& observations() const { return observations_; }

  // b = sum_n t_n.
  int budget_spent() const { return static_cast<int>(observations_.size()); }
  // Best observed value; kNegInf before the first reveal.
  double incumbent() const { return incumbent_; }
  // Utility after the most recent step (0 before the first step).
  double prev_utility() const { return prev_utility_; }
  void set_prev_utility(double u) { prev_utility_ = u; }

  bool exhausted() const;
  bool empty() const { return observations_.empty(); }

 private:
  int num_epochs_;
  std::vector<std::vector<double>> prefixes_;
  std::vector<Observation> observations_;
  double incumbent_ = kNegInf;
  double prev_utility_ = 0.0;
};

struct Pow3Params {
  double y_inf = 0.0;
  double a = 0.0;
  double rate = 1.0;

  double operator()(double t) const { return y_inf - a * std::pow(t, -rate); }
};

inline constexpr double kMinRate = 0.01;
inline constexpr double kMaxRate = 5.0;

struct Pow3Fit {
  Pow3Params params;
  double sse = 0.0;
};

// Least-squares fit of the power law to (epochs[i], values[i]) subject to
// y_inf in [0,1], a >= 0, rate in [kMinRate, kMaxRate] and y(1) >= floor.
// The rate is initialized on the grid {0.25, 0.5, 1, 2} and refined by
// golden-section search; for a fixed rate (y_inf, a) is solved exactly.
Pow3Fit FitPow3(std::span<const double> epochs, std::span<const double> values,
                double floor);

struct SurrogateOptions {
  int ensemble_size = 8;
  int neighbors = 5;
  int min_fit_points = 3;
  double flat_spread = 0.25;
  double residual_floor = 0.01;
  std::uint64_t seed = 0;
};

struct ConfigFit {
  int num_points = 0;                // t_n at fit time
  Pow3Params point;                  // fit on the whole prefix
  std::vector<Pow3Params> members;   // bootstrap ensemble
  double residual_scale = 0.0;       // RMS residual, floored
};

struct SurrogateState {
  SurrogateOptions options;
  double y0_bar = 0.0;
  RowMatrixXd configs;
  std::vector<std::optional<ConfigFit>> per_config;
  std::vector<int> fitted;  // indices with a fit, ascending
  // Empirical pool of point fits.
  Pow3Params pool_mean;
  Pow3Params pool_spread;  // per-parameter standard deviation
  double pool_residual = 0.0;

  bool pool_empty() const { return fitted.empty(); }
};

// Fits every configuration with at least min_fit_points observations. Fits
// are a pure function of (prefix, y0_bar, seed, n), so entries of `previous`
// with the same prefix length are reused verbatim.
SurrogateState FitSurrogate(const History& history, const LCTask& task,
                            const SurrogateOptions& options = {},
                            const SurrogateState* previous = nullptr);

// Samples of y_{n, t_n+1..T}: one row per sample.
struct CurveSamples {
  int first_epoch = 1;  // epoch of column 0
  RowMatrixXd paths;    // S x H, values in [0,1], rows nondecreasing

  int num_samples() const { return static_cast<int>(paths.rows()); }
  int horizon() const { return static_cast<int>(paths.cols()); }
};

// Draws `num_samples` future curves for configuration n. Each sample picks
// one parameter set (ensemble member, pooled draw or perturbed neighbour
// average), adds iid Gaussian noise at the residual scale per epoch, then
// takes the running max and clamps to [0,1]. Throws Error(kExhausted) if
// t_n == T and Error(kDomain) if num_samples < 1.
CurveSamples SampleFutures(const SurrogateState& state, int n,
                           const History& history, int num_samples, Rng& rng);

// Averages consecutive groups of `group_size` rows; a trailing partial group
// is dropped.
template <typename Derived>
RowMatrixX<typename Derived::Scalar> GroupMeans(
    const Eigen::MatrixBase<Derived>& samples, int group_size) {
  using Scalar = typename Derived::Scalar;
  if (group_size < 1) throw Error(ErrorCode::kDomain, "group size must be >= 1");
  const Eigen::Index groups = samples.rows() / group_size;
  if (groups < 1) {
    throw Error(ErrorCode::kDomain, "fewer samples than one group");
  }
  RowMatrixX<Scalar> out(groups, samples.cols());
  for (Eigen::Index k = 0; k < groups; ++k) {
    out.row(k) = samples.middleRows(k * group_size, group_size).colwise().mean();
  }
  return out;
}

inline CurveSamples VarianceReduce(const CurveSamples& samples,
                                   int group_size) {
  return {samples.first_epoch, GroupMeans(samples.paths, group_size)};
}

// Pluggable source of curve samples.
class CurveExtrapolator {
 public:
  virtual ~CurveExtrapolator() = default;
  // Conditions on the current history; called once per optimization step.
  virtual void Condition(const History& history, const LCTask& task) = 0;
  virtual CurveSamples Sample(int n, const History& history, int num_samples,
                              Rng& rng) const = 0;
};

class PowerLawEnsemble : public CurveExtrapolator {
 public:
  explicit PowerLawEnsemble(SurrogateOptions options = {})
      : options_(options) {}

  void Condition(const History& history, const LCTask& task) override;
  CurveSamples Sample(int n, const History& history, int num_samples,
                      Rng& rng) const override;

  const SurrogateState& state() const { return *state_; }

 private:
  SurrogateOptions options_;
  std::optional<SurrogateState> state_;
};

// Fitted parameters as JSON, for inspection.
std::string DumpSurrogateJson(const SurrogateState& state);

}  // namespace cfbo

#endif  // CFBO_SURROGATE_HPP_
