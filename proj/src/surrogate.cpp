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

#include "cfbo/surrogate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include <boost/random/normal_distribution.hpp>

#include "json.hpp"

namespace cfbo {

History::History(int num_configs, int num_epochs)
    : num_epochs_(num_epochs), prefixes_(std::max(num_configs, 0)) {
  if (num_configs < 1 || num_epochs < 1) {
    throw Error(ErrorCode::kShape, "history needs N >= 1 and T >= 1");
  }
}

void History::Reveal(int n, double y) {
  if (n < 0 || n >= num_configs()) {
    throw Error(ErrorCode::kIndex, "configuration index " + std::to_string(n));
  }
  if (frontier(n) >= num_epochs_) {
    throw Error(ErrorCode::kExhausted,
                "configuration " + std::to_string(n) + " is fully trained");
  }
  prefixes_[n].push_back(y);
  observations_.push_back({n, frontier(n), y});
  incumbent_ = std::max(incumbent_, y);
}

bool History::exhausted() const {
  return std::all_of(prefixes_.begin(), prefixes_.end(), [&](const auto& p) {
    return static_cast<int>(p.size()) >= num_epochs_;
  });
}

namespace {

// Sufficient statistics of the linear problem obtained by fixing the rate:
//   minimize sum_i (y_i - y_inf + a * s_i)^2,  s_i = t_i^(-rate).
struct LinearStats {
  double n = 0, sy = 0, ss = 0, sss = 0, sys = 0, syy = 0;

  double Sse(double y_inf, double a) const {
    return syy + n * y_inf * y_inf + a * a * sss - 2.0 * y_inf * sy +
           2.0 * a * sys - 2.0 * y_inf * a * ss;
  }
  // Gradient with respect to (y_inf, a).
  std::array<double, 2> Grad(double y_inf, double a) const {
    return {2.0 * (n * y_inf - sy - a * ss), 2.0 * (a * sss + sys - y_inf * ss)};
  }
  // d^T H d for direction d.
  double Curvature(double dy, double da) const {
    return 2.0 * (n * dy * dy - 2.0 * ss * dy * da + sss * da * da);
  }
};

struct LinearSolution {
  double y_inf, a, sse;
};

// The feasible set {a >= 0, y_inf <= 1, y_inf - a >= floor} is the triangle
// with corners (floor, 0), (1, 0), (1, 1 - floor) in (y_inf, a) space.
LinearSolution SolveOnTriangle(const LinearStats& st, double floor) {
  auto feasible = [floor](double y_inf, double a) {
    constexpr double kSlack = 1e-12;
    return a >= -kSlack && y_inf <= 1.0 + kSlack && y_inf - a >= floor - kSlack;
  };
  const double det = st.n * st.sss - st.ss * st.ss;
  if (det > 1e-14 * std::max(1.0, st.n * st.sss)) {
    const double y_inf = (st.sy * st.sss - st.ss * st.sys) / det;
    const double a = (st.n * st.sys * -1.0 + st.ss * st.sy) / det;
    if (feasible(y_inf, a)) return {y_inf, a, st.Sse(y_inf, a)};
  }
  const std::array<std::array<double, 2>, 3> corners = {
      {{floor, 0.0}, {1.0, 0.0}, {1.0, 1.0 - floor}}};
  LinearSolution best{floor, 0.0, st.Sse(floor, 0.0)};
  for (int e = 0; e < 3; ++e) {
    const auto& p0 = corners[e];
    const auto& p1 = corners[(e + 1) % 3];
    const double dy = p1[0] - p0[0];
    const double da = p1[1] - p0[1];
    const double curv = st.Curvature(dy, da);
    const auto g = st.Grad(p0[0], p0[1]);
    const double slope = g[0] * dy + g[1] * da;
    double u = curv > 0.0 ? std::clamp(-slope / curv, 0.0, 1.0)
                          : (slope < 0.0 ? 1.0 : 0.0);
    const double y_inf = p0[0] + u * dy;
    const double a = p0[1] + u * da;
    const double sse = st.Sse(y_inf, a);
    if (sse < best.sse) best = {y_inf, a, sse};
  }
  return best;
}

Pow3Fit FitAtRate(std::span<const double> epochs, std::span<const double> values,
                  double floor, double rate) {
  LinearStats st;
  for (size_t i = 0; i < epochs.size(); ++i) {
    const double s = std::pow(epochs[i], -rate);
    const double y = values[i];
    st.n += 1.0;
    st.sy += y;
    st.ss += s;
    st.sss += s * s;
    st.sys += y * s;
    st.syy += y * y;
  }
  const LinearSolution sol = SolveOnTriangle(st, floor);
  // The expanded-sum SSE can go slightly negative through cancellation.
  return {{sol.y_inf, std::max(sol.a, 0.0), rate}, std::max(sol.sse, 0.0)};
}

}  // namespace

Pow3Fit FitPow3(std::span<const double> epochs, std::span<const double> values,
                double floor) {
  if (epochs.empty() || epochs.size() != values.size()) {
    throw Error(ErrorCode::kShape, "FitPow3 needs matching, non-empty inputs");
  }
  floor = std::clamp(floor, 0.0, 1.0);
  constexpr std::array<double, 6> kLadder = {kMinRate, 0.25, 0.5, 1.0, 2.0,
                                             kMaxRate};
  Pow3Fit best = FitAtRate(epochs, values, floor, kLadder[1]);
  size_t best_idx = 1;
  for (size_t i = 2; i <= 4; ++i) {
    Pow3Fit f = FitAtRate(epochs, values, floor, kLadder[i]);
    if (f.sse < best.sse) {
      best = f;
      best_idx = i;
    }
  }
  // Golden-section refinement of the rate (profile SSE) between the grid
  // neighbours of the best grid point.
  constexpr double kInvPhi = 0.6180339887498949;
  double lo = kLadder[best_idx - 1];
  double hi = kLadder[best_idx + 1];
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  Pow3Fit f1 = FitAtRate(epochs, values, floor, x1);
  Pow3Fit f2 = FitAtRate(epochs, values, floor, x2);
  for (int iter = 0; iter < 40; ++iter) {
    if (f1.sse <= f2.sse) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = FitAtRate(epochs, values, floor, x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = FitAtRate(epochs, values, floor, x2);
    }
  }
  for (const Pow3Fit* f : {&f1, &f2}) {
    if (f->sse < best.sse) best = *f;
  }
  return best;
}

namespace {

ConfigFit FitConfig(std::span<const double> prefix, double y0_bar,
                    const SurrogateOptions& options, int n) {
  const int k = static_cast<int>(prefix.size());
  std::vector<double> epochs(k);
  std::iota(epochs.begin(), epochs.end(), 1.0);
  const double floor =
      std::min(y0_bar, *std::min_element(prefix.begin(), prefix.end()));

  ConfigFit fit;
  fit.num_points = k;
  const Pow3Fit point = FitPow3(epochs, prefix, floor);
  fit.point = point.params;
  fit.residual_scale =
      std::max(options.residual_floor, std::sqrt(point.sse / k));

  Rng rng(MixSeed(options.seed, static_cast<std::uint64_t>(n),
                  static_cast<std::uint64_t>(k)));
  std::uniform_int_distribution<int> pick(0, k - 1);
  std::vector<double> boot_t(k), boot_y(k);
  fit.members.reserve(options.ensemble_size);
  for (int m = 0; m < options.ensemble_size; ++m) {
    for (int i = 0; i < k; ++i) {
      const int j = pick(rng);
      boot_t[i] = epochs[j];
      boot_y[i] = prefix[j];
    }
    fit.members.push_back(FitPow3(boot_t, boot_y, floor).params);
  }
  return fit;
}

Pow3Params ClampParams(Pow3Params p) {
  p.y_inf = std::clamp(p.y_inf, 0.0, 1.0);
  p.a = std::max(p.a, 0.0);
  p.rate = std::clamp(p.rate, kMinRate, kMaxRate);
  return p;
}

}  // namespace

SurrogateState FitSurrogate(const History& history, const LCTask& task,
                            const SurrogateOptions& options,
                            const SurrogateState* previous) {
  const int num_configs = task.num_configs();
  if (history.num_configs() != num_configs ||
      history.num_epochs() != task.num_epochs()) {
    throw Error(ErrorCode::kMismatch, "history does not match task shape");
  }
  if (options.ensemble_size < 1 || options.neighbors < 1 ||
      options.min_fit_points < 1) {
    throw Error(ErrorCode::kDomain, "invalid surrogate options");
  }
  const bool reuse = previous != nullptr &&
                     previous->options.seed == options.seed &&
                     previous->options.ensemble_size == options.ensemble_size &&
                     previous->options.min_fit_points == options.min_fit_points &&
                     previous->options.residual_floor == options.residual_floor &&
                     previous->y0_bar == task.y0_bar &&
                     static_cast<int>(previous->per_config.size()) == num_configs;

  SurrogateState state;
  state.options = options;
  state.y0_bar = task.y0_bar;
  state.configs = task.configs;
  state.per_config.resize(num_configs);
  for (int n = 0; n < num_configs; ++n) {
    const int t_n = history.frontier(n);
    if (t_n < options.min_fit_points) continue;
    if (reuse && previous->per_config[n] &&
        previous->per_config[n]->num_points == t_n) {
      state.per_config[n] = previous->per_config[n];
    } else {
      state.per_config[n] = FitConfig(history.prefix(n), task.y0_bar, options, n);
    }
    state.fitted.push_back(n);
  }

  if (!state.fitted.empty()) {
    const double count = static_cast<double>(state.fitted.size());
    Eigen::Vector4d mean = Eigen::Vector4d::Zero();
    Eigen::Vector4d sq = Eigen::Vector4d::Zero();
    for (int n : state.fitted) {
      const ConfigFit& f = *state.per_config[n];
      const Eigen::Vector4d v(f.point.y_inf, f.point.a, f.point.rate,
                              f.residual_scale);
      mean += v;
      sq += v.cwiseProduct(v);
    }
    mean /= count;
    const Eigen::Vector4d var =
        (sq / count - mean.cwiseProduct(mean)).cwiseMax(0.0);
    state.pool_mean = {mean(0), mean(1), mean(2)};
    state.pool_spread = {std::sqrt(var(0)), std::sqrt(var(1)),
                         std::sqrt(var(2))};
    state.pool_residual = mean(3);
  }
  return state;
}

CurveSamples SampleFutures(const SurrogateState& state, int n,
                           const History& history, int num_samples, Rng& rng) {
  if (n < 0 || n >= static_cast<int>(state.per_config.size())) {
    throw Error(ErrorCode::kIndex, "configuration index " + std::to_string(n));
  }
  if (num_samples < 1) throw Error(ErrorCode::kDomain, "need at least one sample");
  const int t_n = history.frontier(n);
  const int num_epochs = history.num_epochs();
  if (t_n >= num_epochs) {
    throw Error(ErrorCode::kExhausted,
                "configuration " + std::to_string(n) + " has nothing to extrapolate");
  }
  const int horizon = num_epochs - t_n;
  const SurrogateOptions& opt = state.options;

  CurveSamples out;
  out.first_epoch = t_n + 1;
  out.paths.resize(num_samples, horizon);

  // Ziggurat sampler: the per-epoch noise draws dominate the step cost.
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::ArrayXd log_t =
      Eigen::ArrayXd::LinSpaced(horizon, t_n + 1.0, num_epochs).log();
  Eigen::ArrayXd curve(horizon);
  auto fill = [&](int s, const Pow3Params& p, double sigma) {
    curve = p.y_inf - p.a * (-p.rate * log_t).exp();
    double running = 0.0;
    for (int h = 0; h < horizon; ++h) {
      double v = curve(h);
      if (sigma > 0.0) v += sigma * normal(rng);
      v = std::clamp(v, 0.0, 1.0);
      running = h == 0 ? v : std::max(running, v);
      out.paths(s, h) = running;
    }
  };

  const std::optional<ConfigFit>& own = state.per_config[n];
  if (own) {
    // Ensemble member curves on the horizon, then per-sample noise.
    const int k = static_cast<int>(own->members.size());
    RowMatrixXd base(k, horizon);
    for (int m = 0; m < k; ++m) {
      for (int h = 0; h < horizon; ++h) {
        base(m, h) = own->members[m](static_cast<double>(t_n + 1 + h));
      }
    }
    std::uniform_int_distribution<int> pick(0, k - 1);
    const double sigma = own->residual_scale;
    for (int s = 0; s < num_samples; ++s) {
      const int m = pick(rng);
      double running = 0.0;
      for (int h = 0; h < horizon; ++h) {
        double v = base(m, h);
        if (sigma > 0.0) v += sigma * normal(rng);
        v = std::clamp(v, 0.0, 1.0);
        running = h == 0 ? v : std::max(running, v);
        out.paths(s, h) = running;
      }
    }
    return out;
  }

  const double flat_sigma = opt.residual_floor;
  auto flat_prior = [&]() {
    return Pow3Params{state.y0_bar + opt.flat_spread * normal(rng), 0.0, 1.0};
  };

  if (t_n > 0) {
    // Too few points for a fit: draw a shape from the pool (or the flat
    // prior) and shift it through the last observation.
    const double last = history.prefix(n).back();
    std::uniform_int_distribution<int> pick(
        0, std::max(0, static_cast<int>(state.fitted.size()) - 1));
    const double sigma =
        state.pool_empty() ? flat_sigma
                           : std::max(opt.residual_floor, state.pool_residual);
    for (int s = 0; s < num_samples; ++s) {
      Pow3Params p = state.pool_empty()
                         ? flat_prior()
                         : state.per_config[state.fitted[pick(rng)]]->point;
      p.y_inf += last - p(static_cast<double>(t_n));
      fill(s, ClampParams(p), sigma);
    }
    return out;
  }

  if (state.pool_empty()) {
    for (int s = 0; s < num_samples; ++s) fill(s, ClampParams(flat_prior()), flat_sigma);
    return out;
  }

  // Unobserved: average the k nearest fitted neighbours' parameters.
  const int k = std::min<int>(opt.neighbors, static_cast<int>(state.fitted.size()));
  std::vector<std::pair<double, int>> dist;
  dist.reserve(state.fitted.size());
  for (int m : state.fitted) {
    dist.emplace_back((state.configs.row(m) - state.configs.row(n)).squaredNorm(), m);
  }
  std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
  Pow3Params center{0.0, 0.0, 0.0};
  double sigma = 0.0;
  for (int i = 0; i < k; ++i) {
    const ConfigFit& f = *state.per_config[dist[i].second];
    center.y_inf += f.point.y_inf / k;
    center.a += f.point.a / k;
    center.rate += f.point.rate / k;
    sigma += f.residual_scale / k;
  }
  sigma = std::max(sigma, opt.residual_floor);
  for (int s = 0; s < num_samples; ++s) {
    Pow3Params p = center;
    p.y_inf += state.pool_spread.y_inf * normal(rng);
    p.a += state.pool_spread.a * normal(rng);
    p.rate += state.pool_spread.rate * normal(rng);
    fill(s, ClampParams(p), sigma);
  }
  return out;
}

void PowerLawEnsemble::Condition(const History& history, const LCTask& task) {
  state_ = FitSurrogate(history, task, options_,
                        state_ ? &*state_ : nullptr);
}

CurveSamples PowerLawEnsemble::Sample(int n, const History& history,
                                      int num_samples, Rng& rng) const {
  if (!state_) throw Error(ErrorCode::kDomain, "extrapolator not conditioned");
  return SampleFutures(*state_, n, history, num_samples, rng);
}

std::string DumpSurrogateJson(const SurrogateState& state) {
  using json = nlohmann::json;
  auto params = [](const Pow3Params& p) {
    return json{{"y_inf", p.y_inf}, {"a", p.a}, {"rate", p.rate}};
  };
  json doc;
  doc["y0_bar"] = state.y0_bar;
  doc["pool"] = {{"mean", params(state.pool_mean)},
                 {"spread", params(state.pool_spread)},
                 {"residual", state.pool_residual}};
  json configs = json::array();
  for (int n : state.fitted) {
    const ConfigFit& f = *state.per_config[n];
    json members = json::array();
    for (const Pow3Params& m : f.members) members.push_back(params(m));
    configs.push_back({{"n", n},
                       {"t", f.num_points},
                       {"point", params(f.point)},
                       {"residual_scale", f.residual_scale},
                       {"members", members}});
  }
  doc["configs"] = configs;
  return doc.dump(2);
}

}  // namespace cfbo
