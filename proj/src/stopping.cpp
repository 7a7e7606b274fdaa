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

#include "cfbo/stopping.hpp"

#include <algorithm>

namespace cfbo {

StopConfig StopConfig::Fixed(double delta) {
  StopConfig cfg;
  cfg.mode = StopMode::kFixed;
  cfg.delta = delta;
  cfg.Validate();
  return cfg;
}

StopConfig StopConfig::Adaptive(double beta, double gamma) {
  StopConfig cfg;
  cfg.mode = StopMode::kAdaptive;
  cfg.beta = beta;
  cfg.gamma = gamma;
  cfg.Validate();
  return cfg;
}

void StopConfig::Validate() const {
  if (mode == StopMode::kFixed && !(delta >= 0.0 && delta <= 1.0)) {
    throw Error(ErrorCode::kDomain, "fixed threshold delta must lie in [0,1]");
  }
  if (mode == StopMode::kAdaptive &&
      (!(beta > 0.0) || !(gamma > 0.0) || !std::isfinite(beta) ||
       !std::isfinite(gamma))) {
    throw Error(ErrorCode::kDomain, "adaptive threshold needs beta, gamma > 0");
  }
}

std::string StopConfig::Describe() const {
  if (mode == StopMode::kFixed) return "fixed(delta=" + FormatDouble(delta) + ")";
  return "adaptive(beta=" + FormatDouble(beta) +
         ",gamma=" + FormatDouble(gamma) + ")";
}

double AdaptiveThreshold(double p_b, double beta, double gamma) {
  if (!(p_b >= 0.0 && p_b <= 1.0)) {
    throw Error(ErrorCode::kDomain, "probability of improvement outside [0,1]");
  }
  if (!(beta > 0.0) || !(gamma > 0.0)) {
    throw Error(ErrorCode::kDomain, "adaptive threshold needs beta, gamma > 0");
  }
  const double cdf = std::clamp(BetaCdf(p_b, beta), 0.0, 1.0);
  return std::pow(cdf, gamma);
}

double StepThreshold(const StopConfig& cfg, double p_b) {
  return cfg.mode == StopMode::kFixed ? cfg.delta
                                      : AdaptiveThreshold(p_b, cfg);
}

RegretEstimate EstimatedRegret(double u_max_hat, double u_p,
                               double u_min_hat) {
  if (!(u_max_hat > u_min_hat)) return {0.0, true};
  const double r = (u_max_hat - u_p) / (u_max_hat - u_min_hat);
  return {std::clamp(r, 0.0, 1.0), false};
}

}  // namespace cfbo
