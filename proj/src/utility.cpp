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

#include "cfbo/utility.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

#include "cfbo/lc_data.hpp"
#include "json.hpp"

namespace cfbo {
namespace {

using json = nlohmann::json;

constexpr double kProbabilityFloor = 1e-12;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Numerically stable logistic function.
double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Scaled utility gap (U_left - U_right) / tau, with infeasible utilities
// mapped to +-infinity instead of producing NaN.
double ScaledGap(double u_left, double u_right, double tau) {
  const bool left_bad = u_left == kNegInf;
  const bool right_bad = u_right == kNegInf;
  if (left_bad && right_bad) return 0.0;
  if (left_bad) return kNegInf;
  if (right_bad) return -kNegInf;
  return (u_left - u_right) / tau;
}

double PairLoss(double z, int label) {
  // log(1 - sigmoid(z)) == log(sigmoid(-z)); computing it that way keeps the
  // saturated side accurate.
  const double p = Sigmoid(z);
  const double q = Sigmoid(-z);
  return label == 1 ? -std::log(std::max(p, kProbabilityFloor))
                    : -std::log(std::max(q, kProbabilityFloor));
}

int NumAlphas(const UtilityTerm& term) {
  return std::visit(
      Overloaded{[](const PowerTerm&) { return 1; },
                 [](const StaircaseTerm& s) {
                   return static_cast<int>(s.alphas.size());
                 }},
      term);
}

}  // namespace

UtilityFn::UtilityFn(int budget, std::vector<UtilityTerm> terms,
                     std::vector<double> weights, bool hard_cap)
    : budget_(budget),
      terms_(std::move(terms)),
      weights_(std::move(weights)),
      hard_cap_(hard_cap) {
  if (budget_ < 1) throw Error(ErrorCode::kDomain, "utility budget B must be >= 1");
  if (terms_.empty()) throw Error(ErrorCode::kDomain, "utility needs at least one term");
  if (weights_.size() != terms_.size()) {
    throw Error(ErrorCode::kDomain, "one mixing weight per utility term required");
  }
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw Error(ErrorCode::kDomain, "mixing weights must be >= 0");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(ErrorCode::kDomain, "mixing weights must sum to 1");
  }
  for (const UtilityTerm& term : terms_) {
    std::visit(
        Overloaded{
            [](const PowerTerm& p) {
              if (!(p.c > 0.0) || !std::isfinite(p.c)) {
                throw Error(ErrorCode::kDomain, "power exponent c must be > 0");
              }
              if (!(p.alpha >= 0.0) || !std::isfinite(p.alpha)) {
                throw Error(ErrorCode::kDomain, "alpha must be >= 0");
              }
            },
            [](const StaircaseTerm& s) {
              if (s.edges.empty() || s.edges.size() != s.alphas.size()) {
                throw Error(ErrorCode::kDomain,
                            "staircase needs one alpha per edge");
              }
              if (!std::is_sorted(s.edges.begin(), s.edges.end())) {
                throw Error(ErrorCode::kDomain, "staircase edges must be sorted");
              }
              for (double a : s.alphas) {
                if (!(a >= 0.0) || !std::isfinite(a)) {
                  throw Error(ErrorCode::kDomain, "staircase alphas must be >= 0");
                }
              }
            }},
        term);
  }
}

UtilityFn UtilityFn::Power(int budget, double alpha, double c, bool hard_cap) {
  return UtilityFn(budget, {PowerTerm{c, alpha}}, {1.0}, hard_cap);
}

double UtilityFn::TermPenalty(size_t term, double b) const {
  const double frac = b / budget_;
  return std::visit(
      Overloaded{[frac](const PowerTerm& p) {
                   return p.alpha * std::pow(frac, p.c);
                 },
                 [b](const StaircaseTerm& s) {
                   double pen = 0.0;
                   for (size_t j = 0; j < s.edges.size(); ++j) {
                     if (b >= s.edges[j]) pen += s.alphas[j];
                   }
                   return pen;
                 }},
      terms_[term]);
}

double UtilityFn::Penalty(double b) const {
  double pen = 0.0;
  for (size_t i = 0; i < terms_.size(); ++i) {
    if (weights_[i] != 0.0) pen += weights_[i] * TermPenalty(i, b);
  }
  return pen;
}

double UtilityFn::operator()(double b, double y) const {
  if (hard_cap_ && b > budget_) return kNegInf;
  return y - Penalty(b);
}

bool UtilityFn::AllPenaltiesZero() const {
  for (const UtilityTerm& term : terms_) {
    const bool zero = std::visit(
        Overloaded{[](const PowerTerm& p) { return p.alpha == 0.0; },
                   [](const StaircaseTerm& s) {
                     return std::all_of(s.alphas.begin(), s.alphas.end(),
                                        [](double a) { return a == 0.0; });
                   }},
        term);
    if (!zero) return false;
  }
  return true;
}

double BtProbability(const UtilityFn& u, const PreferencePair& pair,
                     double tau) {
  if (!(tau > 0.0)) throw Error(ErrorCode::kDomain, "temperature must be > 0");
  return Sigmoid(ScaledGap(u(pair.left.b, pair.left.y),
                           u(pair.right.b, pair.right.y), tau));
}

double BtLoss(const UtilityFn& u, const std::vector<PreferencePair>& data,
              double tau) {
  if (data.empty()) throw Error(ErrorCode::kEmpty, "preference data is empty");
  if (!(tau > 0.0)) throw Error(ErrorCode::kDomain, "temperature must be > 0");
  double total = 0.0;
  for (const PreferencePair& pair : data) {
    total += PairLoss(ScaledGap(u(pair.left.b, pair.left.y),
                                u(pair.right.b, pair.right.y), tau),
                      pair.label);
  }
  return total / data.size();
}

std::vector<double> ProjectOntoSimplex(const std::vector<double>& v) {
  if (v.empty()) return {};
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (size_t k = 0; k < sorted.size(); ++k) {
    cumulative += sorted[k];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) theta = candidate;
  }
  std::vector<double> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = std::max(v[i] - theta, 0.0);
  // Renormalize away rounding so the result passes the exact-sum check.
  const double total = std::accumulate(out.begin(), out.end(), 0.0);
  for (double& w : out) w /= total;
  return out;
}

namespace {

// Flat parameter layout: every alpha in term order, then (optionally) every
// weight.
struct ParamLayout {
  std::vector<int> alpha_offset;  // first alpha index per term
  int num_alphas = 0;
  bool weights_free = false;
  int size() const {
    return num_alphas +
           (weights_free ? static_cast<int>(alpha_offset.size()) : 0);
  }
};

UtilityFn Rebuild(const UtilityFn& family, const ParamLayout& layout,
                  const std::vector<double>& params) {
  std::vector<UtilityTerm> terms = family.terms();
  for (size_t i = 0; i < terms.size(); ++i) {
    const int off = layout.alpha_offset[i];
    std::visit(Overloaded{[&](PowerTerm& p) { p.alpha = params[off]; },
                          [&](StaircaseTerm& s) {
                            for (size_t j = 0; j < s.alphas.size(); ++j) {
                              s.alphas[j] = params[off + j];
                            }
                          }},
               terms[i]);
  }
  std::vector<double> weights = family.weights();
  if (layout.weights_free) {
    weights.assign(params.begin() + layout.num_alphas, params.end());
  }
  return UtilityFn(family.budget(), std::move(terms), std::move(weights),
                   family.hard_cap());
}

}  // namespace

FitResult FitUtility(const std::vector<PreferencePair>& data,
                     const UtilityFn& family, const FitOptions& options) {
  if (data.empty()) throw Error(ErrorCode::kEmpty, "preference data is empty");
  if (!(options.tau > 0.0) || !(options.step_size > 0.0) ||
      options.iters < 0) {
    throw Error(ErrorCode::kDomain, "invalid fit options");
  }
  const std::vector<UtilityTerm>& terms = family.terms();
  const size_t num_terms = terms.size();

  ParamLayout layout;
  for (const UtilityTerm& term : terms) {
    layout.alpha_offset.push_back(layout.num_alphas);
    layout.num_alphas += NumAlphas(term);
  }
  layout.weights_free = options.fit_weights && num_terms > 1;

  std::vector<double> params(layout.size(), options.init_alpha);
  if (layout.weights_free) {
    std::fill(params.begin() + layout.num_alphas, params.end(),
              1.0 / static_cast<double>(num_terms));
  }

  const double inv_tau = 1.0 / options.tau;
  const double inv_n = 1.0 / static_cast<double>(data.size());
  std::vector<double> grad(params.size());
  std::vector<double> term_pen_left(num_terms), term_pen_right(num_terms);

  FitResult result{Rebuild(family, layout, params), 0.0, {}};
  result.loss_history.reserve(options.iters + 1);

  for (int iter = 0;; ++iter) {
    const UtilityFn current = Rebuild(family, layout, params);
    std::fill(grad.begin(), grad.end(), 0.0);
    double loss = 0.0;
    for (const PreferencePair& pair : data) {
      const double z = ScaledGap(current(pair.left.b, pair.left.y),
                                 current(pair.right.b, pair.right.y),
                                 options.tau);
      loss += PairLoss(z, pair.label);
      // d loss / d z for the logistic cross-entropy.
      const double dz = (Sigmoid(z) - pair.label) * inv_tau * inv_n;
      if (!std::isfinite(dz) || dz == 0.0) continue;
      for (size_t i = 0; i < num_terms; ++i) {
        const double w = current.weights()[i];
        const int off = layout.alpha_offset[i];
        std::visit(
            Overloaded{
                [&](const PowerTerm& p) {
                  const double dl = std::pow(pair.left.b / family.budget(), p.c);
                  const double dr =
                      std::pow(pair.right.b / family.budget(), p.c);
                  grad[off] += dz * -w * (dl - dr);
                },
                [&](const StaircaseTerm& s) {
                  for (size_t j = 0; j < s.edges.size(); ++j) {
                    const double il = pair.left.b >= s.edges[j] ? 1.0 : 0.0;
                    const double ir = pair.right.b >= s.edges[j] ? 1.0 : 0.0;
                    grad[off + j] += dz * -w * (il - ir);
                  }
                }},
            terms[i]);
        if (layout.weights_free) {
          grad[layout.num_alphas + i] +=
              dz * -(current.TermPenalty(i, pair.left.b) -
                     current.TermPenalty(i, pair.right.b));
        }
      }
    }
    loss *= inv_n;
    if (!std::isfinite(loss)) {
      throw Error(ErrorCode::kNumeric,
                  "non-finite preference loss; reduce the step size");
    }
    result.loss_history.push_back(loss);
    if (iter == options.iters) {
      result.utility = current;
      result.final_loss = loss;
      break;
    }

    for (size_t k = 0; k < params.size(); ++k) {
      params[k] -= options.step_size * grad[k];
    }
    for (int k = 0; k < layout.num_alphas; ++k) {
      params[k] = std::clamp(params[k], 0.0, 1.0);
    }
    if (layout.weights_free) {
      std::vector<double> w(params.begin() + layout.num_alphas, params.end());
      w = ProjectOntoSimplex(w);
      std::copy(w.begin(), w.end(), params.begin() + layout.num_alphas);
    }
  }
  return result;
}

std::vector<PreferencePair> SimulatePreferences(
    const UtilityFn& true_u, PreferenceSampler sampler, int n_pairs, Rng& rng,
    const std::vector<double>& trajectory) {
  if (n_pairs < 1) throw Error(ErrorCode::kDomain, "n_pairs must be >= 1");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double budget = true_u.budget();
  std::vector<PreferencePair> out;
  out.reserve(n_pairs);

  auto label = [&](PreferencePair& p) {
    p.label = true_u(p.left.b, p.left.y) > true_u(p.right.b, p.right.y) ? 1 : 0;
  };

  if (sampler == PreferenceSampler::kUniformMeaningful) {
    auto draw_point = [&]() {
      // b/B ~ Uniform(0,1), kept inside the admissible budget range [1, B].
      const double frac = unit(rng);
      const double y = unit(rng);
      return UtilityPoint{std::max(1.0, frac * budget), y};
    };
    while (static_cast<int>(out.size()) < n_pairs) {
      PreferencePair p{draw_point(), draw_point(), 0};
      // Dominated pairs (more performance for less budget) carry no
      // information about the trade-off.
      if ((p.left.y - p.right.y) * (p.left.b - p.right.b) <= 0.0) continue;
      label(p);
      out.push_back(p);
    }
    return out;
  }

  const int len = static_cast<int>(trajectory.size());
  if (len < kTrajectoryBurnIn + 1) {
    throw Error(ErrorCode::kDomain,
                "trajectory must cover more than 50 budgets");
  }
  std::uniform_int_distribution<int> pick_b(kTrajectoryBurnIn + 1, len);
  for (int i = 0; i < n_pairs; ++i) {
    const int b = pick_b(rng);
    const double ref = std::clamp(trajectory[b - 1], 0.0, 1.0);
    const double up = ref + (1.0 - ref) * unit(rng);
    const double down = ref * unit(rng);
    PreferencePair p;
    if (unit(rng) < 0.5) {
      p.left = {static_cast<double>(b), up};
      p.right = {static_cast<double>(b), down};
    } else {
      p.left = {static_cast<double>(b), down};
      p.right = {static_cast<double>(b), up};
    }
    label(p);
    out.push_back(p);
  }
  return out;
}

UtilityFn SampleRandomUtility(int budget, std::vector<UtilityTerm> shapes,
                              double concentration, Rng& rng) {
  if (!(concentration > 0.0)) {
    throw Error(ErrorCode::kDomain, "Dirichlet concentration must be > 0");
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::gamma_distribution<double> gamma(concentration, 1.0);
  for (UtilityTerm& term : shapes) {
    std::visit(Overloaded{[&](PowerTerm& p) { p.alpha = unit(rng); },
                          [&](StaircaseTerm& s) {
                            for (double& a : s.alphas) a = unit(rng);
                          }},
               term);
  }
  std::vector<double> weights(shapes.size());
  double total = 0.0;
  for (double& w : weights) total += (w = gamma(rng));
  if (!(total > 0.0)) {
    std::fill(weights.begin(), weights.end(), 1.0 / weights.size());
  } else {
    for (double& w : weights) w /= total;
  }
  return UtilityFn(budget, std::move(shapes), ProjectOntoSimplex(weights));
}

UtilityFn ParseUtilityJson(const std::string& contents) {
  try {
    const json doc = json::parse(contents);
    std::vector<UtilityTerm> terms;
    for (const json& t : doc.at("terms")) {
      const std::string form = t.at("form").get<std::string>();
      if (form == "power") {
        terms.emplace_back(
            PowerTerm{t.at("c").get<double>(), t.at("alpha").get<double>()});
      } else if (form == "staircase") {
        terms.emplace_back(
            StaircaseTerm{t.at("edges").get<std::vector<double>>(),
                          t.at("alphas").get<std::vector<double>>()});
      } else {
        throw Error(ErrorCode::kParse, "unknown utility term form: " + form);
      }
    }
    std::vector<double> weights;
    if (doc.contains("weights")) {
      weights = doc.at("weights").get<std::vector<double>>();
    } else if (terms.size() == 1) {
      weights = {1.0};
    }
    const bool hard_cap = doc.value("hard_cap", false);
    return UtilityFn(doc.at("B").get<int>(), std::move(terms),
                     std::move(weights), hard_cap);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad utility JSON: ") + e.what());
  }
}

std::string SerializeUtilityJson(const UtilityFn& u) {
  json doc;
  doc["B"] = u.budget();
  json terms = json::array();
  for (const UtilityTerm& term : u.terms()) {
    std::visit(Overloaded{[&](const PowerTerm& p) {
                            terms.push_back(
                                {{"form", "power"}, {"c", p.c}, {"alpha", p.alpha}});
                          },
                          [&](const StaircaseTerm& s) {
                            terms.push_back({{"form", "staircase"},
                                             {"edges", s.edges},
                                             {"alphas", s.alphas}});
                          }},
               term);
  }
  doc["terms"] = terms;
  doc["weights"] = u.weights();
  if (u.hard_cap()) doc["hard_cap"] = true;
  return doc.dump();
}

UtilityFn LoadUtility(const std::string& path) {
  try {
    return ParseUtilityJson(ReadFile(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIo) throw;
    throw Error(e.code(), path + ": " + e.what());
  }
}

std::vector<PreferencePair> ParsePreferencesCsv(const std::string& contents) {
  std::istringstream in(contents);
  std::string line;
  int line_no = 0;
  std::vector<PreferencePair> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("b,", 0) == 0) continue;
    std::vector<std::string> fields;
    std::string f;
    std::istringstream row(line);
    while (std::getline(row, f, ',')) fields.push_back(f);
    const std::string where = "line " + std::to_string(line_no);
    if (fields.size() != 5) {
      throw Error(ErrorCode::kParse, where + ": expected 5 fields b,y,b2,y2,label");
    }
    PreferencePair p;
    p.left.b = ParseDouble(fields[0], where);
    p.left.y = ParseDouble(fields[1], where);
    p.right.b = ParseDouble(fields[2], where);
    p.right.y = ParseDouble(fields[3], where);
    const long long label = ParseInt(fields[4], where);
    if (label != 0 && label != 1) {
      throw Error(ErrorCode::kParse, where + ": label must be 0 or 1");
    }
    p.label = static_cast<int>(label);
    if (!(p.left.b >= 1.0 && p.right.b >= 1.0)) {
      throw Error(ErrorCode::kRange, where + ": budgets must be >= 1");
    }
    if (p.left.y < 0.0 || p.left.y > 1.0 || p.right.y < 0.0 || p.right.y > 1.0) {
      throw Error(ErrorCode::kRange, where + ": performances must lie in [0,1]");
    }
    out.push_back(p);
  }
  if (out.empty()) throw Error(ErrorCode::kEmpty, "preference file has no rows");
  return out;
}

std::string SerializePreferencesCsv(const std::vector<PreferencePair>& data) {
  std::string out;
  for (const PreferencePair& p : data) {
    out += FormatDouble(p.left.b) + ',' + FormatDouble(p.left.y) + ',' +
           FormatDouble(p.right.b) + ',' + FormatDouble(p.right.y) + ',' +
           std::to_string(p.label) + '\n';
  }
  return out;
}

}  // namespace cfbo
