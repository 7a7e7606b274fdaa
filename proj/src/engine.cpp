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

#include "cfbo/engine.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"

namespace cfbo {
namespace {

using ojson = nlohmann::ordered_json;

BOTrace MakeTraceHeader(const LCTask& task, const UtilityFn& u,
                        const std::string& method, const RunOptions& options) {
  BOTrace trace;
  trace.task_name = task.name;
  trace.method = method;
  trace.seed = options.seed;
  trace.budget = u.budget();
  trace.utility_json = SerializeUtilityJson(u);
  trace.raw_samples = options.sampling.raw_samples;
  trace.group_size = options.sampling.group_size;
  return trace;
}

void Finish(BOTrace& trace, const History& history) {
  trace.stop_step = history.budget_spent();
  for (const Observation& o : history.observations()) {
    if (trace.incumbent.n < 0 || o.y > trace.incumbent.y) {
      trace.incumbent = {o.n, o.t, o.y};
    }
  }
}

// Reveals one epoch of n and updates the utility bookkeeping shared by every
// method. Returns the filled step record (without acquisition fields).
class Bookkeeper {
 public:
  Bookkeeper(const LCTask& task, const UtilityFn& u) : task_(task), u_(u) {}

  StepRecord Reveal(History& history, int n) {
    const double y = task_.curves(n, history.frontier(n));
    history.Reveal(n, y);
    const int b = history.budget_spent();
    const double u_p = u_(b, history.incumbent());
    history.set_prev_utility(u_p);
    if (b == 1) {
      // Pessimistic floor for the regret scale: the first incumbent held
      // until the whole budget is spent.
      u_min_hat_ = u_(u_.budget(), history.incumbent());
      u_max_hat_ = u_p;
    } else {
      u_max_hat_ = std::max(u_max_hat_, u_p);
    }
    r_hat_ = EstimatedRegret(u_max_hat_, u_p, u_min_hat_).value;

    StepRecord rec;
    rec.b = b;
    rec.n = n;
    rec.y = y;
    rec.incumbent = history.incumbent();
    rec.u_p = u_p;
    rec.r_hat = r_hat_;
    return rec;
  }

  double r_hat() const { return r_hat_; }

 private:
  const LCTask& task_;
  const UtilityFn& u_;
  double u_max_hat_ = kNegInf;
  double u_min_hat_ = kNegInf;
  double r_hat_ = 0.0;
};

}  // namespace

const char* MethodName(Method method) {
  switch (method) {
    case Method::kCfbo:
      return "cfbo";
    case Method::kCfboFixedThreshold:
      return "cfbo-fixed-threshold";
    case Method::kRandom:
      return "random";
  }
  return "unknown";
}

Method ParseMethod(const std::string& name) {
  for (Method m : {Method::kCfbo, Method::kCfboFixedThreshold, Method::kRandom}) {
    if (name == MethodName(m)) return m;
  }
  throw Error(ErrorCode::kDomain, "unknown method: " + name);
}

BOTrace RunWithExtrapolator(const LCTask& task, const UtilityFn& u,
                            const StopConfig& stop, const RunOptions& options,
                            CurveExtrapolator& model) {
  stop.Validate();
  BOTrace trace = MakeTraceHeader(
      task, u,
      stop.mode == StopMode::kAdaptive ? MethodName(Method::kCfbo)
                                       : MethodName(Method::kCfboFixedThreshold),
      options);
  trace.stop_config = stop;

  History history(task.num_configs(), task.num_epochs());
  Bookkeeper books(task, u);
  Rng rng(MixSeed(options.seed, 0xacc));

  for (int b = 1; b <= u.budget(); ++b) {
    if (history.exhausted()) {
      trace.exhausted = true;
      break;
    }
    model.Condition(history, task);
    Selection sel = SelectConfig(u, model, history, options.sampling, rng);
    const double p_b = ProbImprovement(u, sel.samples, history);
    const double threshold = StepThreshold(stop, p_b);
    if (b >= 2 && ShouldStop(books.r_hat(), threshold)) {
      trace.stop = StopRecord{b, sel.n, p_b, threshold, books.r_hat()};
      break;
    }
    StepRecord rec = books.Reveal(history, sel.n);
    rec.best_dt = sel.acquisition.best_dt;
    rec.acquisition = sel.acquisition.value;
    rec.p_b = p_b;
    rec.threshold = threshold;
    trace.steps.push_back(rec);
  }
  if (!trace.stop && history.exhausted()) trace.exhausted = true;
  Finish(trace, history);
  return trace;
}

BOTrace Run(const LCTask& task, const UtilityFn& u, const StopConfig& stop,
            const RunOptions& options) {
  SurrogateOptions surrogate = options.surrogate;
  surrogate.seed = MixSeed(options.seed, 0x5u);
  PowerLawEnsemble model(surrogate);
  return RunWithExtrapolator(task, u, stop, options, model);
}

BOTrace RunBaselineRandom(const LCTask& task, const UtilityFn& u,
                          const RunOptions& options) {
  BOTrace trace = MakeTraceHeader(task, u, MethodName(Method::kRandom), options);
  trace.raw_samples = 0;
  trace.group_size = 0;
  History history(task.num_configs(), task.num_epochs());
  Bookkeeper books(task, u);
  Rng rng(MixSeed(options.seed, 0x7a4d));

  std::vector<int> untrained(task.num_configs());
  for (int n = 0; n < task.num_configs(); ++n) untrained[n] = n;
  int current = -1;
  for (int b = 1; b <= u.budget(); ++b) {
    if (current < 0 || history.frontier(current) >= task.num_epochs()) {
      if (untrained.empty()) break;
      std::uniform_int_distribution<size_t> pick(0, untrained.size() - 1);
      const size_t i = pick(rng);
      current = untrained[i];
      untrained.erase(untrained.begin() + static_cast<std::ptrdiff_t>(i));
    }
    StepRecord rec = books.Reveal(history, current);
    rec.best_dt = task.num_epochs() - history.frontier(current) + 1;
    trace.steps.push_back(rec);
  }
  trace.exhausted = history.exhausted();
  Finish(trace, history);
  return trace;
}

BOTrace RunMethod(Method method, const LCTask& task, const UtilityFn& u,
                  const StopConfig& stop, const RunOptions& options) {
  switch (method) {
    case Method::kCfbo:
      return Run(task, u, stop, options);
    case Method::kCfboFixedThreshold:
      return Run(task, u, StopConfig::Fixed(stop.delta), options);
    case Method::kRandom:
      return RunBaselineRandom(task, u, options);
  }
  throw Error(ErrorCode::kDomain, "unknown method");
}

namespace {

ojson StopConfigJson(const StopConfig& cfg) {
  if (cfg.mode == StopMode::kFixed) return {{"mode", "fixed"}, {"delta", cfg.delta}};
  return {{"mode", "adaptive"}, {"beta", cfg.beta}, {"gamma", cfg.gamma}};
}

ojson OptionalJson(const std::optional<double>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

}  // namespace

std::string SerializeTrace(const BOTrace& trace) {
  std::string out;
  ojson header;
  header["type"] = "header";
  header["version"] = kToolVersion;
  header["task"] = trace.task_name;
  header["method"] = trace.method;
  header["seed"] = trace.seed;
  header["B"] = trace.budget;
  header["utility"] = ojson::parse(trace.utility_json);
  header["stop"] = trace.stop_config ? StopConfigJson(*trace.stop_config)
                                     : ojson(nullptr);
  header["raw_samples"] = trace.raw_samples;
  header["group_size"] = trace.group_size;
  out += header.dump() + "\n";

  for (const StepRecord& s : trace.steps) {
    ojson rec;
    rec["type"] = "step";
    rec["b"] = s.b;
    rec["n"] = s.n;
    rec["best_dt"] = s.best_dt;
    rec["acq"] = s.acquisition;
    rec["y"] = s.y;
    rec["incumbent"] = s.incumbent;
    rec["u_p"] = s.u_p;
    rec["p_b"] = OptionalJson(s.p_b);
    rec["threshold"] = OptionalJson(s.threshold);
    rec["r_hat"] = s.r_hat;
    out += rec.dump() + "\n";
  }
  if (trace.stop) {
    ojson rec;
    rec["type"] = "stop";
    rec["b"] = trace.stop->b;
    rec["n"] = trace.stop->n;
    rec["p_b"] = trace.stop->p_b;
    rec["threshold"] = trace.stop->threshold;
    rec["r_hat"] = trace.stop->r_hat;
    out += rec.dump() + "\n";
  }
  ojson summary;
  summary["type"] = "summary";
  summary["stop_step"] = trace.stop_step;
  summary["stopped"] = trace.stop.has_value();
  summary["exhausted"] = trace.exhausted;
  summary["incumbent"] = {{"n", trace.incumbent.n},
                          {"t", trace.incumbent.t},
                          {"y", trace.incumbent.y}};
  out += summary.dump() + "\n";
  return out;
}

BOTrace ParseTrace(const std::string& contents) {
  BOTrace trace;
  std::istringstream in(contents);
  std::string line;
  int line_no = 0;
  bool have_header = false, have_summary = false;
  auto opt = [](const ojson& v) -> std::optional<double> {
    if (v.is_null()) return std::nullopt;
    return v.get<double>();
  };
  try {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const ojson rec = ojson::parse(line);
      const std::string type = rec.at("type").get<std::string>();
      if (type == "header") {
        have_header = true;
        trace.task_name = rec.at("task").get<std::string>();
        trace.method = rec.at("method").get<std::string>();
        trace.seed = rec.at("seed").get<std::uint64_t>();
        trace.budget = rec.at("B").get<int>();
        trace.utility_json = rec.at("utility").dump();
        const ojson& stop = rec.at("stop");
        if (!stop.is_null()) {
          trace.stop_config =
              stop.at("mode") == "fixed"
                  ? StopConfig::Fixed(stop.at("delta").get<double>())
                  : StopConfig::Adaptive(stop.at("beta").get<double>(),
                                         stop.at("gamma").get<double>());
        }
        trace.raw_samples = rec.at("raw_samples").get<int>();
        trace.group_size = rec.at("group_size").get<int>();
      } else if (type == "step") {
        StepRecord s;
        s.b = rec.at("b").get<int>();
        s.n = rec.at("n").get<int>();
        s.best_dt = rec.at("best_dt").get<int>();
        s.acquisition = rec.at("acq").get<double>();
        s.y = rec.at("y").get<double>();
        s.incumbent = rec.at("incumbent").get<double>();
        s.u_p = rec.at("u_p").get<double>();
        s.p_b = opt(rec.at("p_b"));
        s.threshold = opt(rec.at("threshold"));
        s.r_hat = rec.at("r_hat").get<double>();
        trace.steps.push_back(s);
      } else if (type == "stop") {
        trace.stop = StopRecord{rec.at("b").get<int>(), rec.at("n").get<int>(),
                                rec.at("p_b").get<double>(),
                                rec.at("threshold").get<double>(),
                                rec.at("r_hat").get<double>()};
      } else if (type == "summary") {
        have_summary = true;
        trace.stop_step = rec.at("stop_step").get<int>();
        trace.exhausted = rec.at("exhausted").get<bool>();
        const ojson& inc = rec.at("incumbent");
        trace.incumbent = {inc.at("n").get<int>(), inc.at("t").get<int>(),
                           inc.at("y").get<double>()};
      } else {
        throw Error(ErrorCode::kParse, "unknown record type " + type);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse,
                "trace line " + std::to_string(line_no) + ": " + e.what());
  }
  if (!have_header || !have_summary) {
    throw Error(ErrorCode::kParse, "trace lacks a header or summary record");
  }
  return trace;
}

BOTrace LoadTrace(const std::string& path) {
  try {
    return ParseTrace(ReadFile(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIo) throw;
    throw Error(e.code(), path + ": " + e.what());
  }
}

}  // namespace cfbo
