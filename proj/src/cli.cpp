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

#include "cfbo/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "cfbo/engine.hpp"
#include "cfbo/evaluation.hpp"
#include "cfbo/lc_data.hpp"
#include "cfbo/utility.hpp"

namespace cfbo {
namespace {

constexpr char kProtocol[] = " (reference protocol value)";

// Utility given either as a JSON spec file or inline as a power term.
struct UtilityArgs {
  std::string path;
  std::optional<double> alpha;
  double c = 1.0;
  int budget = 300;
  bool hard_cap = false;

  void Register(CLI::App* cmd) {
    cmd->add_option("--utility", path, "Utility JSON spec (overrides inline flags)");
    cmd->add_option("--alpha", alpha, "Inline power-law penalty weight");
    cmd->add_option("--c", c, "Inline power-law exponent")->capture_default_str();
    cmd->add_option("--budget,-B", budget,
                    std::string("Total budget in epochs for inline utilities") +
                        kProtocol)
        ->capture_default_str();
    cmd->add_flag("--hard-cap", hard_cap, "Utility is -inf beyond the budget");
  }

  UtilityFn Build() const {
    if (!path.empty()) return LoadUtility(path);
    if (!alpha) {
      throw Error(ErrorCode::kDomain, "give --utility or --alpha");
    }
    return UtilityFn::Power(budget, *alpha, c, hard_cap);
  }
};

struct StopArgs {
  std::string mode = "adaptive";
  StopConfig config;

  void Register(CLI::App* cmd) {
    cmd->add_option("--stop", mode, "Stopping rule: adaptive or fixed")
        ->check(CLI::IsMember({"adaptive", "fixed"}))
        ->capture_default_str();
    cmd->add_option("--delta", config.delta,
                    std::string("Fixed regret threshold") + kProtocol)
        ->capture_default_str();
    cmd->add_option("--beta", config.beta,
                    std::string("Adaptive threshold Beta shape, exp(-1)") + kProtocol)
        ->capture_default_str();
    cmd->add_option("--gamma", config.gamma,
                    std::string("Adaptive threshold exponent, log_0.5(0.2)") +
                        kProtocol)
        ->capture_default_str();
  }

  StopConfig Build() const {
    StopConfig cfg = config;
    cfg.mode = mode == "fixed" ? StopMode::kFixed : StopMode::kAdaptive;
    cfg.Validate();
    return cfg;
  }
};

void EnsureDirectory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create directory " + dir);
}

std::string JoinPath(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

// Runs fn(i) for i in [0, count) on up to WorkerCount() threads. The first
// exception (by index) is rethrown after all workers finish.
template <typename Fn>
void ParallelFor(int count, Fn&& fn) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::min(WorkerCount(), count);
  std::vector<std::thread> pool;
  for (int k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

int CmdRun(const std::vector<std::string>& task_paths, const UtilityArgs& uargs,
           const StopArgs& sargs, const std::string& method_name,
           const std::vector<std::uint64_t>& seeds, const SamplingOptions& sampling,
           const std::string& out_dir, std::ostream& out) {
  const Method method = ParseMethod(method_name);
  const UtilityFn u = uargs.Build();
  const StopConfig stop = sargs.Build();
  if (sampling.group_size < 1 || sampling.raw_samples < sampling.group_size) {
    throw Error(ErrorCode::kDomain,
                "need --group-size >= 1 and --raw-samples >= --group-size");
  }
  std::vector<LCTask> tasks;
  for (const std::string& path : task_paths) tasks.push_back(LoadTask(path));
  EnsureDirectory(out_dir);

  const int runs = static_cast<int>(tasks.size() * seeds.size());
  std::vector<BOTrace> traces(runs);
  ParallelFor(runs, [&](int i) {
    const LCTask& task = tasks[i / seeds.size()];
    RunOptions options;
    options.sampling = sampling;
    options.seed = seeds[i % seeds.size()];
    traces[i] = RunMethod(method, task, u, stop, options);
    WriteFileAtomically(
        JoinPath(out_dir, TraceFileName(task.name, traces[i].method, options.seed)),
        SerializeTrace(traces[i]));
  });
  for (const BOTrace& trace : traces) {
    out << trace.task_name << " " << trace.method << " seed=" << trace.seed
        << " y=" << FormatDouble(trace.incumbent.y)
        << " u_p=" << FormatDouble(TerminalUtility(u, trace))
        << " stop_step=" << trace.stop_step << "\n";
  }
  return kExitOk;
}

int CmdFitUtility(const std::string& prefs_path, const UtilityArgs& uargs,
                  const FitOptions& options, const std::string& out_path,
                  std::ostream& out) {
  const std::vector<PreferencePair> data = ParsePreferencesCsv(ReadFile(prefs_path));
  if (data.empty()) throw Error(ErrorCode::kEmpty, prefs_path + ": no preference pairs");
  UtilityArgs family = uargs;
  if (family.path.empty() && !family.alpha) family.alpha = 0.0;
  const FitResult fit = FitUtility(data, family.Build(), options);
  WriteFileAtomically(out_path, SerializeUtilityJson(fit.utility));
  out << "final_loss=" << FormatDouble(fit.final_loss) << "\n";
  return kExitOk;
}

int CmdSimulatePrefs(const UtilityArgs& uargs, const std::string& mode, int n,
                     std::uint64_t seed, const std::string& trajectory_path,
                     const std::string& out_path, std::ostream& out) {
  const UtilityFn u = uargs.Build();
  std::vector<double> trajectory;
  PreferenceSampler sampler = PreferenceSampler::kUniformMeaningful;
  if (mode == "trajectory") {
    sampler = PreferenceSampler::kAroundTrajectory;
    if (trajectory_path.empty()) {
      throw Error(ErrorCode::kDomain, "--mode trajectory needs --trajectory");
    }
    for (const StepRecord& s : LoadTrace(trajectory_path).steps) {
      trajectory.push_back(s.incumbent);
    }
  }
  Rng rng(seed);
  const std::vector<PreferencePair> pairs =
      SimulatePreferences(u, sampler, n, rng, trajectory);
  WriteFileAtomically(out_path, SerializePreferencesCsv(pairs));
  out << "pairs=" << pairs.size() << "\n";
  return kExitOk;
}

int CmdEval(const std::vector<std::string>& trace_paths,
            const std::vector<std::string>& task_paths, const UtilityArgs& uargs,
            const std::string& out_dir, std::ostream& out, std::ostream& err) {
  const UtilityFn u = uargs.Build();
  std::map<std::string, LCTask> tasks;
  for (const std::string& path : task_paths) {
    LCTask task = LoadTask(path);
    std::string name = task.name;
    tasks.emplace(std::move(name), std::move(task));
  }
  std::vector<RunRegret> runs;
  for (const std::string& path : trace_paths) {
    const BOTrace trace = LoadTrace(path);
    auto it = tasks.find(trace.task_name);
    if (it == tasks.end()) {
      throw Error(ErrorCode::kMismatch,
                  path + ": no task named " + trace.task_name);
    }
    try {
      runs.push_back({trace.method, trace.task_name, trace.seed,
                      NormalizedRegret(it->second, u, trace)});
    } catch (const Error& e) {
      throw Error(e.code(), path + ": " + e.what());
    }
  }
  const RegretReport report = Aggregate(std::move(runs));
  for (const std::string& w : report.warnings) err << "warning: " << w << "\n";
  EnsureDirectory(out_dir);
  WriteFileAtomically(JoinPath(out_dir, "runs.csv"), RunsCsv(report));
  WriteFileAtomically(JoinPath(out_dir, "summary.csv"), SummaryCsv(report));
  WriteFileAtomically(JoinPath(out_dir, "ranks.csv"), RanksCsv(report));
  out << SummaryCsv(report);
  return kExitOk;
}

}  // namespace

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDomain:
      return kExitUsage;
    case ErrorCode::kNumeric:
      return kExitNumeric;
    default:
      return kExitData;
  }
}

std::string TraceFileName(const std::string& task, const std::string& method,
                          std::uint64_t seed) {
  return task + "__" + method + "__seed" + std::to_string(seed) + ".jsonl";
}

int WorkerCount() {
  if (const char* env = std::getenv("CFBO_THREADS")) {
    try {
      const long long n = ParseInt(env, "CFBO_THREADS");
      if (n >= 1) return static_cast<int>(std::min<long long>(n, 1024));
    } catch (const Error&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Cost-sensitive freeze-thaw Bayesian optimization", "cfbo"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  // run
  CLI::App* run = app.add_subcommand("run", "Run one method on tasks x seeds");
  std::vector<std::string> run_tasks;
  UtilityArgs run_u;
  StopArgs run_stop;
  std::string run_method = "cfbo";
  std::vector<std::uint64_t> run_seeds = {0, 1, 2, 3, 4};
  SamplingOptions run_sampling;
  std::string run_out = ".";
  run->add_option("--task", run_tasks, "Task file(s), .csv or .json")
      ->required();
  run_u.Register(run);
  run_stop.Register(run);
  run->add_option("--method", run_method, "cfbo, cfbo-fixed-threshold or random")
      ->check(CLI::IsMember({"cfbo", "cfbo-fixed-threshold", "random"}))
      ->capture_default_str();
  run->add_option("--seed", run_seeds, "Seeds, one run per task and seed (5 seeds)")
      ->capture_default_str();
  run->add_option("--raw-samples", run_sampling.raw_samples,
                  std::string("Raw Monte Carlo curve samples per candidate") +
                      kProtocol)
      ->capture_default_str();
  run->add_option("--group-size", run_sampling.group_size,
                  std::string("Variance-reduction group size") + kProtocol)
      ->capture_default_str();
  run->add_option("--out", run_out, "Output directory for traces")
      ->capture_default_str();

  // fit-utility
  CLI::App* fit = app.add_subcommand("fit-utility",
                                     "Fit a utility to pairwise preferences");
  std::string fit_prefs, fit_out;
  UtilityArgs fit_u;
  FitOptions fit_opts;
  fit->add_option("--prefs", fit_prefs, "Preference CSV (b,y,b2,y2,label)")
      ->required();
  fit_u.Register(fit);
  fit->add_option("--iters", fit_opts.iters,
                  std::string("Gradient steps") + kProtocol)
      ->capture_default_str();
  fit->add_option("--step-size", fit_opts.step_size,
                  std::string("Gradient step size") + kProtocol)
      ->capture_default_str();
  fit->add_option("--tau", fit_opts.tau,
                  std::string("Bradley-Terry temperature") + kProtocol)
      ->capture_default_str();
  fit->add_option("--out", fit_out, "Output utility JSON")->required();

  // simulate-prefs
  CLI::App* sim = app.add_subcommand("simulate-prefs",
                                     "Simulate labelled preference pairs");
  UtilityArgs sim_u;
  std::string sim_mode = "uniform", sim_traj, sim_out;
  int sim_n = 30;
  std::uint64_t sim_seed = 0;
  sim_u.Register(sim);
  sim->add_option("--mode", sim_mode, "uniform or trajectory")
      ->check(CLI::IsMember({"uniform", "trajectory"}))
      ->capture_default_str();
  sim->add_option("--n", sim_n, std::string("Number of pairs") + kProtocol)
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_seed, "Random seed")->capture_default_str();
  sim->add_option("--trajectory", sim_traj,
                  "Trace whose incumbents form the reference trajectory");
  sim->add_option("--out", sim_out, "Output preference CSV")->required();

  // eval
  CLI::App* ev = app.add_subcommand("eval", "Normalized regret reports");
  std::vector<std::string> ev_traces, ev_tasks;
  UtilityArgs ev_u;
  std::string ev_out = ".";
  ev->add_option("--trace", ev_traces, "Trace files")->required();
  ev->add_option("--task", ev_tasks, "Task files the traces ran on")->required();
  ev_u.Register(ev);
  ev->add_option("--out", ev_out, "Output directory for CSV reports")
      ->capture_default_str();

  // gen-synth
  CLI::App* gen = app.add_subcommand("gen-synth", "Generate a synthetic task");
  SynthSpec spec;
  std::string gen_out;
  gen->add_option("--name", spec.name, "Task name")->capture_default_str();
  gen->add_option("--N", spec.num_configs, "Configurations")->capture_default_str();
  gen->add_option("--T", spec.num_epochs, "Epochs")->capture_default_str();
  gen->add_option("--dx", spec.config_dim, "Configuration dimension")
      ->capture_default_str();
  gen->add_option("--y-inf-lo", spec.y_inf_lo, "Lowest asymptote")
      ->capture_default_str();
  gen->add_option("--y-inf-span", spec.y_inf_span, "Asymptote span over configs")
      ->capture_default_str();
  gen->add_option("--a", spec.a, "Curve amplitude")->capture_default_str();
  gen->add_option("--a-spread", spec.a_spread, "Relative amplitude spread")
      ->capture_default_str();
  gen->add_option("--rate", spec.rate, "Curve decay rate")->capture_default_str();
  gen->add_option("--rate-spread", spec.rate_spread, "Log decay-rate spread")
      ->capture_default_str();
  gen->add_option("--noise", spec.noise, "Per-epoch Gaussian noise std")
      ->capture_default_str();
  gen->add_option("--seed", spec.seed, "Random seed")->capture_default_str();
  gen->add_option("--out", gen_out, "Output task file (.csv or .json)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) {
      return CmdRun(run_tasks, run_u, run_stop, run_method, run_seeds,
                    run_sampling, run_out, out);
    }
    if (*fit) return CmdFitUtility(fit_prefs, fit_u, fit_opts, fit_out, out);
    if (*sim) {
      return CmdSimulatePrefs(sim_u, sim_mode, sim_n, sim_seed, sim_traj,
                              sim_out, out);
    }
    if (*ev) return CmdEval(ev_traces, ev_tasks, ev_u, ev_out, out, err);
    if (*gen) {
      const LCTask task = GenSyntheticTask(spec);
      SaveTask(task, gen_out, TaskFormatFromPath(gen_out));
      out << "wrote " << gen_out << "\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error [" << ErrorCodeName(e.code()) << "]: " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace cfbo
