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

// Command-line front end: run, fit-utility, simulate-prefs, eval, gen-synth.
//
// Exit codes: 0 success, 2 usage or domain error, 3 data error (parse, shape,
// range, I/O, mismatch), 4 numeric failure.

#ifndef CFBO_CLI_HPP_
#define CFBO_CLI_HPP_

#include <iostream>
#include <ostream>
#include <string>

#include "cfbo/common.hpp"

namespace cfbo {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

int ExitCodeFor(ErrorCode code);

// Trace file name for one run: <task>__<method>__seed<seed>.jsonl.
std::string TraceFileName(const std::string& task, const std::string& method,
                          std::uint64_t seed);

// Number of parallel workers: CFBO_THREADS if set to a positive integer,
// otherwise the number of logical cores.
int WorkerCount();

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);
inline int RunCli(int argc, const char* const* argv) {
  return RunCli(argc, argv, std::cout, std::cerr);
}

}  // namespace cfbo

#endif  // CFBO_CLI_HPP_
