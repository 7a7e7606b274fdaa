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

#ifndef CFBO_COMMON_HPP_
#define CFBO_COMMON_HPP_

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace cfbo {

// Row-major storage is used for anything that is walked one curve (or one
// Monte-Carlo sample) at a time.
template <typename Scalar>
using RowMatrixX =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using RowMatrixXd = RowMatrixX<double>;
using VectorXd = VectorX<double>;

using Rng = std::mt19937_64;

enum class ErrorCode {
  kParse,      // malformed input file
  kShape,      // ragged or inconsistent dimensions
  kRange,      // value outside its admissible band
  kDomain,     // argument outside an operation's domain
  kIndex,      // index out of range
  kEmpty,      // required collection is empty
  kNumeric,    // non-finite intermediate result
  kIo,         // file system failure
  kExhausted,  // every configuration is fully trained
  kMismatch,   // inputs that must agree do not
};

const char* ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Deterministic 64-bit mixing of several integers into one seed
// (splitmix64 finalizer applied after each word).
std::uint64_t MixSeed(std::uint64_t a, std::uint64_t b = 0,
                      std::uint64_t c = 0);

// Shortest decimal string that parses back to the same double.
std::string FormatDouble(double value);

// Strict full-string parse; throws Error(kParse) naming `context`.
double ParseDouble(const std::string& text, const std::string& context);
long long ParseInt(const std::string& text, const std::string& context);

}  // namespace cfbo

#endif  // CFBO_COMMON_HPP_
