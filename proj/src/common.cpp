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

#include "cfbo/common.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <system_error>

namespace cfbo {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse:
      return "parse error";
    case ErrorCode::kShape:
      return "shape error";
    case ErrorCode::kRange:
      return "range error";
    case ErrorCode::kDomain:
      return "domain error";
    case ErrorCode::kIndex:
      return "index error";
    case ErrorCode::kEmpty:
      return "empty input";
    case ErrorCode::kNumeric:
      return "numeric failure";
    case ErrorCode::kIo:
      return "i/o error";
    case ErrorCode::kExhausted:
      return "all configurations exhausted";
    case ErrorCode::kMismatch:
      return "mismatch";
  }
  return "error";
}

namespace {

std::uint64_t SplitMix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t MixSeed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return SplitMix(SplitMix(SplitMix(a) ^ b) ^ c);
}

std::string FormatDouble(double value) {
  if (value == 0.0) return "0";  // also folds -0
  std::array<char, 64> buf;
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw Error(ErrorCode::kNumeric, "cannot format double");
  return std::string(buf.data(), end);
}

double ParseDouble(const std::string& text, const std::string& context) {
  // from_chars rejects a leading '+', accept it for hand-written files.
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\t' ||
                          last[-1] == '\r')) {
    --last;
  }
  if (first < last && *first == '+') ++first;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last ||
      !std::isfinite(value)) {
    throw Error(ErrorCode::kParse,
                context + ": expected a number, got '" + text + "'");
  }
  return value;
}

long long ParseInt(const std::string& text, const std::string& context) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (last > first && (last[-1] == ' ' || last[-1] == '\r')) --last;
  long long value = 0;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last) {
    throw Error(ErrorCode::kParse,
                context + ": expected an integer, got '" + text + "'");
  }
  return value;
}

}  // namespace cfbo
