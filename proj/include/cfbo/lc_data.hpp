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

// Tabular learning-curve benchmarks.
//
// A task is a finite pool of N hyperparameter configurations together with
// the full learning curve (T epochs) each one would produce. Freeze-thaw
// optimization reveals those curves one epoch at a time. Curves are stored
// normalized to [0,1] with higher meaning better.
//
// On-disk formats (UTF-8, '.' decimal separator):
//
//   CSV:  # lctask v1 name=<s> N=<int> T=<int> dx=<int> [y0=<float>]
//         N lines of dx comma separated config values
//         N lines of T comma separated curve values
//
//   JSON: {"name": s, "configs": [[...]], "curves": [[...]], "y0_bar": f}
//
// When the 0-epoch value is omitted it defaults to the mean of the first
// epoch column.

#ifndef CFBO_LC_DATA_HPP_
#define CFBO_LC_DATA_HPP_

#include <string>
#include <vector>

#include <Eigen/Core>

#include "cfbo/common.hpp"

namespace cfbo {

// Slack allowed around [0,1] before a value is rejected instead of clamped.
inline constexpr double kRangeTolerance = 1e-9;

struct LCTask {
  std::string name;
  RowMatrixXd configs;  // N x dx, each coordinate in [0,1]
  RowMatrixXd curves;   // N x T, curves(n, t - 1) = y_{n,t}
  double y0_bar = 0.0;  // average performance before any training

  int num_configs() const { return static_cast<int>(curves.rows()); }
  int num_epochs() const { return static_cast<int>(curves.cols()); }
  int config_dim() const { return static_cast<int>(configs.cols()); }
};

// Checks shape and range invariants, clamping values that sit within
// kRangeTolerance outside [0,1]. Throws Error on violation.
void ValidateTask(LCTask& task);

enum class TaskFormat { kCsv, kJson };

// .json -> kJson, anything else -> kCsv.
TaskFormat TaskFormatFromPath(const std::string& path);

LCTask LoadTask(const std::string& path, TaskFormat format);
inline LCTask LoadTask(const std::string& path) {
  return LoadTask(path, TaskFormatFromPath(path));
}
LCTask ParseTask(const std::string& contents, TaskFormat format);

// Canonical serialization: shortest round-trip float formatting, one trailing
// newline. Loading and re-serializing a canonical file is byte-identical.
std::string SerializeTask(const LCTask& task, TaskFormat format);
void SaveTask(const LCTask& task, const std::string& path, TaskFormat format);

// Writes `contents` to a sibling temp file and renames it over `path`.
void WriteFileAtomically(const std::string& path, const std::string& contents);
std::string ReadFile(const std::string& path);

enum class Direction { kMaximize, kMinimize };

// Affine min-max map of raw metric values onto [0,1], higher is better.
template <typename Derived>
RowMatrixX<typename Derived::Scalar> NormalizeCurves(
    const Eigen::MatrixBase<Derived>& raw, Direction direction,
    typename Derived::Scalar lo, typename Derived::Scalar hi) {
  using Scalar = typename Derived::Scalar;
  if (!(hi > lo)) {
    throw Error(ErrorCode::kDomain, "NormalizeCurves: degenerate range hi <= lo");
  }
  const Scalar span = hi - lo;
  RowMatrixX<Scalar> out =
      direction == Direction::kMaximize
          ? RowMatrixX<Scalar>((raw.array() - lo) / span)
          : RowMatrixX<Scalar>((hi - raw.array()) / span);
  return out.cwiseMax(Scalar(0)).cwiseMin(Scalar(1));
}

// Shape-aligned tasks sharing one configuration grid.
class LCDatasetCollection {
 public:
  // Throws Error(kShape) unless every task has identical N, T, dx and
  // identical config matrices.
  explicit LCDatasetCollection(std::vector<LCTask> tasks);

  int size() const { return static_cast<int>(tasks_.size()); }
  const LCTask& task(int m) const;
  const std::vector<LCTask>& tasks() const { return tasks_; }
  const RowMatrixXd& configs() const { return tasks_.front().configs; }

 private:
  std::vector<LCTask> tasks_;
};

// Convex combination lambda * a + (1 - lambda) * b of two curve matrices.
template <typename DerivedA, typename DerivedB>
RowMatrixX<typename DerivedA::Scalar> MixCurves(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
    typename DerivedA::Scalar lambda) {
  using Scalar = typename DerivedA::Scalar;
  return lambda * a + (Scalar(1) - lambda) * b;
}

// L' = lambda1 * L^(m) + (1 - lambda1) * L^(m').
RowMatrixXd MixDatasets(const LCDatasetCollection& collection, int m,
                        int m_prime, double lambda1);

struct AugmentedExample {
  VectorXd config;  // x'
  VectorXd curve;   // l'
  double y0_bar = 0.0;
};

// x' = lambda2 * x_n + (1 - lambda2) * x_n', and likewise for the rows of
// `mixed_curves`.
AugmentedExample MixConfigs(const RowMatrixXd& mixed_curves,
                            const RowMatrixXd& configs, int n, int n_prime,
                            double lambda2);

// Draws m, m', lambda1, n, n', lambda2 and composes the two mixups. With a
// single task the dataset stage is skipped. y0_bar is interpolated with
// lambda1.
AugmentedExample SampleAugmented(const LCDatasetCollection& collection,
                                 Rng& rng);

}  // namespace cfbo

#endif  // CFBO_LC_DATA_HPP_
