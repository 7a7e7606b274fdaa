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

#include "cfbo/lc_data.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>

#include "json.hpp"

namespace cfbo {
namespace {

using json = nlohmann::json;

double ClampUnit(double v, const std::string& what) {
  if (!(v >= -kRangeTolerance && v <= 1.0 + kRangeTolerance)) {
    throw Error(ErrorCode::kRange,
                what + " value " + FormatDouble(v) + " outside [0,1]");
  }
  return std::min(1.0, std::max(0.0, v));
}

std::vector<std::string> SplitCommas(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::vector<double> ParseRow(const std::string& line, int line_no) {
  std::vector<double> row;
  for (const std::string& f : SplitCommas(line)) {
    row.push_back(ParseDouble(f, "line " + std::to_string(line_no)));
  }
  return row;
}

RowMatrixXd RowsToMatrix(const std::vector<std::vector<double>>& rows,
                         const char* what) {
  if (rows.empty()) throw Error(ErrorCode::kShape, std::string(what) + ": no rows");
  const size_t cols = rows.front().size();
  RowMatrixXd m(rows.size(), cols);
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) {
      throw Error(ErrorCode::kShape, std::string(what) + ": row " +
                                         std::to_string(i) +
                                         " has a different length");
    }
    for (size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

LCTask ParseCsv(const std::string& contents) {
  std::istringstream in(contents);
  std::string line;
  int line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  };
  if (!next_line() || line.rfind("# lctask v1", 0) != 0) {
    throw Error(ErrorCode::kParse, "missing '# lctask v1' header");
  }
  LCTask task;
  long long n = -1, t = -1, dx = -1;
  bool have_y0 = false;
  std::istringstream header(line.substr(11));
  std::string token;
  while (header >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kParse, "header token without '=': " + token);
    }
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    if (key == "name") {
      task.name = value;
    } else if (key == "N") {
      n = ParseInt(value, "header N");
    } else if (key == "T") {
      t = ParseInt(value, "header T");
    } else if (key == "dx") {
      dx = ParseInt(value, "header dx");
    } else if (key == "y0") {
      task.y0_bar = ParseDouble(value, "header y0");
      have_y0 = true;
    } else {
      throw Error(ErrorCode::kParse, "unknown header key: " + key);
    }
  }
  if (n < 1 || t < 2 || dx < 1) {
    throw Error(ErrorCode::kShape, "header requires N>=1, T>=2, dx>=1");
  }
  std::vector<std::vector<double>> configs, curves;
  for (long long i = 0; i < n; ++i) {
    if (!next_line()) throw Error(ErrorCode::kShape, "truncated config block");
    configs.push_back(ParseRow(line, line_no));
    if (static_cast<long long>(configs.back().size()) != dx) {
      throw Error(ErrorCode::kShape,
                  "line " + std::to_string(line_no) + ": expected " +
                      std::to_string(dx) + " config values");
    }
  }
  for (long long i = 0; i < n; ++i) {
    if (!next_line()) throw Error(ErrorCode::kShape, "truncated curve block");
    curves.push_back(ParseRow(line, line_no));
    if (static_cast<long long>(curves.back().size()) != t) {
      throw Error(ErrorCode::kShape,
                  "line " + std::to_string(line_no) + ": expected " +
                      std::to_string(t) + " curve values");
    }
  }
  if (next_line()) {
    throw Error(ErrorCode::kShape,
                "line " + std::to_string(line_no) + ": unexpected extra row");
  }
  task.configs = RowsToMatrix(configs, "configs");
  task.curves = RowsToMatrix(curves, "curves");
  if (!have_y0) task.y0_bar = task.curves.col(0).mean();
  return task;
}

LCTask ParseJson(const std::string& contents) {
  json doc;
  try {
    doc = json::parse(contents);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("invalid JSON: ") + e.what());
  }
  LCTask task;
  try {
    task.name = doc.at("name").get<std::string>();
    auto configs = doc.at("configs").get<std::vector<std::vector<double>>>();
    auto curves = doc.at("curves").get<std::vector<std::vector<double>>>();
    task.configs = RowsToMatrix(configs, "configs");
    task.curves = RowsToMatrix(curves, "curves");
    if (doc.contains("y0_bar")) {
      task.y0_bar = doc.at("y0_bar").get<double>();
    } else {
      task.y0_bar = task.curves.col(0).mean();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad task JSON: ") + e.what());
  }
  return task;
}

std::string JoinRow(const RowMatrixXd& m, Eigen::Index row) {
  std::string out;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    if (j) out += ',';
    out += FormatDouble(m(row, j));
  }
  return out;
}

}  // namespace

void ValidateTask(LCTask& task) {
  if (task.curves.rows() < 1 || task.curves.cols() < 2) {
    throw Error(ErrorCode::kShape, "task needs N >= 1 and T >= 2");
  }
  if (task.configs.cols() < 1 || task.configs.rows() != task.curves.rows()) {
    throw Error(ErrorCode::kShape,
                "task needs one config row (dx >= 1) per curve");
  }
  if (task.name.empty() ||
      task.name.find_first_of(" \t\r\n,") != std::string::npos) {
    throw Error(ErrorCode::kParse,
                "task name must be non-empty without whitespace or commas");
  }
  for (Eigen::Index i = 0; i < task.curves.size(); ++i) {
    task.curves.data()[i] = ClampUnit(task.curves.data()[i], "curve");
  }
  for (Eigen::Index i = 0; i < task.configs.size(); ++i) {
    task.configs.data()[i] = ClampUnit(task.configs.data()[i], "config");
  }
  task.y0_bar = ClampUnit(task.y0_bar, "y0");
}

TaskFormat TaskFormatFromPath(const std::string& path) {
  return std::filesystem::path(path).extension() == ".json" ? TaskFormat::kJson
                                                             : TaskFormat::kCsv;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFileAtomically(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp);
    out << contents;
    if (!out.flush()) throw Error(ErrorCode::kIo, "cannot write " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot rename " + tmp + " to " + path);
}

LCTask ParseTask(const std::string& contents, TaskFormat format) {
  LCTask task =
      format == TaskFormat::kJson ? ParseJson(contents) : ParseCsv(contents);
  ValidateTask(task);
  return task;
}

LCTask LoadTask(const std::string& path, TaskFormat format) {
  try {
    return ParseTask(ReadFile(path), format);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIo) throw;
    throw Error(e.code(), path + ": " + e.what());
  }
}

std::string SerializeTask(const LCTask& task, TaskFormat format) {
  if (format == TaskFormat::kJson) {
    // Rows are emitted one per line; the number formatting matches the CSV
    // writer so both variants are canonical.
    auto matrix = [](const RowMatrixXd& m) {
      std::string out = "[\n";
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out += "    [" + JoinRow(m, i) + "]";
        out += i + 1 < m.rows() ? ",\n" : "\n";
      }
      return out + "  ]";
    };
    std::string out = "{\n";
    out += "  \"name\": " + json(task.name).dump() + ",\n";
    out += "  \"configs\": " + matrix(task.configs) + ",\n";
    out += "  \"curves\": " + matrix(task.curves) + ",\n";
    out += "  \"y0_bar\": " + FormatDouble(task.y0_bar) + "\n}\n";
    return out;
  }
  std::string out = "# lctask v1 name=" + task.name +
                    " N=" + std::to_string(task.num_configs()) +
                    " T=" + std::to_string(task.num_epochs()) +
                    " dx=" + std::to_string(task.config_dim()) +
                    " y0=" + FormatDouble(task.y0_bar) + "\n";
  for (Eigen::Index i = 0; i < task.configs.rows(); ++i) {
    out += JoinRow(task.configs, i) + "\n";
  }
  for (Eigen::Index i = 0; i < task.curves.rows(); ++i) {
    out += JoinRow(task.curves, i) + "\n";
  }
  return out;
}

void SaveTask(const LCTask& task, const std::string& path, TaskFormat format) {
  WriteFileAtomically(path, SerializeTask(task, format));
}

LCDatasetCollection::LCDatasetCollection(std::vector<LCTask> tasks)
    : tasks_(std::move(tasks)) {
  if (tasks_.empty()) {
    throw Error(ErrorCode::kEmpty, "dataset collection needs at least one task");
  }
  const LCTask& ref = tasks_.front();
  for (const LCTask& t : tasks_) {
    if (t.curves.rows() != ref.curves.rows() ||
        t.curves.cols() != ref.curves.cols() ||
        t.configs.cols() != ref.configs.cols()) {
      throw Error(ErrorCode::kShape,
                  "task " + t.name + " is not shape-aligned with " + ref.name);
    }
    if (t.configs != ref.configs) {
      throw Error(ErrorCode::kShape, "task " + t.name +
                                         " uses a different configuration grid");
    }
  }
}

const LCTask& LCDatasetCollection::task(int m) const {
  if (m < 0 || m >= size()) {
    throw Error(ErrorCode::kIndex, "dataset index " + std::to_string(m));
  }
  return tasks_[m];
}

RowMatrixXd MixDatasets(const LCDatasetCollection& collection, int m,
                        int m_prime, double lambda1) {
  if (!(lambda1 >= 0.0 && lambda1 <= 1.0)) {
    throw Error(ErrorCode::kDomain, "lambda1 must lie in [0,1]");
  }
  // Rounding can push a mix of two 1.0 entries one ulp past the range.
  return MixCurves(collection.task(m).curves, collection.task(m_prime).curves,
                   lambda1)
      .cwiseMax(0.0)
      .cwiseMin(1.0);
}

AugmentedExample MixConfigs(const RowMatrixXd& mixed_curves,
                            const RowMatrixXd& configs, int n, int n_prime,
                            double lambda2) {
  const int rows = static_cast<int>(configs.rows());
  if (n < 0 || n >= rows || n_prime < 0 || n_prime >= rows ||
      mixed_curves.rows() != configs.rows()) {
    throw Error(ErrorCode::kIndex, "configuration index out of range");
  }
  if (!(lambda2 >= 0.0 && lambda2 <= 1.0)) {
    throw Error(ErrorCode::kDomain, "lambda2 must lie in [0,1]");
  }
  AugmentedExample out;
  out.config = (lambda2 * configs.row(n) +
                (1.0 - lambda2) * configs.row(n_prime))
                   .transpose();
  out.curve = (lambda2 * mixed_curves.row(n) +
               (1.0 - lambda2) * mixed_curves.row(n_prime))
                  .transpose()
                  .cwiseMax(0.0)
                  .cwiseMin(1.0);
  return out;
}

AugmentedExample SampleAugmented(const LCDatasetCollection& collection,
                                 Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> pick_task(0, collection.size() - 1);
  std::uniform_int_distribution<int> pick_config(
      0, static_cast<int>(collection.configs().rows()) - 1);

  RowMatrixXd mixed;
  double y0 = collection.task(0).y0_bar;
  if (collection.size() >= 2) {
    const int m = pick_task(rng);
    const int m_prime = pick_task(rng);
    const double lambda1 = unit(rng);
    mixed = MixDatasets(collection, m, m_prime, lambda1);
    y0 = lambda1 * collection.task(m).y0_bar +
         (1.0 - lambda1) * collection.task(m_prime).y0_bar;
  } else {
    mixed = collection.task(0).curves;
  }
  const int n = pick_config(rng);
  const int n_prime = pick_config(rng);
  const double lambda2 = unit(rng);
  AugmentedExample out =
      MixConfigs(mixed, collection.configs(), n, n_prime, lambda2);
  out.y0_bar = y0;
  return out;
}

}  // namespace cfbo
