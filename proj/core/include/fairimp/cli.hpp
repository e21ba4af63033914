// Copyright 2026 The fairimp Authors.
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

// Command-line surface: `simulate`, `importance` and `report`.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 compute
// error (for example every minipatch skipped).
//
// Seed derivations from the single --seed S:
//   synthetic data       GenerateSynthetic(seed = S)
//   train/test split     Split(seed = DeriveSeed(S, kSplit))
//   model (if unseeded)  DeriveSeed(S, kModel)
//   permutations         DeriveSeed(S, kPermuteTrain|kPermuteEval, {j, r})
//   minipatches          DeriveSeed(S, kPatch, {k})

#ifndef FAIRIMP_CLI_HPP_
#define FAIRIMP_CLI_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fairimp/dataset.hpp"
#include "fairimp/errors.hpp"
#include "fairimp/importance.hpp"
#include "fairimp/learners.hpp"
#include "fairimp/metrics.hpp"
#include "fairimp/report.hpp"

namespace fairimp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitCompute = 4;

int ExitCodeFor(ErrorCategory category);

// Fully resolved settings of one `importance` run. Serialized into every
// artifact; ParseRunConfig(ToJson()) reproduces the run exactly.
struct RunConfig {
  // Dataset: a file plus schema, or the synthetic generator when data_path
  // is empty.
  std::string data_path;
  std::optional<SchemaConfig> schema;
  Task task = Task::kClassification;
  std::size_t n_samples = 1000;
  std::size_t n_features = 10;

  ModelSpec model = ModelSpec::RandomForest();
  Method method = Method::kOcclusionMinipatch;
  MetricKind bias_metric = MetricKind::kDpComplementRatio;
  MetricKind loss_metric = MetricKind::kClassificationError;
  double split = 0.2;
  bool in_sample = false;
  std::uint64_t seed = 0;
  int repetitions = 10;
  bool refit = true;
  double n_frac = 0.2;
  double m_frac = 0.2;
  std::size_t patches = 2000;
  // Row subsample applied after loading (0 = all rows); for quick profiles.
  std::size_t max_rows = 0;

  std::string ToJson() const;
  static RunConfig FromJson(const std::string& text);
};

Dataset LoadRunDataset(const RunConfig& config);

// Runs the configured importance computation. The worker count never changes
// the result.
RunReport RunImportance(const RunConfig& config, int workers = 1);

// Writes report.json, scores.csv and (optionally) chart.svg into out_dir.
void WriteArtifacts(const RunReport& report, const std::filesystem::path& out_dir,
                    bool svg = true);

struct SimulateConfig {
  SyntheticParams params;
  std::filesystem::path out = "synthetic.csv";
};

// Writes <out>, <stem>.truth.json and <stem>.schema.json.
void RunSimulate(const SimulateConfig& config);

// Entry point behind the `fairimp` binary. args excludes the program name.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace fairimp::cli

#endif  // FAIRIMP_CLI_HPP_
