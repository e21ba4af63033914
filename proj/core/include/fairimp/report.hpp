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

// Report artifacts: report.json, scores.csv, chart.svg and a text summary.
// Every artifact embeds the resolved run config, and all rendering is
// deterministic so identical reports give byte-identical files.

#ifndef FAIRIMP_REPORT_HPP_
#define FAIRIMP_REPORT_HPP_

#include <cstddef>
#include <optional>
#include <string>

#include "fairimp/importance.hpp"

namespace fairimp {

inline constexpr int kReportSchemaVersion = 1;

// Model-level numbers for the baseline model on the evaluation rows.
struct ModelSummary {
  std::optional<double> accuracy;           // 1 - classification error
  std::optional<double> fairness_dp_ratio;  // min/max positive rate
  std::optional<double> dp_difference;
  std::optional<double> mse;                // regression only
  std::optional<double> regression_dp;      // regression only
  std::size_t n_evaluated = 0;
};

struct RunReport {
  int schema_version = kReportSchemaVersion;
  std::string config_json = "{}";
  ModelSummary model;
  ImportanceReport importance;
};

std::string ReportToJson(const RunReport& report);
// Throws ParameterError on malformed input.
RunReport ReportFromJson(const std::string& text);

// One "# config: ..." comment line, then
// feature,fairness_score,accuracy_score,flagged. Flagged scores are empty.
std::string ReportToCsv(const RunReport& report);

// Horizontal bar chart, fairness and accuracy panels, features sorted by
// fairness score ascending (flagged features last).
std::string RenderSvg(const RunReport& report);

// Top-k bias-harming (most negative fairness) and accuracy-driving (largest
// accuracy) features plus the model-level numbers.
std::string RenderSummary(const RunReport& report, std::size_t top = 5);

}  // namespace fairimp

#endif  // FAIRIMP_REPORT_HPP_
