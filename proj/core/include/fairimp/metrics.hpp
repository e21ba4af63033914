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

// Bias and loss metrics.
//
// Bias metrics are oriented so 0 is perfectly fair and larger is more biased;
// losses so 0 is perfect. An importance score is always
//   metric(model without feature j) - metric(model with feature j),
// so a negative fairness score marks a feature whose removal reduces bias and
// a positive accuracy score marks a feature whose removal increases loss.
//
// dp_ratio is the one fairness-oriented quantity (1 = parity). It is reported
// as the model-level fairness number and can be selected as a metric, in
// which case the sign reading of fairness scores flips.

#ifndef FAIRIMP_METRICS_HPP_
#define FAIRIMP_METRICS_HPP_

#include <cstddef>
#include <span>
#include <string>

#include "fairimp/dataset.hpp"

namespace fairimp {

enum class MetricKind {
  kDpDifference,
  kDpRatio,
  kDpComplementRatio,
  kRegressionDp,
  kClassificationError,
  kMse,
};

// CLI names: dp_diff, dp_ratio, dp_comp, reg_dp, error, mse.
const char* MetricName(MetricKind kind);
MetricKind ParseMetric(const std::string& name);

bool IsBiasMetric(MetricKind kind);
bool IsLossMetric(MetricKind kind);
// True when larger values mean fairer (dp_ratio only).
bool IsFairnessOriented(MetricKind kind);
bool MetricSupportsTask(MetricKind kind, Task task);

// Default h and loss per task: dp_comp / error, reg_dp / mse.
MetricKind DefaultBiasMetric(Task task);
MetricKind DefaultLossMetric(Task task);

struct MetricValue {
  double value = 0.0;
  MetricKind metric = MetricKind::kDpDifference;
  std::size_t n_evaluated = 0;
  // Distinct groups among evaluated rows; 0 for loss metrics.
  int groups_present = 0;
};

// max_g rate(g) - min_g rate(g) over groups present in z.
double DpDifference(std::span<const double> y_hat, const GroupLabels& z);
// min_g rate(g) / max_g rate(g); 1 when no group has a positive prediction.
double DpRatio(std::span<const double> y_hat, const GroupLabels& z);
// 1 - DpRatio.
double DpComplementRatio(std::span<const double> y_hat, const GroupLabels& z);
// Largest gap between group means of real-valued predictions.
double RegressionDp(std::span<const double> y_hat, const GroupLabels& z);

double ClassificationError(std::span<const double> y,
                           std::span<const double> y_hat);
double Mse(std::span<const double> y, std::span<const double> y_hat);

// h(y, y_hat, z). Bias metrics ignore y; loss metrics ignore z.
MetricValue Evaluate(MetricKind metric, const Target& y,
                     std::span<const double> y_hat, const GroupLabels& z);

}  // namespace fairimp

#endif  // FAIRIMP_METRICS_HPP_
