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

#include "fairimp/metrics.hpp"

#include <algorithm>
#include <limits>
#include <vector>

#include "fairimp/errors.hpp"

namespace fairimp {

const char* MetricName(MetricKind kind) {
  switch (kind) {
    case MetricKind::kDpDifference: return "dp_diff";
    case MetricKind::kDpRatio: return "dp_ratio";
    case MetricKind::kDpComplementRatio: return "dp_comp";
    case MetricKind::kRegressionDp: return "reg_dp";
    case MetricKind::kClassificationError: return "error";
    case MetricKind::kMse: return "mse";
  }
  return "?";
}

MetricKind ParseMetric(const std::string& name) {
  for (auto k : {MetricKind::kDpDifference, MetricKind::kDpRatio,
                 MetricKind::kDpComplementRatio, MetricKind::kRegressionDp,
                 MetricKind::kClassificationError, MetricKind::kMse}) {
    if (name == MetricName(k)) return k;
  }
  throw MetricError("unknown metric '" + name + "'");
}

bool IsLossMetric(MetricKind kind) {
  return kind == MetricKind::kClassificationError || kind == MetricKind::kMse;
}

bool IsBiasMetric(MetricKind kind) { return !IsLossMetric(kind); }

bool IsFairnessOriented(MetricKind kind) { return kind == MetricKind::kDpRatio; }

bool MetricSupportsTask(MetricKind kind, Task task) {
  switch (kind) {
    case MetricKind::kRegressionDp:
    case MetricKind::kMse:
      return task == Task::kRegression;
    default:
      return task == Task::kClassification;
  }
}

MetricKind DefaultBiasMetric(Task task) {
  return task == Task::kClassification ? MetricKind::kDpComplementRatio
                                       : MetricKind::kRegressionDp;
}

MetricKind DefaultLossMetric(Task task) {
  return task == Task::kClassification ? MetricKind::kClassificationError
                                       : MetricKind::kMse;
}

namespace {

// Per-group means of y_hat, for groups that occur.
std::vector<double> GroupMeans(std::span<const double> y_hat,
                               const GroupLabels& z) {
  if (y_hat.size() != z.size()) {
    throw ShapeError("predictions and group labels differ in length");
  }
  const auto g = static_cast<std::size_t>(z.group_count());
  std::vector<double> sum(g + 1, 0.0);
  std::vector<std::size_t> count(g + 1, 0);
  for (std::size_t i = 0; i < y_hat.size(); ++i) {
    sum[z[i]] += y_hat[i];
    ++count[z[i]];
  }
  std::vector<double> means;
  for (std::size_t k = 1; k <= g; ++k) {
    if (count[k] > 0) means.push_back(sum[k] / static_cast<double>(count[k]));
  }
  if (means.size() < 2) {
    throw GroupError("bias metric needs >= 2 groups among evaluated rows, got " +
                     std::to_string(means.size()));
  }
  return means;
}

void CheckLengths(std::span<const double> y, std::span<const double> y_hat) {
  if (y.size() != y_hat.size()) {
    throw ShapeError("targets and predictions differ in length");
  }
  if (y.empty()) throw ShapeError("no rows to evaluate");
}

}  // namespace

double DpDifference(std::span<const double> y_hat, const GroupLabels& z) {
  const auto rates = GroupMeans(y_hat, z);
  const auto [lo, hi] = std::minmax_element(rates.begin(), rates.end());
  return *hi - *lo;
}

double DpRatio(std::span<const double> y_hat, const GroupLabels& z) {
  const auto rates = GroupMeans(y_hat, z);
  const auto [lo, hi] = std::minmax_element(rates.begin(), rates.end());
  if (*hi == 0.0) return 1.0;
  return *lo / *hi;
}

double DpComplementRatio(std::span<const double> y_hat, const GroupLabels& z) {
  return 1.0 - DpRatio(y_hat, z);
}

double RegressionDp(std::span<const double> y_hat, const GroupLabels& z) {
  // The largest pairwise gap is max - min.
  const auto means = GroupMeans(y_hat, z);
  const auto [lo, hi] = std::minmax_element(means.begin(), means.end());
  return *hi - *lo;
}

double ClassificationError(std::span<const double> y,
                           std::span<const double> y_hat) {
  CheckLengths(y, y_hat);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < y.size(); ++i) wrong += (y[i] != y_hat[i]);
  return static_cast<double>(wrong) / static_cast<double>(y.size());
}

double Mse(std::span<const double> y, std::span<const double> y_hat) {
  CheckLengths(y, y_hat);
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = y[i] - y_hat[i];
    acc += r * r;
  }
  return acc / static_cast<double>(y.size());
}

MetricValue Evaluate(MetricKind metric, const Target& y,
                     std::span<const double> y_hat, const GroupLabels& z) {
  if (!MetricSupportsTask(metric, y.kind())) {
    throw MetricError(std::string("metric '") + MetricName(metric) +
                      "' does not apply to " + TaskName(y.kind()) + " targets");
  }
  if (y.size() != y_hat.size() || z.size() != y_hat.size()) {
    throw ShapeError("y, y_hat and z must have equal lengths");
  }
  MetricValue out;
  out.metric = metric;
  out.n_evaluated = y_hat.size();
  switch (metric) {
    case MetricKind::kDpDifference: out.value = DpDifference(y_hat, z); break;
    case MetricKind::kDpRatio: out.value = DpRatio(y_hat, z); break;
    case MetricKind::kDpComplementRatio: out.value = DpComplementRatio(y_hat, z); break;
    case MetricKind::kRegressionDp: out.value = RegressionDp(y_hat, z); break;
    case MetricKind::kClassificationError: out.value = ClassificationError(y.values(), y_hat); break;
    case MetricKind::kMse: out.value = Mse(y.values(), y_hat); break;
  }
  if (IsBiasMetric(metric)) out.groups_present = z.groups_present();
  return out;
}

}  // namespace fairimp
