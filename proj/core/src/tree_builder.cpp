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

#include "tree_builder.hpp"

#include <algorithm>
#include <numeric>

namespace fairimp::internal {

BinnedColumns BinnedColumns::Build(const Matrix& x) {
  BinnedColumns out;
  out.rows = x.rows();
  out.cols = x.cols();
  out.levels.resize(out.cols);
  out.bins.resize(out.rows * out.cols);
  std::vector<std::pair<double, std::uint32_t>> pairs(out.rows);
  for (std::size_t f = 0; f < out.cols; ++f) {
    for (std::size_t i = 0; i < out.rows; ++i) {
      pairs[i] = {x(i, f), static_cast<std::uint32_t>(i)};
    }
    std::sort(pairs.begin(), pairs.end());
    auto& levels = out.levels[f];
    std::uint32_t* bins = out.bins.data() + f * out.rows;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      if (k == 0 || pairs[k].first != pairs[k - 1].first) {
        levels.push_back(pairs[k].first);
      }
      bins[pairs[k].second] = static_cast<std::uint32_t>(levels.size() - 1);
    }
  }
  return out;
}

TreeBuilder::TreeBuilder(const BinnedColumns& columns, std::span<const double> y,
                         const TreeConfig& config)
    : columns_(columns), y_(y), config_(config) {
  feature_order_.resize(columns.cols);
  std::iota(feature_order_.begin(), feature_order_.end(), 0);
  std::size_t widest = 0;
  for (const auto& l : columns.levels) widest = std::max(widest, l.size());
  bin_count_.assign(widest, 0.0);
  bin_sum_.assign(widest, 0.0);
}

double TreeBuilder::SideScore(double count, double sum) const {
  // Larger is better. Classification: n * (1 - gini) = (p^2 + q^2) / n.
  // Regression: the variance-reduction term sum^2 / n.
  if (config_.task == Task::kClassification) {
    const double neg = count - sum;
    return (sum * sum + neg * neg) / count;
  }
  return sum * sum / count;
}

bool TreeBuilder::EvaluateFeature(int feature,
                                  std::span<const std::uint32_t> samples,
                                  double total_count, double total_sum,
                                  Candidate& best) {
  const auto bins = columns_.column(static_cast<std::size_t>(feature));
  const std::size_t levels = columns_.levels[feature].size();
  runs_.clear();

  // Dense counting when the level count is comparable to the node size,
  // otherwise sort the node's (bin, y) pairs. Both yield identical runs.
  if (levels <= 8 * samples.size()) {
    std::uint32_t lo = UINT32_MAX;
    std::uint32_t hi = 0;
    for (std::uint32_t s : samples) {
      const std::uint32_t b = bins[s];
      bin_count_[b] += weight_[s];
      bin_sum_[b] += weight_[s] * y_[s];
      lo = std::min(lo, b);
      hi = std::max(hi, b);
    }
    for (std::uint32_t b = lo; b <= hi; ++b) {
      if (bin_count_[b] > 0.0) {
        runs_.push_back({b, bin_count_[b], bin_sum_[b]});
        bin_count_[b] = 0.0;
        bin_sum_[b] = 0.0;
      }
    }
  } else {
    sort_buffer_.clear();
    for (std::uint32_t s : samples) sort_buffer_.emplace_back(bins[s], s);
    std::sort(sort_buffer_.begin(), sort_buffer_.end());
    for (const auto& [b, s] : sort_buffer_) {
      if (runs_.empty() || runs_.back().bin != b) runs_.push_back({b, 0.0, 0.0});
      runs_.back().count += weight_[s];
      runs_.back().sum += weight_[s] * y_[s];
    }
  }
  if (runs_.size() < 2) return false;

  const double min_leaf = config_.min_leaf;
  double left_count = 0.0;
  double left_sum = 0.0;
  for (std::size_t k = 0; k + 1 < runs_.size(); ++k) {
    left_count += runs_[k].count;
    left_sum += runs_[k].sum;
    const double right_count = total_count - left_count;
    if (left_count < min_leaf) continue;
    if (right_count < min_leaf) break;
    const double score =
        SideScore(left_count, left_sum) + SideScore(right_count, total_sum - left_sum);
    // Ties go to the lower feature index, then the lower threshold.
    if (!best.found || score > best.score ||
        (score == best.score && feature < best.feature)) {
      best.found = true;
      best.score = score;
      best.feature = feature;
      best.left_bin = runs_[k].bin;
      best.right_bin = runs_[k + 1].bin;
    }
  }
  return true;
}

Tree TreeBuilder::Build(const std::vector<std::uint32_t>& drawn, Rng& rng) {
  struct Pending {
    std::size_t node;
    std::size_t begin;
    std::size_t end;
    int depth;
  };
  weight_.assign(columns_.rows, 0.0);
  for (std::uint32_t s : drawn) weight_[s] += 1.0;
  std::vector<std::uint32_t> samples;
  samples.reserve(drawn.size());
  for (std::uint32_t s = 0; s < columns_.rows; ++s) {
    if (weight_[s] > 0.0) samples.push_back(s);
  }

  std::vector<TreeNode> nodes(1);
  std::vector<Pending> stack{{0, 0, samples.size(), 0}};
  const int n_features = static_cast<int>(columns_.cols);
  const int max_features = std::clamp(config_.max_features, 1, std::max(1, n_features));

  while (!stack.empty()) {
    const Pending cur = stack.back();
    stack.pop_back();
    std::span<std::uint32_t> span(samples.data() + cur.begin, cur.end - cur.begin);

    double count = 0.0;
    double sum = 0.0;
    double y_min = y_[span.front()];
    double y_max = y_min;
    for (std::uint32_t s : span) {
      count += weight_[s];
      sum += weight_[s] * y_[s];
      y_min = std::min(y_min, y_[s]);
      y_max = std::max(y_max, y_[s]);
    }
    nodes[cur.node].value = sum / count;

    const bool depth_exhausted = config_.max_depth > 0 && cur.depth >= config_.max_depth;
    if (depth_exhausted || y_min == y_max || count < 2.0 * config_.min_leaf) continue;

    // Draw candidates until max_features non-constant ones were examined.
    Candidate best;
    int examined = 0;
    if (max_features >= n_features) {
      for (int f = 0; f < n_features; ++f) {
        EvaluateFeature(f, span, count, sum, best);
      }
    } else {
      for (int k = 0; k < n_features && examined < max_features; ++k) {
        const int pick = k + static_cast<int>(rng.Below(static_cast<std::uint64_t>(n_features - k)));
        std::swap(feature_order_[k], feature_order_[pick]);
        if (EvaluateFeature(feature_order_[k], span, count, sum, best)) ++examined;
      }
    }
    if (!best.found) continue;

    const auto& levels = columns_.levels[best.feature];
    const double lo = levels[best.left_bin];
    const double hi = levels[best.right_bin];
    double threshold = lo + (hi - lo) / 2.0;
    if (!(threshold >= lo && threshold < hi)) threshold = lo;

    const auto bins = columns_.column(static_cast<std::size_t>(best.feature));
    const std::uint32_t split_bin = best.left_bin;
    const auto mid = std::partition(span.begin(), span.end(),
                                    [&](std::uint32_t s) { return bins[s] <= split_bin; });
    const std::size_t left_size = static_cast<std::size_t>(mid - span.begin());

    const auto left = static_cast<std::int32_t>(nodes.size());
    nodes[cur.node].feature = best.feature;
    nodes[cur.node].value = threshold;
    nodes[cur.node].left = left;
    nodes.emplace_back();
    nodes.emplace_back();
    stack.push_back({static_cast<std::size_t>(left) + 1, cur.begin + left_size, cur.end, cur.depth + 1});
    stack.push_back({static_cast<std::size_t>(left), cur.begin, cur.begin + left_size, cur.depth + 1});
  }
  return Tree(std::move(nodes));
}

}  // namespace fairimp::internal
