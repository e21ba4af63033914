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

// CART growth on pre-binned columns. Internal to the learners module.

#ifndef FAIRIMP_SRC_TREE_BUILDER_HPP_
#define FAIRIMP_SRC_TREE_BUILDER_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "fairimp/dataset.hpp"
#include "fairimp/learners.hpp"
#include "fairimp/matrix.hpp"
#include "fairimp/random.hpp"

namespace fairimp::internal {

// Each feature's sorted distinct values plus every row's index into them.
// Built once per Fit and shared read-only by all trees.
struct BinnedColumns {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::vector<double>> levels;
  std::vector<std::uint32_t> bins;  // column-major, bins[f * rows + i]

  static BinnedColumns Build(const Matrix& x);

  std::span<const std::uint32_t> column(std::size_t f) const {
    return {bins.data() + f * rows, rows};
  }
};

struct TreeConfig {
  Task task = Task::kClassification;
  int min_leaf = 1;
  int max_depth = 0;
  int max_features = 0;
};

class TreeBuilder {
 public:
  TreeBuilder(const BinnedColumns& columns, std::span<const double> y,
              const TreeConfig& config);

  // Grows one tree on `samples` (row indices, duplicates allowed). Duplicates
  // are collapsed into integer row weights.
  Tree Build(const std::vector<std::uint32_t>& samples, Rng& rng);

 private:
  struct Candidate {
    bool found = false;
    double score = 0.0;
    int feature = -1;
    std::uint32_t left_bin = 0;   // last bin sent left
    std::uint32_t right_bin = 0;  // first bin sent right
  };

  // Returns false when the feature is constant over the node.
  bool EvaluateFeature(int feature, std::span<const std::uint32_t> samples,
                       double total_count, double total_sum, Candidate& best);
  double SideScore(double count, double sum) const;

  const BinnedColumns& columns_;
  std::span<const double> y_;
  TreeConfig config_;
  std::vector<int> feature_order_;
  std::vector<double> bin_count_;
  std::vector<double> bin_sum_;
  std::vector<double> weight_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> sort_buffer_;
  struct Run {
    std::uint32_t bin;
    double count;
    double sum;
  };
  std::vector<Run> runs_;
};

}  // namespace fairimp::internal

#endif  // FAIRIMP_SRC_TREE_BUILDER_HPP_
