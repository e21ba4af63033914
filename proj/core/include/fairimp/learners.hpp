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

// Built-in learners behind one fit/predict contract.
//
//   ModelSpec spec = ModelSpec::RandomForest();
//   TrainedModel model = Fit(spec, x_train, y_train);
//   std::vector<double> labels = model.predict(x_test);
//
// Fitting is deterministic in (spec.seed, X, y). Forest trees draw from
// per-tree seeds DeriveSeed(seed, kTree, {t}), so the worker count never
// changes a fitted model.

#ifndef FAIRIMP_LEARNERS_HPP_
#define FAIRIMP_LEARNERS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fairimp/dataset.hpp"
#include "fairimp/matrix.hpp"

namespace fairimp {

enum class ModelKind {
  kDecisionTree,
  kRandomForest,
  kLogisticRegression,
  kLinearRegression,
};

// JSON names: decision_tree, random_forest, logistic_regression,
// linear_regression.
const char* ModelKindName(ModelKind kind);
ModelKind ParseModelKind(const std::string& name);

struct TreeParams {
  int max_depth = 0;      // 0 = unlimited
  int min_leaf = 0;       // 0 = task default (1 classification, 5 regression)
  int max_features = 0;   // 0 = kind default (see ResolvedMaxFeatures)
};

struct ForestParams {
  int trees = 100;
  bool bootstrap = true;
};

struct LogisticParams {
  double learning_rate = 0.1;
  int max_iterations = 1000;
  double tolerance = 1e-6;  // stop when the gradient norm drops below
};

struct LinearParams {
  double ridge = 1e-8;
};

struct ModelSpec {
  ModelKind kind = ModelKind::kRandomForest;
  TreeParams tree;
  ForestParams forest;
  LogisticParams logistic;
  LinearParams linear;
  std::uint64_t seed = 0;

  static ModelSpec RandomForest(std::uint64_t seed = 0);
  static ModelSpec DecisionTree(std::uint64_t seed = 0);
  static ModelSpec LogisticRegression();
  static ModelSpec LinearRegression();

  // Accepts {"kind": "random_forest", "trees": 100, "seed": 7, ...} or the
  // preset name "rf". Unknown keys are rejected.
  static ModelSpec FromJsonText(const std::string& text);
  std::string ToJsonText() const;

  // Throws SpecError on out-of-range hyperparameters.
  void Validate() const;

  int ResolvedMinLeaf(Task task) const;
  // Per-split candidate count: DecisionTree uses all features; RandomForest
  // ceil(sqrt(M)) for classification and ceil(M/3) for regression.
  int ResolvedMaxFeatures(Task task, std::size_t n_features) const;

  friend bool operator==(const ModelSpec&, const ModelSpec&);
};

// One CART tree. Children of node p are stored at left and left + 1.
struct TreeNode {
  double value = 0.0;     // threshold for splits, prediction for leaves
  std::int32_t feature = -1;
  std::int32_t left = -1;

  bool is_leaf() const { return feature < 0; }
};

class Tree {
 public:
  Tree() = default;
  explicit Tree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  // Leaf value reached by `row`: class-1 fraction or regression mean.
  double Predict(std::span<const double> row) const {
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) {
      const TreeNode& n = nodes_[i];
      i = static_cast<std::size_t>(n.left) + (row[n.feature] <= n.value ? 0 : 1);
    }
    return nodes_[i].value;
  }

  std::span<const TreeNode> nodes() const { return nodes_; }
  std::size_t depth() const;

 private:
  std::vector<TreeNode> nodes_;
};

// Classification label rules shared by every model:
//   tree: leaf fraction >= 0.5 -> 1;  forest: vote fraction >= 0.5 -> 1.
inline double ScoreToLabel(double score) { return score >= 0.5 ? 1.0 : 0.0; }

class TrainedModel {
 public:
  struct TreeEnsemble {
    std::vector<Tree> trees;
  };
  struct LinearWeights {
    std::vector<double> weights;
    double intercept = 0.0;
  };

  TrainedModel(ModelSpec spec, Task task, std::size_t feature_count,
               std::variant<TreeEnsemble, LinearWeights> state);

  const ModelSpec& spec() const { return spec_; }
  Task task() const { return task_; }
  std::size_t feature_count() const { return feature_count_; }
  const std::variant<TreeEnsemble, LinearWeights>& state() const { return state_; }

  // Hard labels in {0,1} for classification, reals for regression.
  std::vector<double> predict(const Matrix& x) const;
  // Class-1 score in [0, 1]. Throws SpecError for regression models.
  std::vector<double> predict_score(const Matrix& x) const;

 private:
  void CheckShape(const Matrix& x) const;
  std::vector<double> RawOutput(const Matrix& x) const;

  ModelSpec spec_;
  Task task_;
  std::size_t feature_count_;
  std::variant<TreeEnsemble, LinearWeights> state_;
};

// Fits `spec` on (x, y). Forests may fit trees on up to `workers` threads.
TrainedModel Fit(const ModelSpec& spec, const Matrix& x, const Target& y,
                 int workers = 1);

// Process-wide count of Fit calls, for verifying that score extraction does
// no training.
std::uint64_t FitCount();

}  // namespace fairimp

#endif  // FAIRIMP_LEARNERS_HPP_
