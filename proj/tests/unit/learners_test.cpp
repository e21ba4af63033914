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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <variant>
#include <vector>

#include "doctest.h"
#include "fairimp/dataset.hpp"
#include "fairimp/errors.hpp"
#include "fairimp/learners.hpp"
#include "fairimp/metrics.hpp"
#include "fairimp/random.hpp"

namespace fairimp {
namespace {

using V = std::vector<double>;

Tree Leaf(double value) { return Tree({TreeNode{value, -1, -1}}); }

TrainedModel VotingForest(const std::vector<double>& leaves) {
  TrainedModel::TreeEnsemble ens;
  for (double v : leaves) ens.trees.push_back(Leaf(v));
  return TrainedModel(ModelSpec::RandomForest(), Task::kClassification, 1, ens);
}

Matrix RandomMatrix(std::size_t n, std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) x(i, j) = rng.Normal();
  }
  return x;
}

SyntheticData Synthetic(Task task, std::uint64_t seed, std::size_t n = 1000) {
  SyntheticParams p;
  p.task = task;
  p.seed = seed;
  p.n_samples = n;
  return GenerateSynthetic(p);
}

TEST_CASE("ModelSpec JSON parsing and validation") {
  const ModelSpec s = ModelSpec::FromJsonText(R"({"kind": "random_forest", "trees": 100, "seed": 7})");
  CHECK(s.kind == ModelKind::kRandomForest);
  CHECK(s.forest.trees == 100);
  CHECK(s.seed == 7);
  CHECK(ModelSpec::FromJsonText(s.ToJsonText()) == s);
  CHECK(ModelSpec::FromJsonText("rf") == ModelSpec::RandomForest());
  CHECK_THROWS_AS(ModelSpec::FromJsonText(R"({"kind": "random_forest", "depth": 3})"), SpecError);
  CHECK_THROWS_AS(ModelSpec::FromJsonText(R"({"kind": "boosting"})"), SpecError);
  CHECK_THROWS_AS(ModelSpec::FromJsonText(R"({"kind": "random_forest", "trees": 0})"), SpecError);
  CHECK_THROWS_AS(ModelSpec::FromJsonText(R"({"kind": "decision_tree", "max_depth": -1})"),
                  SpecError);
  CHECK_THROWS_AS(
      ModelSpec::FromJsonText(R"({"kind": "logistic_regression", "learning_rate": 0})"),
      SpecError);
  CHECK_THROWS_AS(ModelSpec::FromJsonText(R"({"kind": "random_forest", "trees": "x"})"),
                  SpecError);
  CHECK_THROWS_AS(ModelSpec::FromJsonText("forest"), SpecError);
}

TEST_CASE("ModelSpec resolved defaults") {
  const ModelSpec rf = ModelSpec::RandomForest();
  CHECK(rf.forest.trees == 100);
  CHECK(rf.forest.bootstrap);
  CHECK(rf.tree.max_depth == 0);
  CHECK(rf.ResolvedMinLeaf(Task::kClassification) == 1);
  CHECK(rf.ResolvedMinLeaf(Task::kRegression) == 5);
  CHECK(rf.ResolvedMaxFeatures(Task::kClassification, 96) == 10);
  CHECK(rf.ResolvedMaxFeatures(Task::kClassification, 10) == 4);
  CHECK(rf.ResolvedMaxFeatures(Task::kRegression, 10) == 4);
  CHECK(rf.ResolvedMaxFeatures(Task::kRegression, 9) == 3);
  CHECK(ModelSpec::DecisionTree().ResolvedMaxFeatures(Task::kClassification, 96) == 96);
}

TEST_CASE("LinearRegression recovers an exact line") {
  Matrix x(50, 1);
  V y(50);
  for (std::size_t i = 0; i < 50; ++i) {
    x(i, 0) = static_cast<double>(i) / 7.0 - 3.0;
    y[i] = 2.0 * x(i, 0) + 1.0;
  }
  const auto model = Fit(ModelSpec::LinearRegression(), x, Target(Task::kRegression, y));
  const auto& w = std::get<TrainedModel::LinearWeights>(model.state());
  CHECK(std::abs(w.weights[0] - 2.0) < 1e-8);
  CHECK(std::abs(w.intercept - 1.0) < 1e-8);
}

TEST_CASE("LinearRegression tolerates duplicated one-hot blocks") {
  Matrix x(40, 3);
  V y(40);
  for (std::size_t i = 0; i < 40; ++i) {
    x(i, 0) = i % 2;
    x(i, 1) = 1 - (i % 2);
    x(i, 2) = static_cast<double>(i);
    y[i] = 3.0 * x(i, 0) + 0.5 * x(i, 2);
  }
  const auto model = Fit(ModelSpec::LinearRegression(), x, Target(Task::kRegression, y));
  const auto pred = model.predict(x);
  for (std::size_t i = 0; i < 40; ++i) CHECK(pred[i] == doctest::Approx(y[i]).epsilon(1e-6));
}

TEST_CASE("DecisionTree reaches purity on separable data") {
  const Matrix x{{0.1, 5}, {0.2, 3}, {0.3, 9}, {0.7, 1}, {0.8, 4}, {0.9, 2}};
  const V y{0, 0, 0, 1, 1, 1};
  const auto model = Fit(ModelSpec::DecisionTree(), x, Target(Task::kClassification, y));
  CHECK(model.predict(x) == y);
  const auto& ens = std::get<TrainedModel::TreeEnsemble>(model.state());
  REQUIRE(ens.trees.size() == 1);
  CHECK(ens.trees[0].nodes()[0].feature == 0);
  CHECK(ens.trees[0].nodes()[0].value == doctest::Approx(0.5));
}

TEST_CASE("Tree split ties go to the lowest feature index") {
  Matrix x(8, 3);
  V y(8);
  for (std::size_t i = 0; i < 8; ++i) {
    x(i, 0) = static_cast<double>(i % 3);
    x(i, 1) = i < 4 ? 0.0 : 1.0;
    x(i, 2) = i < 4 ? 0.0 : 1.0;
    y[i] = i < 4 ? 0.0 : 1.0;
  }
  const auto model = Fit(ModelSpec::DecisionTree(), x, Target(Task::kClassification, y));
  const auto& tree = std::get<TrainedModel::TreeEnsemble>(model.state()).trees[0];
  CHECK(tree.nodes()[0].feature == 1);
  CHECK(tree.nodes().size() == 3);
}

TEST_CASE("max_depth and min_leaf limit growth") {
  const auto data = Synthetic(Task::kRegression, 2, 300);
  ModelSpec spec = ModelSpec::DecisionTree();
  spec.tree.max_depth = 2;
  const auto shallow = Fit(spec, data.dataset.features, data.dataset.target);
  CHECK(std::get<TrainedModel::TreeEnsemble>(shallow.state()).trees[0].depth() == 2);
  spec.tree.max_depth = 0;
  spec.tree.min_leaf = 40;
  const auto coarse = Fit(spec, data.dataset.features, data.dataset.target);
  const auto pred = coarse.predict(data.dataset.features);
  std::vector<double> distinct(pred);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  CHECK(distinct.size() <= 300 / 40);
}

TEST_CASE("single-class targets give constant predictors") {
  const Matrix x = RandomMatrix(20, 3, 1);
  for (double label : {0.0, 1.0}) {
    const Target y(Task::kClassification, V(20, label));
    for (const ModelSpec& spec : {ModelSpec::DecisionTree(), ModelSpec::RandomForest(),
                                  ModelSpec::LogisticRegression()}) {
      const auto pred = Fit(spec, x, y).predict(RandomMatrix(15, 3, 2));
      CHECK(std::all_of(pred.begin(), pred.end(), [&](double v) { return v == label; }));
    }
  }
}

TEST_CASE("forest votes and scores") {
  const Matrix row{{0.0}};
  CHECK(VotingForest({1, 1, 0}).predict(row) == V{1});
  CHECK(VotingForest({1, 1, 1}).predict_score(row) == V{1.0});
  CHECK(VotingForest({1, 0, 0, 1}).predict_score(row) == V{0.5});
  CHECK(VotingForest({1, 0, 0, 1}).predict(row) == V{1});
  CHECK(VotingForest({0.6, 0.4, 0.4}).predict(row) == V{0});
}

TEST_CASE("logistic regression with zero weights scores one half") {
  TrainedModel::LinearWeights w;
  w.weights = {0.0, 0.0};
  const TrainedModel model(ModelSpec::LogisticRegression(), Task::kClassification, 2, w);
  CHECK(model.predict_score(RandomMatrix(4, 2, 3)) == V(4, 0.5));
  CHECK(model.predict(RandomMatrix(4, 2, 3)) == V(4, 1.0));
}

TEST_CASE("logistic regression separates a clear signal") {
  const auto data = Synthetic(Task::kClassification, 8, 400);
  const auto model = Fit(ModelSpec::LogisticRegression(), data.dataset.features, data.dataset.target);
  const auto pred = model.predict(data.dataset.features);
  CHECK(ClassificationError(data.dataset.target.values(), pred) < 0.1);
}

TEST_CASE("learner and task compatibility errors") {
  const Matrix x = RandomMatrix(10, 2, 4);
  const Target cls(Task::kClassification, V{0, 1, 0, 1, 0, 1, 0, 1, 0, 1});
  const Target reg(Task::kRegression, V(10, 0.5));
  CHECK_THROWS_AS(Fit(ModelSpec::LinearRegression(), x, cls), SpecError);
  CHECK_THROWS_AS(Fit(ModelSpec::LogisticRegression(), x, reg), SpecError);
  const auto model = Fit(ModelSpec::DecisionTree(), x, reg);
  CHECK_THROWS_AS(model.predict_score(x), SpecError);
  CHECK_THROWS_AS(model.predict(RandomMatrix(3, 3, 5)), ShapeError);
  CHECK_THROWS_AS(Fit(ModelSpec::DecisionTree(), RandomMatrix(9, 2, 1), cls), ShapeError);
}

TEST_CASE("random forest test error on the synthetic benchmark") {
  // A reference forest implementation reaches at most 0.125 over ten seeds.
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto data = Synthetic(Task::kClassification, seed);
    const auto pair = Split(data.dataset, 0.2, seed);
    const auto model = Fit(ModelSpec::RandomForest(seed), pair.train.features, pair.train.target);
    CHECK(ClassificationError(pair.test.target.values(), model.predict(pair.test.features)) < 0.25);
  }
}

TEST_CASE("fitting is deterministic and worker-count independent") {
  for (Task task : {Task::kClassification, Task::kRegression}) {
    const auto data = Synthetic(task, 5, 300);
    const ModelSpec spec = ModelSpec::RandomForest(9);
    const Matrix probe = RandomMatrix(50, 10, 6);
    const auto a = Fit(spec, data.dataset.features, data.dataset.target, 1).predict(probe);
    const auto b = Fit(spec, data.dataset.features, data.dataset.target, 1).predict(probe);
    const auto c = Fit(spec, data.dataset.features, data.dataset.target, 4).predict(probe);
    CHECK(a == b);
    CHECK(a == c);
  }
}

TEST_CASE("linear learners are invariant to row order") {
  for (Task task : {Task::kClassification, Task::kRegression}) {
    const auto data = Synthetic(task, 12, 200);
    const ModelSpec spec =
        task == Task::kClassification ? ModelSpec::LogisticRegression() : ModelSpec::LinearRegression();
    const auto order = Rng(3).Permutation(200);
    const Dataset shuffled = data.dataset.select_rows(order);
    const Matrix probe = RandomMatrix(40, 10, 7);
    const auto a = Fit(spec, data.dataset.features, data.dataset.target);
    const auto b = Fit(spec, shuffled.features, shuffled.target);
    const auto pa = task == Task::kClassification ? a.predict_score(probe) : a.predict(probe);
    const auto pb = task == Task::kClassification ? b.predict_score(probe) : b.predict(probe);
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(std::abs(pa[i] - pb[i]) < 1e-8);
  }
}

TEST_CASE("one-tree forest without bootstrap equals a decision tree") {
  for (Task task : {Task::kClassification, Task::kRegression}) {
    const auto data = Synthetic(task, 21, 300);
    ModelSpec forest = ModelSpec::RandomForest(4);
    forest.forest.trees = 1;
    forest.forest.bootstrap = false;
    forest.tree.max_features = 3;
    ModelSpec tree = ModelSpec::DecisionTree(4);
    tree.tree.max_features = 3;
    const Matrix probe = RandomMatrix(100, 10, 8);
    const auto a = Fit(forest, data.dataset.features, data.dataset.target);
    const auto b = Fit(tree, data.dataset.features, data.dataset.target);
    CHECK(a.predict(probe) == b.predict(probe));
    if (task == Task::kClassification) CHECK(a.predict_score(probe) == b.predict_score(probe));
  }
}

TEST_CASE("predict_score thresholded at one half equals predict") {
  const auto data = Synthetic(Task::kClassification, 30, 300);
  const Matrix probe = RandomMatrix(200, 10, 9);
  for (const ModelSpec& spec : {ModelSpec::DecisionTree(1), ModelSpec::RandomForest(1),
                                ModelSpec::LogisticRegression()}) {
    ModelSpec s = spec;
    s.tree.min_leaf = 3;
    const auto model = Fit(s, data.dataset.features, data.dataset.target);
    const auto score = model.predict_score(probe);
    const auto label = model.predict(probe);
    for (std::size_t i = 0; i < score.size(); ++i) {
      CHECK(score[i] >= 0.0);
      CHECK(score[i] <= 1.0);
      CHECK(ScoreToLabel(score[i]) == label[i]);
    }
  }
}

TEST_CASE("regression forest predicts the mean of its trees") {
  const auto data = Synthetic(Task::kRegression, 31, 200);
  ModelSpec spec = ModelSpec::RandomForest(2);
  spec.forest.trees = 7;
  const auto model = Fit(spec, data.dataset.features, data.dataset.target);
  const Matrix probe = RandomMatrix(20, 10, 10);
  const auto pred = model.predict(probe);
  const auto& trees = std::get<TrainedModel::TreeEnsemble>(model.state()).trees;
  for (std::size_t i = 0; i < probe.rows(); ++i) {
    double sum = 0.0;
    for (const auto& t : trees) sum += t.Predict(probe.row(i));
    CHECK(pred[i] == doctest::Approx(sum / 7.0).epsilon(1e-12));
  }
}

TEST_CASE("fit counter counts every fit") {
  const auto before = FitCount();
  const Matrix x = RandomMatrix(10, 2, 11);
  Fit(ModelSpec::LinearRegression(), x, Target(Task::kRegression, V(10, 1.0)));
  Fit(ModelSpec::DecisionTree(), x, Target(Task::kRegression, V(10, 1.0)));
  CHECK(FitCount() - before == 2);
}

}  // namespace
}  // namespace fairimp
