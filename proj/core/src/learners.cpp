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

#include "fairimp/learners.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <set>

#include "fairimp/errors.hpp"
#include "fairimp/parallel.hpp"
#include "fairimp/random.hpp"
#include "json.hpp"
#include "tree_builder.hpp"

namespace fairimp {

namespace {

std::atomic<std::uint64_t> g_fit_count{0};

double Sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

}  // namespace

std::uint64_t FitCount() { return g_fit_count.load(); }

const char* ModelKindName(ModelKind kind) {
  switch (kind) {
    case ModelKind::kDecisionTree: return "decision_tree";
    case ModelKind::kRandomForest: return "random_forest";
    case ModelKind::kLogisticRegression: return "logistic_regression";
    case ModelKind::kLinearRegression: return "linear_regression";
  }
  return "?";
}

ModelKind ParseModelKind(const std::string& name) {
  for (auto k : {ModelKind::kDecisionTree, ModelKind::kRandomForest,
                 ModelKind::kLogisticRegression, ModelKind::kLinearRegression}) {
    if (name == ModelKindName(k)) return k;
  }
  throw SpecError("unknown model kind '" + name + "'");
}

// ---------------------------------------------------------------------------
// ModelSpec

ModelSpec ModelSpec::RandomForest(std::uint64_t seed) {
  ModelSpec s;
  s.kind = ModelKind::kRandomForest;
  s.seed = seed;
  return s;
}

ModelSpec ModelSpec::DecisionTree(std::uint64_t seed) {
  ModelSpec s;
  s.kind = ModelKind::kDecisionTree;
  s.seed = seed;
  return s;
}

ModelSpec ModelSpec::LogisticRegression() {
  ModelSpec s;
  s.kind = ModelKind::kLogisticRegression;
  return s;
}

ModelSpec ModelSpec::LinearRegression() {
  ModelSpec s;
  s.kind = ModelKind::kLinearRegression;
  return s;
}

bool operator==(const ModelSpec& a, const ModelSpec& b) {
  return a.ToJsonText() == b.ToJsonText();
}

void ModelSpec::Validate() const {
  if (tree.max_depth < 0) throw SpecError("max_depth must be >= 0 (0 = unlimited)");
  if (tree.min_leaf < 0) throw SpecError("min_leaf must be >= 1 (0 = default)");
  if (tree.max_features < 0) throw SpecError("max_features must be >= 1 (0 = default)");
  if (forest.trees < 1) throw SpecError("forest needs at least 1 tree");
  if (!(logistic.learning_rate > 0.0)) throw SpecError("learning_rate must be > 0");
  if (logistic.max_iterations < 1) throw SpecError("max_iterations must be >= 1");
  if (!(logistic.tolerance >= 0.0)) throw SpecError("tolerance must be >= 0");
  if (!(linear.ridge >= 0.0)) throw SpecError("ridge must be >= 0");
}

int ModelSpec::ResolvedMinLeaf(Task task) const {
  if (tree.min_leaf > 0) return tree.min_leaf;
  return task == Task::kClassification ? 1 : 5;
}

int ModelSpec::ResolvedMaxFeatures(Task task, std::size_t n_features) const {
  const auto m = static_cast<int>(n_features);
  if (tree.max_features > 0) return std::min(tree.max_features, m);
  if (kind != ModelKind::kRandomForest) return m;
  if (task == Task::kClassification) {
    return std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(m)))));
  }
  return std::max(1, (m + 2) / 3);
}

ModelSpec ModelSpec::FromJsonText(const std::string& text) {
  if (text == "rf") return RandomForest();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("model spec is neither a preset nor JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("kind")) {
    throw SpecError("model spec must be an object with a 'kind'");
  }
  static const std::set<std::string> kKnown = {
      "kind", "seed", "trees", "bootstrap", "max_depth", "min_leaf",
      "max_features", "learning_rate", "max_iterations", "tolerance", "ridge"};
  ModelSpec s;
  try {
    for (const auto& [key, value] : j.items()) {
      if (!kKnown.count(key)) throw SpecError("unknown model spec key '" + key + "'");
    }
    s.kind = ParseModelKind(j.at("kind").get<std::string>());
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("trees")) s.forest.trees = j.at("trees").get<int>();
    if (j.contains("bootstrap")) s.forest.bootstrap = j.at("bootstrap").get<bool>();
    if (j.contains("max_depth")) s.tree.max_depth = j.at("max_depth").get<int>();
    if (j.contains("min_leaf")) s.tree.min_leaf = j.at("min_leaf").get<int>();
    if (j.contains("max_features")) s.tree.max_features = j.at("max_features").get<int>();
    if (j.contains("learning_rate")) s.logistic.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("max_iterations")) s.logistic.max_iterations = j.at("max_iterations").get<int>();
    if (j.contains("tolerance")) s.logistic.tolerance = j.at("tolerance").get<double>();
    if (j.contains("ridge")) s.linear.ridge = j.at("ridge").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("malformed model spec: ") + e.what());
  }
  s.Validate();
  return s;
}

std::string ModelSpec::ToJsonText() const {
  nlohmann::ordered_json j;
  j["kind"] = ModelKindName(kind);
  j["seed"] = seed;
  switch (kind) {
    case ModelKind::kRandomForest:
      j["trees"] = forest.trees;
      j["bootstrap"] = forest.bootstrap;
      [[fallthrough]];
    case ModelKind::kDecisionTree:
      j["max_depth"] = tree.max_depth;
      j["min_leaf"] = tree.min_leaf;
      j["max_features"] = tree.max_features;
      break;
    case ModelKind::kLogisticRegression:
      j["learning_rate"] = logistic.learning_rate;
      j["max_iterations"] = logistic.max_iterations;
      j["tolerance"] = logistic.tolerance;
      break;
    case ModelKind::kLinearRegression:
      j["ridge"] = linear.ridge;
      break;
  }
  return j.dump();
}

// ---------------------------------------------------------------------------
// Tree

std::size_t Tree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, d[i]);
    if (!nodes_[i].is_leaf()) {
      d[nodes_[i].left] = d[i] + 1;
      d[nodes_[i].left + 1] = d[i] + 1;
    }
  }
  return deepest;
}

// ---------------------------------------------------------------------------
// TrainedModel

TrainedModel::TrainedModel(ModelSpec spec, Task task, std::size_t feature_count,
                           std::variant<TreeEnsemble, LinearWeights> state)
    : spec_(std::move(spec)),
      task_(task),
      feature_count_(feature_count),
      state_(std::move(state)) {}

void TrainedModel::CheckShape(const Matrix& x) const {
  if (x.cols() != feature_count_) {
    throw ShapeError("model expects " + std::to_string(feature_count_) +
                     " columns, got " + std::to_string(x.cols()));
  }
}

// Classification: class-1 score. Regression: the prediction itself.
std::vector<double> TrainedModel::RawOutput(const Matrix& x) const {
  CheckShape(x);
  const std::size_t n = x.rows();
  std::vector<double> out(n, 0.0);
  if (const auto* ens = std::get_if<TreeEnsemble>(&state_)) {
    const auto& trees = ens->trees;
    const bool vote = task_ == Task::kClassification && trees.size() > 1;
    // Rows are walked in interleaved lanes so independent traversals overlap.
    constexpr std::size_t kLanes = 8;
    const std::size_t m = x.cols();
    for (const Tree& t : trees) {
      const TreeNode* nodes = t.nodes().data();
      for (std::size_t base = 0; base < n; base += kLanes) {
        const std::size_t lanes = std::min(kLanes, n - base);
        std::size_t at[kLanes] = {};
        const double* rows = x.data().data() + base * m;
        bool moving = true;
        while (moving) {
          moving = false;
          for (std::size_t k = 0; k < lanes; ++k) {
            const TreeNode& nd = nodes[at[k]];
            if (nd.is_leaf()) continue;
            at[k] = static_cast<std::size_t>(nd.left) +
                    (rows[k * m + static_cast<std::size_t>(nd.feature)] <= nd.value ? 0 : 1);
            moving = true;
          }
        }
        for (std::size_t k = 0; k < lanes; ++k) {
          const double v = nodes[at[k]].value;
          out[base + k] += vote ? ScoreToLabel(v) : v;
        }
      }
    }
    const double k = static_cast<double>(trees.size());
    if (trees.size() > 1) {
      for (double& v : out) v /= k;
    }
    return out;
  }
  const auto& lin = std::get<LinearWeights>(state_);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = x.row(i);
    double eta = lin.intercept;
    for (std::size_t j = 0; j < row.size(); ++j) eta += lin.weights[j] * row[j];
    out[i] = task_ == Task::kClassification ? Sigmoid(eta) : eta;
  }
  return out;
}

std::vector<double> TrainedModel::predict(const Matrix& x) const {
  auto out = RawOutput(x);
  if (task_ == Task::kClassification) {
    for (double& v : out) v = ScoreToLabel(v);
  }
  return out;
}

std::vector<double> TrainedModel::predict_score(const Matrix& x) const {
  if (task_ != Task::kClassification) {
    throw SpecError("predict_score is only defined for classification models");
  }
  return RawOutput(x);
}

// ---------------------------------------------------------------------------
// Fit

namespace {

void CheckCompatible(const ModelSpec& spec, Task task) {
  if (spec.kind == ModelKind::kLogisticRegression && task != Task::kClassification) {
    throw SpecError("logistic_regression requires a classification target");
  }
  if (spec.kind == ModelKind::kLinearRegression && task != Task::kRegression) {
    throw SpecError("linear_regression requires a regression target");
  }
}

TrainedModel::TreeEnsemble FitTrees(const ModelSpec& spec, const Matrix& x,
                                    const Target& y, int workers) {
  const auto columns = internal::BinnedColumns::Build(x);
  internal::TreeConfig config;
  config.task = y.kind();
  config.min_leaf = spec.ResolvedMinLeaf(y.kind());
  config.max_depth = spec.tree.max_depth;
  config.max_features = spec.ResolvedMaxFeatures(y.kind(), x.cols());

  const bool forest = spec.kind == ModelKind::kRandomForest;
  const std::size_t n_trees = forest ? static_cast<std::size_t>(spec.forest.trees) : 1;
  const bool bootstrap = forest && spec.forest.bootstrap;
  const std::size_t n = x.rows();

  TrainedModel::TreeEnsemble ens;
  ens.trees.resize(n_trees);
  ParallelFor(n_trees, forest ? workers : 1, [&](std::size_t t) {
    Rng rng(DeriveSeed(spec.seed, Stream::kTree, {t}));
    std::vector<std::uint32_t> samples(n);
    if (bootstrap) {
      for (auto& s : samples) s = static_cast<std::uint32_t>(rng.Below(n));
    } else {
      std::iota(samples.begin(), samples.end(), 0u);
    }
    internal::TreeBuilder builder(columns, y.values(), config);
    ens.trees[t] = builder.Build(samples, rng);
  });
  return ens;
}

TrainedModel::LinearWeights FitLogistic(const LogisticParams& p, const Matrix& x,
                                        const Target& y) {
  const std::size_t n = x.rows();
  const std::size_t m = x.cols();
  TrainedModel::LinearWeights w;
  w.weights.assign(m, 0.0);

  const double positives = std::accumulate(y.values().begin(), y.values().end(), 0.0);
  if (positives == 0.0 || positives == static_cast<double>(n)) {
    // Single class: constant predictor far from the 0.5 threshold.
    w.intercept = positives == 0.0 ? -40.0 : 40.0;
    return w;
  }

  std::vector<double> grad(m);
  std::vector<double> residual(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int it = 0; it < p.max_iterations; ++it) {
    double grad_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = x.row(i);
      double eta = w.intercept;
      for (std::size_t j = 0; j < m; ++j) eta += w.weights[j] * row[j];
      residual[i] = Sigmoid(eta) - y[i];
      grad_b += residual[i];
    }
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = x.row(i);
      for (std::size_t j = 0; j < m; ++j) grad[j] += residual[i] * row[j];
    }
    double norm2 = grad_b * grad_b * inv_n * inv_n;
    for (double g : grad) norm2 += g * g * inv_n * inv_n;
    if (std::sqrt(norm2) < p.tolerance) break;
    w.intercept -= p.learning_rate * grad_b * inv_n;
    for (std::size_t j = 0; j < m; ++j) w.weights[j] -= p.learning_rate * grad[j] * inv_n;
  }
  return w;
}

// Solves the SPD system a * x = b in place (Cholesky). a is m x m row-major.
std::vector<double> SolveSpd(std::vector<double> a, std::vector<double> b, std::size_t m) {
  for (std::size_t j = 0; j < m; ++j) {
    double d = a[j * m + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * m + k] * a[j * m + k];
    if (!(d > 0.0)) throw SpecError("normal equations are not positive definite; raise ridge");
    const double l = std::sqrt(d);
    a[j * m + j] = l;
    for (std::size_t i = j + 1; i < m; ++i) {
      double s = a[i * m + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * m + k] * a[j * m + k];
      a[i * m + j] = s / l;
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= a[i * m + k] * b[k];
    b[i] = s / a[i * m + i];
  }
  for (std::size_t i = m; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < m; ++k) s -= a[k * m + i] * b[k];
    b[i] = s / a[i * m + i];
  }
  return b;
}

TrainedModel::LinearWeights FitLinear(const LinearParams& p, const Matrix& x,
                                      const Target& y) {
  // Centered normal equations; the intercept is recovered from the means and
  // is not shrunk by the ridge jitter.
  const std::size_t n = x.rows();
  const std::size_t m = x.cols();
  std::vector<double> mean(m, 0.0);
  double y_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) mean[j] += x(i, j);
    y_mean += y[i];
  }
  for (double& v : mean) v /= static_cast<double>(n);
  y_mean /= static_cast<double>(n);

  std::vector<double> gram(m * m, 0.0);
  std::vector<double> rhs(m, 0.0);
  std::vector<double> centered(m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) centered[j] = x(i, j) - mean[j];
    const double yc = y[i] - y_mean;
    for (std::size_t a = 0; a < m; ++a) {
      rhs[a] += centered[a] * yc;
      for (std::size_t b = 0; b <= a; ++b) gram[a * m + b] += centered[a] * centered[b];
    }
  }
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < a; ++b) gram[b * m + a] = gram[a * m + b];
    gram[a * m + a] += p.ridge;
  }
  TrainedModel::LinearWeights w;
  w.weights = m == 0 ? std::vector<double>{} : SolveSpd(std::move(gram), std::move(rhs), m);
  w.intercept = y_mean;
  for (std::size_t j = 0; j < m; ++j) w.intercept -= w.weights[j] * mean[j];
  return w;
}

}  // namespace

TrainedModel Fit(const ModelSpec& spec, const Matrix& x, const Target& y,
                 int workers) {
  spec.Validate();
  CheckCompatible(spec, y.kind());
  if (x.rows() != y.size()) throw ShapeError("X rows != target length");
  if (x.rows() < 2) throw ParameterError("fit needs at least 2 rows");
  g_fit_count.fetch_add(1);

  std::variant<TrainedModel::TreeEnsemble, TrainedModel::LinearWeights> state;
  switch (spec.kind) {
    case ModelKind::kDecisionTree:
    case ModelKind::kRandomForest:
      state = FitTrees(spec, x, y, workers);
      break;
    case ModelKind::kLogisticRegression:
      state = FitLogistic(spec.logistic, x, y);
      break;
    case ModelKind::kLinearRegression:
      state = FitLinear(spec.linear, x, y);
      break;
  }
  return TrainedModel(spec, y.kind(), x.cols(), std::move(state));
}

}  // namespace fairimp
