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

// Fair feature importance.
//
// Every score has the form  metric(without feature j) - metric(with j),
// computed for a bias metric (fairness score) and a loss (accuracy score):
//
//  * Permutation: "without j" is a model refit on training data whose column
//    j was shuffled, evaluated on evaluation data whose column j was shuffled
//    with an independent seed. Averaged over repetitions.
//  * Direct occlusion: "without j" is a model refit with column j removed.
//  * Minipatch occlusion: K models are fit on random n-row x m-feature
//    submatrices and scored on their out-of-patch rows. With b_k the patch
//    bias, b = mean_k b_k and b_{-j} = mean of b_k over patches whose feature
//    set excludes j, the score is b_{-j} - b. Scores for all features come
//    from the stored b_k with no further fitting.

#ifndef FAIRIMP_IMPORTANCE_HPP_
#define FAIRIMP_IMPORTANCE_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fairimp/dataset.hpp"
#include "fairimp/learners.hpp"
#include "fairimp/metrics.hpp"

namespace fairimp {

enum class Method { kPermutation, kOcclusionDirect, kOcclusionMinipatch };

// "permutation", "occlusion_direct", "occlusion_minipatch".
const char* MethodName(Method method);

// Row order for a permutation of n rows; out[i] is the source row of row i.
using PermutationProvider =
    std::function<std::vector<std::size_t>(std::size_t n, std::uint64_t seed)>;

struct ImportanceOptions {
  MetricKind bias_metric = MetricKind::kDpComplementRatio;
  MetricKind loss_metric = MetricKind::kClassificationError;
  int repetitions = 10;
  // false = classic evaluate-only permutation (no refit on permuted data).
  bool refit = true;
  std::uint64_t seed = 0;
  int workers = 1;
  // Test hook; empty means a seeded uniform shuffle.
  PermutationProvider permutation;
};

struct FeatureScore {
  std::string feature;
  double fairness = 0.0;
  double accuracy = 0.0;
  // Sample standard deviation over repetitions (permutation only).
  std::optional<double> fairness_stddev;
  std::optional<double> accuracy_stddev;
  // Repetitions (permutation), excluding patches (minipatch) or 1.
  std::size_t support = 0;
  bool flagged = false;
  std::string flag_reason;
};

struct ImportanceReport {
  Method method = Method::kPermutation;
  MetricKind bias_metric = MetricKind::kDpComplementRatio;
  MetricKind loss_metric = MetricKind::kClassificationError;
  std::vector<FeatureScore> scores;
  std::vector<std::string> warnings;
  // Baseline metric values the scores are differences from.
  double baseline_bias = 0.0;
  double baseline_loss = 0.0;
  // Minipatch bookkeeping.
  std::size_t patches_retained = 0;
  std::size_t patches_skipped = 0;
};

struct PermutationScore {
  double fairness = 0.0;
  double accuracy = 0.0;
  double fairness_stddev = 0.0;
  double accuracy_stddev = 0.0;
  int repetitions = 0;
};

// rho_perm(j) for the options' bias metric, with the loss analog.
PermutationScore PermImportance(const Dataset& train, const Dataset& eval,
                                const ModelSpec& spec,
                                const ImportanceOptions& options, std::size_t j);

// All features; the baseline model is fit once.
ImportanceReport PermImportanceAll(const Dataset& train, const Dataset& eval,
                                   const ModelSpec& spec,
                                   const ImportanceOptions& options);

struct OcclusionScore {
  double fairness = 0.0;
  double accuracy = 0.0;
};

// rho_occl(j) by refitting without column j.
OcclusionScore OcclImportanceDirect(const Dataset& train, const Dataset& eval,
                                    const ModelSpec& spec,
                                    const ImportanceOptions& options,
                                    std::size_t j);

ImportanceReport OcclImportanceDirectAll(const Dataset& train,
                                         const Dataset& eval,
                                         const ModelSpec& spec,
                                         const ImportanceOptions& options);

// ---------------------------------------------------------------------------
// Minipatch ensemble

struct MinipatchConfig {
  std::size_t rows_per_patch = 0;      // n
  std::size_t features_per_patch = 0;  // m
  std::size_t patches = 2000;          // K
  MetricKind bias_metric = MetricKind::kDpComplementRatio;
  MetricKind loss_metric = MetricKind::kClassificationError;
  std::uint64_t seed = 0;
  int workers = 1;
  // Keep each patch's fitted model (memory heavy for large K).
  bool keep_models = false;

  // n = ceil(n_frac * N), m = ceil(m_frac * M), K as given.
  static MinipatchConfig FromFractions(std::size_t n_rows, std::size_t n_features,
                                       double n_frac = 0.2, double m_frac = 0.2,
                                       std::size_t patches = 2000);
};

struct Minipatch {
  std::vector<std::size_t> rows;      // R_k, sorted
  std::vector<std::size_t> features;  // F_k, sorted
  std::optional<TrainedModel> model;
  double bias_oop = 0.0;
  double loss_oop = 0.0;
  std::size_t n_evaluated = 0;
  // false when the out-of-patch rows held fewer than 2 groups.
  bool retained = true;

  bool contains_feature(std::size_t j) const;
};

struct MinipatchEnsemble {
  std::vector<Minipatch> patches;
  std::size_t feature_count = 0;
  std::vector<std::string> feature_names;
  MinipatchConfig config;
  ModelSpec spec;
  double ensemble_bias = 0.0;  // mean of bias_oop over retained patches
  double ensemble_loss = 0.0;
  std::size_t retained = 0;
  std::size_t skipped = 0;

  // Recomputes the aggregates from `patches`. Throws EnsembleError when no
  // patch is retained.
  void Aggregate();
};

MinipatchEnsemble FitMinipatchEnsemble(const Dataset& ds, const ModelSpec& spec,
                                       const MinipatchConfig& config);

// Mean patch bias (loss) over retained patches whose feature set excludes j.
// Throws UndefinedScoreError when every retained patch contains j.
double MpBiasExcluding(const MinipatchEnsemble& ens, std::size_t j);
double MpLossExcluding(const MinipatchEnsemble& ens, std::size_t j);

// fairness(j) = b_{-j} - b, accuracy(j) = a_{-j} - a; features with no
// excluding patch are flagged instead of valued.
ImportanceReport MpOcclusionScores(const MinipatchEnsemble& ens);

}  // namespace fairimp

#endif  // FAIRIMP_IMPORTANCE_HPP_
