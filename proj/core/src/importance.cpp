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

#include "fairimp/importance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairimp/errors.hpp"
#include "fairimp/parallel.hpp"
#include "fairimp/random.hpp"

namespace fairimp {

const char* MethodName(Method method) {
  switch (method) {
    case Method::kPermutation: return "permutation";
    case Method::kOcclusionDirect: return "occlusion_direct";
    case Method::kOcclusionMinipatch: return "occlusion_minipatch";
  }
  return "?";
}

namespace {

void CheckOptions(const ImportanceOptions& o, Task task) {
  if (o.repetitions < 1) throw ParameterError("repetitions must be >= 1");
  if (!IsBiasMetric(o.bias_metric)) {
    throw MetricError(std::string("'") + MetricName(o.bias_metric) + "' is not a bias metric");
  }
  if (!IsLossMetric(o.loss_metric)) {
    throw MetricError(std::string("'") + MetricName(o.loss_metric) + "' is not a loss metric");
  }
  for (auto m : {o.bias_metric, o.loss_metric}) {
    if (!MetricSupportsTask(m, task)) {
      throw MetricError(std::string("metric '") + MetricName(m) + "' does not apply to " +
                        TaskName(task) + " targets");
    }
  }
}

void CheckPair(const Dataset& train, const Dataset& eval) {
  if (train.cols() != eval.cols()) throw ShapeError("train and eval column counts differ");
  if (train.target.kind() != eval.target.kind()) throw ShapeError("train and eval tasks differ");
}

void CheckFeature(const Dataset& ds, std::size_t j) {
  if (j >= ds.cols()) {
    throw IndexError("feature " + std::to_string(j) + " out of range [0, " +
                     std::to_string(ds.cols()) + ")");
  }
}

struct MetricPair {
  double bias;
  double loss;
};

MetricPair Score(const TrainedModel& model, const Matrix& x, const Dataset& eval,
                 const ImportanceOptions& o) {
  const auto y_hat = model.predict(x);
  return {Evaluate(o.bias_metric, eval.target, y_hat, eval.groups).value,
          Evaluate(o.loss_metric, eval.target, y_hat, eval.groups).value};
}

std::vector<std::size_t> DrawOrder(const ImportanceOptions& o, std::size_t n,
                                   std::uint64_t seed) {
  if (o.permutation) {
    auto order = o.permutation(n, seed);
    if (order.size() != n) throw ParameterError("permutation hook returned wrong length");
    return order;
  }
  Rng rng(seed);
  return rng.Permutation(n);
}

double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double SampleStddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = Mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// One permutation repetition for feature j.
MetricPair PermutedMetrics(const Dataset& train, const Dataset& eval,
                           const ModelSpec& spec, const TrainedModel& baseline,
                           const ImportanceOptions& o, std::size_t j, int rep) {
  const auto r = static_cast<std::uint64_t>(rep);
  const TrainedModel* model = &baseline;
  std::optional<TrainedModel> refit;
  if (o.refit) {
    const auto train_order =
        DrawOrder(o, train.rows(), DeriveSeed(o.seed, Stream::kPermuteTrain, {j, r}));
    const Matrix x_train = PermuteFeatureWith(train.features, j, train_order);
    refit.emplace(Fit(spec, x_train, train.target));
    model = &*refit;
  }
  const auto eval_order =
      DrawOrder(o, eval.rows(), DeriveSeed(o.seed, Stream::kPermuteEval, {j, r}));
  const Matrix x_eval = PermuteFeatureWith(eval.features, j, eval_order);
  return Score(*model, x_eval, eval, o);
}

}  // namespace

PermutationScore PermImportance(const Dataset& train, const Dataset& eval,
                                const ModelSpec& spec,
                                const ImportanceOptions& options, std::size_t j) {
  CheckOptions(options, train.target.kind());
  CheckPair(train, eval);
  CheckFeature(train, j);
  const TrainedModel baseline = Fit(spec, train.features, train.target, options.workers);
  const MetricPair base = Score(baseline, eval.features, eval, options);

  const auto reps = static_cast<std::size_t>(options.repetitions);
  std::vector<double> fair(reps);
  std::vector<double> acc(reps);
  ParallelFor(reps, options.workers, [&](std::size_t r) {
    const auto m = PermutedMetrics(train, eval, spec, baseline, options, j, static_cast<int>(r));
    fair[r] = m.bias - base.bias;
    acc[r] = m.loss - base.loss;
  });
  PermutationScore out;
  out.fairness = Mean(fair);
  out.accuracy = Mean(acc);
  out.fairness_stddev = SampleStddev(fair);
  out.accuracy_stddev = SampleStddev(acc);
  out.repetitions = options.repetitions;
  return out;
}

ImportanceReport PermImportanceAll(const Dataset& train, const Dataset& eval,
                                   const ModelSpec& spec,
                                   const ImportanceOptions& options) {
  CheckOptions(options, train.target.kind());
  CheckPair(train, eval);
  const TrainedModel baseline = Fit(spec, train.features, train.target, options.workers);
  const MetricPair base = Score(baseline, eval.features, eval, options);

  const std::size_t m = train.cols();
  const auto reps = static_cast<std::size_t>(options.repetitions);
  std::vector<double> fair(m * reps);
  std::vector<double> acc(m * reps);
  ParallelFor(m * reps, options.workers, [&](std::size_t task) {
    const std::size_t j = task / reps;
    const int r = static_cast<int>(task % reps);
    const auto mp = PermutedMetrics(train, eval, spec, baseline, options, j, r);
    fair[task] = mp.bias - base.bias;
    acc[task] = mp.loss - base.loss;
  });

  ImportanceReport report;
  report.method = Method::kPermutation;
  report.bias_metric = options.bias_metric;
  report.loss_metric = options.loss_metric;
  report.baseline_bias = base.bias;
  report.baseline_loss = base.loss;
  if (!options.refit) {
    report.warnings.push_back(
        "evaluate-only permutation (no refit): differs from the retrained definition");
  }
  for (std::size_t j = 0; j < m; ++j) {
    const std::vector<double> f(fair.begin() + static_cast<std::ptrdiff_t>(j * reps),
                                fair.begin() + static_cast<std::ptrdiff_t>((j + 1) * reps));
    const std::vector<double> a(acc.begin() + static_cast<std::ptrdiff_t>(j * reps),
                                acc.begin() + static_cast<std::ptrdiff_t>((j + 1) * reps));
    FeatureScore s;
    s.feature = train.feature_names[j];
    s.fairness = Mean(f);
    s.accuracy = Mean(a);
    s.fairness_stddev = SampleStddev(f);
    s.accuracy_stddev = SampleStddev(a);
    s.support = reps;
    report.scores.push_back(std::move(s));
  }
  return report;
}

OcclusionScore OcclImportanceDirect(const Dataset& train, const Dataset& eval,
                                    const ModelSpec& spec,
                                    const ImportanceOptions& options,
                                    std::size_t j) {
  CheckOptions(options, train.target.kind());
  CheckPair(train, eval);
  CheckFeature(train, j);
  if (train.cols() < 2) throw IndexError("occlusion needs at least 2 features");
  const TrainedModel full = Fit(spec, train.features, train.target, options.workers);
  const MetricPair base = Score(full, eval.features, eval, options);
  const TrainedModel reduced =
      Fit(spec, DropFeature(train.features, j), train.target, options.workers);
  const MetricPair without = Score(reduced, DropFeature(eval.features, j), eval, options);
  return {without.bias - base.bias, without.loss - base.loss};
}

ImportanceReport OcclImportanceDirectAll(const Dataset& train,
                                         const Dataset& eval,
                                         const ModelSpec& spec,
                                         const ImportanceOptions& options) {
  CheckOptions(options, train.target.kind());
  CheckPair(train, eval);
  if (train.cols() < 2) throw IndexError("occlusion needs at least 2 features");
  const TrainedModel full = Fit(spec, train.features, train.target, options.workers);
  const MetricPair base = Score(full, eval.features, eval, options);

  const std::size_t m = train.cols();
  std::vector<MetricPair> without(m);
  ParallelFor(m, options.workers, [&](std::size_t j) {
    const TrainedModel reduced = Fit(spec, DropFeature(train.features, j), train.target);
    without[j] = Score(reduced, DropFeature(eval.features, j), eval, options);
  });

  ImportanceReport report;
  report.method = Method::kOcclusionDirect;
  report.bias_metric = options.bias_metric;
  report.loss_metric = options.loss_metric;
  report.baseline_bias = base.bias;
  report.baseline_loss = base.loss;
  for (std::size_t j = 0; j < m; ++j) {
    FeatureScore s;
    s.feature = train.feature_names[j];
    s.fairness = without[j].bias - base.bias;
    s.accuracy = without[j].loss - base.loss;
    s.support = 1;
    report.scores.push_back(std::move(s));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Minipatch ensemble

MinipatchConfig MinipatchConfig::FromFractions(std::size_t n_rows,
                                               std::size_t n_features,
                                               double n_frac, double m_frac,
                                               std::size_t patches) {
  if (!(n_frac > 0.0 && n_frac < 1.0) || !(m_frac > 0.0 && m_frac < 1.0)) {
    throw ParameterError("minipatch fractions must lie in (0, 1)");
  }
  MinipatchConfig c;
  c.rows_per_patch = static_cast<std::size_t>(std::ceil(n_frac * static_cast<double>(n_rows)));
  c.features_per_patch =
      static_cast<std::size_t>(std::ceil(m_frac * static_cast<double>(n_features)));
  c.patches = patches;
  return c;
}

bool Minipatch::contains_feature(std::size_t j) const {
  return std::binary_search(features.begin(), features.end(), j);
}

void MinipatchEnsemble::Aggregate() {
  double bias_sum = 0.0;
  double loss_sum = 0.0;
  retained = 0;
  skipped = 0;
  for (const auto& p : patches) {
    if (!p.retained) {
      ++skipped;
      continue;
    }
    bias_sum += p.bias_oop;
    loss_sum += p.loss_oop;
    ++retained;
  }
  if (retained == 0) {
    throw EnsembleError("all " + std::to_string(patches.size()) +
                        " patches were skipped (out-of-patch rows lacked 2 groups)");
  }
  ensemble_bias = bias_sum / static_cast<double>(retained);
  ensemble_loss = loss_sum / static_cast<double>(retained);
}

MinipatchEnsemble FitMinipatchEnsemble(const Dataset& ds, const ModelSpec& spec,
                                       const MinipatchConfig& config) {
  const std::size_t n_rows = ds.rows();
  const std::size_t n_features = ds.cols();
  if (config.patches < 1) throw ParameterError("K must be >= 1");
  if (config.rows_per_patch < 2 || config.rows_per_patch >= n_rows) {
    throw ParameterError("rows per patch must satisfy 2 <= n < N (n=" +
                         std::to_string(config.rows_per_patch) + ", N=" +
                         std::to_string(n_rows) + ")");
  }
  if (config.features_per_patch < 1 || config.features_per_patch >= n_features) {
    throw ParameterError("features per patch must satisfy 1 <= m < M (m=" +
                         std::to_string(config.features_per_patch) + ", M=" +
                         std::to_string(n_features) + ")");
  }
  ImportanceOptions check;
  check.bias_metric = config.bias_metric;
  check.loss_metric = config.loss_metric;
  CheckOptions(check, ds.target.kind());

  MinipatchEnsemble ens;
  ens.feature_count = n_features;
  ens.feature_names = ds.feature_names;
  ens.config = config;
  ens.spec = spec;
  ens.patches.resize(config.patches);

  ParallelFor(config.patches, config.workers, [&](std::size_t k) {
    Minipatch& patch = ens.patches[k];
    Rng rng(DeriveSeed(config.seed, Stream::kPatch, {k}));
    patch.rows = rng.SampleWithoutReplacement(n_rows, config.rows_per_patch);
    patch.features = rng.SampleWithoutReplacement(n_features, config.features_per_patch);

    std::vector<std::size_t> out_rows;
    out_rows.reserve(n_rows - patch.rows.size());
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < n_rows; ++i) {
      if (cursor < patch.rows.size() && patch.rows[cursor] == i) {
        ++cursor;
      } else {
        out_rows.push_back(i);
      }
    }
    const GroupLabels z_out = ds.groups.select(out_rows);
    if (z_out.groups_present() < 2) {
      patch.retained = false;
      return;
    }

    ModelSpec patch_spec = spec;
    patch_spec.seed = DeriveSeed(spec.seed, Stream::kPatchModel, {k});
    TrainedModel model = Fit(patch_spec, ds.features.select(patch.rows, patch.features),
                             ds.target.select(patch.rows));
    const auto y_hat = model.predict(ds.features.select(out_rows, patch.features));
    const Target y_out = ds.target.select(out_rows);
    patch.bias_oop = Evaluate(config.bias_metric, y_out, y_hat, z_out).value;
    patch.loss_oop = Evaluate(config.loss_metric, y_out, y_hat, z_out).value;
    patch.n_evaluated = out_rows.size();
    if (config.keep_models) patch.model.emplace(std::move(model));
  });

  ens.Aggregate();
  return ens;
}

namespace {

// Indicator-weighted mean over retained patches excluding j, in patch order.
double ExcludingMean(const MinipatchEnsemble& ens, std::size_t j, bool bias) {
  if (j >= ens.feature_count) {
    throw IndexError("feature " + std::to_string(j) + " out of range");
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& p : ens.patches) {
    if (!p.retained || p.contains_feature(j)) continue;
    sum += bias ? p.bias_oop : p.loss_oop;
    ++count;
  }
  if (count == 0) {
    throw UndefinedScoreError("feature " + std::to_string(j) +
                              " appears in every retained patch; raise K");
  }
  return sum / static_cast<double>(count);
}

}  // namespace

double MpBiasExcluding(const MinipatchEnsemble& ens, std::size_t j) {
  return ExcludingMean(ens, j, true);
}

double MpLossExcluding(const MinipatchEnsemble& ens, std::size_t j) {
  return ExcludingMean(ens, j, false);
}

ImportanceReport MpOcclusionScores(const MinipatchEnsemble& ens) {
  const std::size_t m = ens.feature_count;
  // One pass over patches; per-feature sums accumulate in patch order, which
  // matches MpBiasExcluding bit for bit.
  std::vector<double> bias_sum(m, 0.0);
  std::vector<double> loss_sum(m, 0.0);
  std::vector<std::size_t> count(m, 0);
  std::vector<char> member(m, 0);
  for (const auto& p : ens.patches) {
    if (!p.retained) continue;
    for (std::size_t f : p.features) member[f] = 1;
    for (std::size_t j = 0; j < m; ++j) {
      if (member[j]) continue;
      bias_sum[j] += p.bias_oop;
      loss_sum[j] += p.loss_oop;
      ++count[j];
    }
    for (std::size_t f : p.features) member[f] = 0;
  }

  ImportanceReport report;
  report.method = Method::kOcclusionMinipatch;
  report.bias_metric = ens.config.bias_metric;
  report.loss_metric = ens.config.loss_metric;
  report.baseline_bias = ens.ensemble_bias;
  report.baseline_loss = ens.ensemble_loss;
  report.patches_retained = ens.retained;
  report.patches_skipped = ens.skipped;
  if (ens.skipped > 0) {
    report.warnings.push_back(std::to_string(ens.skipped) +
                              " patches skipped: out-of-patch rows lacked 2 groups");
  }
  std::size_t flagged = 0;
  for (std::size_t j = 0; j < m; ++j) {
    FeatureScore s;
    s.feature = j < ens.feature_names.size() ? ens.feature_names[j] : "x" + std::to_string(j + 1);
    s.support = count[j];
    if (count[j] == 0) {
      s.flagged = true;
      s.flag_reason = "no retained patch excludes this feature";
      ++flagged;
    } else {
      const double n = static_cast<double>(count[j]);
      s.fairness = bias_sum[j] / n - ens.ensemble_bias;
      s.accuracy = loss_sum[j] / n - ens.ensemble_loss;
    }
    report.scores.push_back(std::move(s));
  }
  if (flagged > 0) {
    report.warnings.push_back(std::to_string(flagged) +
                              " features have undefined scores (present in every patch); raise K");
  }
  return report;
}

}  // namespace fairimp
