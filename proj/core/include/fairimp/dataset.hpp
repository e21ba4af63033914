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

// Tabular data: features X, target y and protected-group labels z.
//
// Feature indices in this API are 0-based. User-facing surfaces (CLI, reports)
// identify features by name.

#ifndef FAIRIMP_DATASET_HPP_
#define FAIRIMP_DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairimp/matrix.hpp"

namespace fairimp {

enum class Task { kClassification, kRegression };

const char* TaskName(Task task);
Task ParseTask(const std::string& name);

// Response vector. Classification values are exactly 0.0 or 1.0.
class Target {
 public:
  Target() = default;
  Target(Task kind, std::vector<double> values);

  Task kind() const { return kind_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  Target select(std::span<const std::size_t> rows) const;

 private:
  Task kind_ = Task::kClassification;
  std::vector<double> values_;
};

// Protected-attribute labels in 1..G.
class GroupLabels {
 public:
  GroupLabels() = default;
  // Throws GroupError unless every value is in 1..group_count and
  // group_count >= 2. Not every group must appear in `values`.
  GroupLabels(std::vector<int> values, int group_count);

  std::span<const int> values() const { return values_; }
  int group_count() const { return group_count_; }
  std::size_t size() const { return values_.size(); }
  int operator[](std::size_t i) const { return values_[i]; }

  // Number of distinct groups that actually occur.
  int groups_present() const;

  // Subsets keep the full-dataset group_count; use groups_present() to check
  // whether a subset is still evaluable.
  GroupLabels select(std::span<const std::size_t> rows) const;

 private:
  std::vector<int> values_;
  int group_count_ = 0;
};

struct Dataset {
  Matrix features;
  std::vector<std::string> feature_names;
  Target target;
  GroupLabels groups;
  std::string provenance;

  std::size_t rows() const { return features.rows(); }
  std::size_t cols() const { return features.cols(); }

  // Throws on any violated invariant (lengths, non-finite entries).
  void validate() const;

  Dataset select_rows(std::span<const std::size_t> rows) const;
};

struct SyntheticTruth {
  std::vector<std::size_t> signal_features;
  std::vector<std::size_t> biased_features;
  std::vector<double> beta;
};

struct SplitPair {
  Dataset train;
  Dataset test;
  std::uint64_t seed = 0;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
};

struct SchemaConfig {
  std::string target;
  // Required for classification; rows whose target equals it get label 1.
  std::optional<std::string> positive_class;
  std::string protected_column;
  std::vector<std::string> categorical;
  // Columns excluded from the feature matrix.
  std::vector<std::string> drop;
  bool drop_missing = false;
  char delimiter = ',';
  Task task = Task::kClassification;
  // Keep the protected column as a feature as well.
  bool keep_protected_feature = false;

  static SchemaConfig FromJsonText(const std::string& text);
  static SchemaConfig FromFile(const std::filesystem::path& path);
  std::string ToJsonText() const;
};

struct LoadStats {
  std::size_t rows_read = 0;
  std::size_t rows_dropped = 0;
};

// Parses a delimiter-separated file with a header row. Categorical columns
// are one-hot expanded in first-appearance order as "<column>_<value>";
// cells that are empty or "?" count as missing.
Dataset LoadTable(const std::filesystem::path& path,
                  const SchemaConfig& schema, LoadStats* stats = nullptr);
Dataset LoadTableFromString(const std::string& text, const SchemaConfig& schema,
                            LoadStats* stats = nullptr);

struct SyntheticParams {
  Task task = Task::kClassification;
  std::size_t n_samples = 1000;
  std::size_t n_features = 10;
  std::size_t signal_width = 5;
  std::size_t biased_width = 2;
  double group_probability = 0.2;
  double beta_signal_mean = 5.0;
  double beta_stddev = 0.1;
  std::uint64_t seed = 0;
};

struct SyntheticData {
  Dataset dataset;
  SyntheticTruth truth;
};

// z ~ Bernoulli(p); X_ij ~ N((1 + z_i) * [j < biased_width], 1);
// beta_j ~ N(mean * [j < signal_width], stddev). Classification draws
// y_i ~ Bernoulli(sigmoid(x_i . beta)); regression y_i = x_i . beta + N(0, 1).
// Group label is z + 1.
SyntheticData GenerateSynthetic(const SyntheticParams& params);

// Copy of X with column j reordered by a seeded uniform permutation.
Matrix PermuteFeature(const Matrix& x, std::size_t j, std::uint64_t seed);
// Same, with the row order supplied explicitly (out[i] = x[order[i]]).
Matrix PermuteFeatureWith(const Matrix& x, std::size_t j,
                          std::span<const std::size_t> order);

Matrix DropFeature(const Matrix& x, std::size_t j);
Dataset DropFeature(const Dataset& ds, std::size_t j);

// Seeded disjoint row partition with round(N * test_fraction) test rows.
// Redraws up to 100 times until both sides hold >= 2 groups.
SplitPair Split(const Dataset& ds, double test_fraction, std::uint64_t seed);

// Writes features, "target" and "group" columns with a header.
void WriteTable(const Dataset& ds, const std::filesystem::path& path,
                char delimiter = ',');

}  // namespace fairimp

#endif  // FAIRIMP_DATASET_HPP_
