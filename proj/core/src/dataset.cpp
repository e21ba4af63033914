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

#include "fairimp/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "fairimp/errors.hpp"
#include "fairimp/random.hpp"
#include "fairimp/text_format.hpp"
#include "json.hpp"

namespace fairimp {

const char* TaskName(Task task) {
  return task == Task::kClassification ? "classification" : "regression";
}

Task ParseTask(const std::string& name) {
  if (name == "classification") return Task::kClassification;
  if (name == "regression") return Task::kRegression;
  throw ParameterError("unknown task '" + name + "'");
}

Target::Target(Task kind, std::vector<double> values)
    : kind_(kind), values_(std::move(values)) {
  for (double v : values_) {
    if (kind_ == Task::kClassification && v != 0.0 && v != 1.0) {
      throw SchemaError("classification labels must be 0 or 1");
    }
    if (!std::isfinite(v)) throw SchemaError("non-finite target value");
  }
}

Target Target::select(std::span<const std::size_t> rows) const {
  std::vector<double> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = values_[rows[i]];
  return Target(kind_, std::move(out));
}

GroupLabels::GroupLabels(std::vector<int> values, int group_count)
    : values_(std::move(values)), group_count_(group_count) {
  if (group_count_ < 2) {
    throw GroupError("at least 2 groups are required, got " +
                     std::to_string(group_count_));
  }
  for (int v : values_) {
    if (v < 1 || v > group_count_) {
      throw GroupError("group label " + std::to_string(v) +
                       " outside 1.." + std::to_string(group_count_));
    }
  }
}

int GroupLabels::groups_present() const {
  std::vector<char> seen(static_cast<std::size_t>(group_count_) + 1, 0);
  int present = 0;
  for (int v : values_) {
    if (!seen[v]) {
      seen[v] = 1;
      ++present;
    }
  }
  return present;
}

GroupLabels GroupLabels::select(std::span<const std::size_t> rows) const {
  std::vector<int> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = values_[rows[i]];
  GroupLabels g;
  g.values_ = std::move(out);
  g.group_count_ = group_count_;
  return g;
}

void Dataset::validate() const {
  const std::size_t n = features.rows();
  if (feature_names.size() != features.cols()) {
    throw ShapeError("feature_names length != column count");
  }
  if (target.size() != n) throw ShapeError("target length != row count");
  if (groups.size() != n) throw ShapeError("groups length != row count");
  for (double v : features.data()) {
    if (!std::isfinite(v)) throw SchemaError("non-finite feature value");
  }
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
  Dataset out;
  out.features = features.select_rows(rows);
  out.feature_names = feature_names;
  out.target = target.select(rows);
  out.groups = groups.select(rows);
  out.provenance = provenance;
  return out;
}

// ---------------------------------------------------------------------------
// Schema

SchemaConfig SchemaConfig::FromJsonText(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("schema is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("schema must be a JSON object");
  SchemaConfig s;
  try {
    if (!j.contains("target")) throw SchemaError("schema lacks 'target'");
    if (!j.contains("protected")) throw SchemaError("schema lacks 'protected'");
    s.target = j.at("target").get<std::string>();
    s.protected_column = j.at("protected").get<std::string>();
    if (j.contains("task")) s.task = ParseTask(j.at("task").get<std::string>());
    if (j.contains("positive_class") && !j.at("positive_class").is_null()) {
      const auto& pc = j.at("positive_class");
      s.positive_class = pc.is_string() ? pc.get<std::string>() : pc.dump();
    }
    if (j.contains("categorical")) {
      s.categorical = j.at("categorical").get<std::vector<std::string>>();
    }
    if (j.contains("drop")) s.drop = j.at("drop").get<std::vector<std::string>>();
    if (j.contains("drop_missing")) s.drop_missing = j.at("drop_missing").get<bool>();
    if (j.contains("keep_protected_feature")) {
      s.keep_protected_feature = j.at("keep_protected_feature").get<bool>();
    }
    if (j.contains("delimiter")) {
      const auto d = j.at("delimiter").get<std::string>();
      if (d.size() != 1) throw SchemaError("delimiter must be one character");
      s.delimiter = d[0];
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed schema field: ") + e.what());
  }
  if (s.task == Task::kClassification && !s.positive_class) {
    throw SchemaError("classification schema needs 'positive_class'");
  }
  return s;
}

SchemaConfig SchemaConfig::FromFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open schema " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return FromJsonText(buf.str());
}

std::string SchemaConfig::ToJsonText() const {
  nlohmann::ordered_json j;
  j["target"] = target;
  j["task"] = TaskName(task);
  j["positive_class"] =
      positive_class ? nlohmann::ordered_json(*positive_class) : nullptr;
  j["protected"] = protected_column;
  j["categorical"] = categorical;
  j["drop"] = drop;
  j["drop_missing"] = drop_missing;
  j["delimiter"] = std::string(1, delimiter);
  j["keep_protected_feature"] = keep_protected_feature;
  return j.dump();
}

// ---------------------------------------------------------------------------
// Loader

namespace {

std::string Trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Splits one record. Double quotes group a field; "" inside quotes is a quote.
std::vector<std::string> SplitRecord(std::string_view line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      out.push_back(Trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(Trim(cur));
  return out;
}

bool IsMissing(const std::string& cell) { return cell.empty() || cell == "?"; }

bool ParseDouble(const std::string& s, double* out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, *out);
  return ec == std::errc() && ptr == last && std::isfinite(*out);
}

enum class Role { kNumeric, kCategorical, kTarget, kProtected, kDropped };

}  // namespace

Dataset LoadTableFromString(const std::string& text, const SchemaConfig& schema,
                            LoadStats* stats) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!Trim(line).empty()) {
      header = SplitRecord(line, schema.delimiter);
      break;
    }
  }
  if (header.empty()) throw SchemaError("file has no header row");

  std::unordered_map<std::string, std::size_t> column_index;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (!column_index.emplace(header[c], c).second) {
      throw SchemaError("duplicate column '" + header[c] + "'");
    }
  }
  auto require = [&](const std::string& name) {
    auto it = column_index.find(name);
    if (it == column_index.end()) {
      throw SchemaError("configured column '" + name + "' not in header");
    }
    return it->second;
  };

  std::vector<Role> roles(header.size(), Role::kNumeric);
  for (const auto& name : schema.categorical) roles[require(name)] = Role::kCategorical;
  for (const auto& name : schema.drop) roles[require(name)] = Role::kDropped;
  const std::size_t target_col = require(schema.target);
  const std::size_t protected_col = require(schema.protected_column);
  if (target_col == protected_col) {
    throw SchemaError("target and protected columns must differ");
  }
  const Role protected_feature_role = roles[protected_col];
  roles[target_col] = Role::kTarget;
  roles[protected_col] = Role::kProtected;

  // Pass 1: gather retained rows as strings.
  std::vector<std::vector<std::string>> rows;
  LoadStats local;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty()) continue;
    auto cells = SplitRecord(line, schema.delimiter);
    ++local.rows_read;
    if (cells.size() != header.size()) {
      throw SchemaError("line " + std::to_string(line_no) + " has " +
                        std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(header.size()));
    }
    bool missing = false;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (roles[c] != Role::kDropped && IsMissing(cells[c])) missing = true;
    }
    if (missing) {
      if (!schema.drop_missing) {
        throw SchemaError("line " + std::to_string(line_no) +
                          " has a missing cell (set drop_missing to skip)");
      }
      ++local.rows_dropped;
      continue;
    }
    rows.push_back(std::move(cells));
  }
  if (local.rows_dropped > 0) {
    std::cerr << "warning: dropped " << local.rows_dropped
              << " rows with missing cells\n";
  }
  if (stats) *stats = local;

  // Category levels in first-appearance order.
  const bool protected_as_feature = schema.keep_protected_feature;
  std::vector<std::vector<std::string>> levels(header.size());
  std::vector<std::unordered_map<std::string, std::size_t>> level_index(header.size());
  auto is_categorical = [&](std::size_t c) {
    return roles[c] == Role::kCategorical ||
           (c == protected_col && protected_as_feature &&
            protected_feature_role == Role::kCategorical);
  };
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (is_categorical(c) || c == protected_col) {
        if (level_index[c].emplace(r[c], levels[c].size()).second) {
          levels[c].push_back(r[c]);
        }
      }
    }
  }

  // Column layout: source order; categoricals expand in place.
  struct OutColumn {
    std::size_t source;
    std::optional<std::size_t> level;
  };
  std::vector<OutColumn> layout;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const bool feature = roles[c] == Role::kNumeric ||
                         roles[c] == Role::kCategorical ||
                         (c == protected_col && protected_as_feature);
    if (!feature) continue;
    if (is_categorical(c)) {
      for (std::size_t l = 0; l < levels[c].size(); ++l) {
        layout.push_back({c, l});
        names.push_back(header[c] + "_" + levels[c][l]);
      }
    } else {
      layout.push_back({c, std::nullopt});
      names.push_back(header[c]);
    }
  }

  const int group_count = static_cast<int>(levels[protected_col].size());
  if (group_count < 2) {
    throw GroupError("protected column '" + schema.protected_column +
                     "' has fewer than 2 observed values");
  }

  Dataset ds;
  ds.features = Matrix(rows.size(), layout.size());
  std::vector<double> y(rows.size());
  std::vector<int> z(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    for (std::size_t k = 0; k < layout.size(); ++k) {
      const auto& col = layout[k];
      if (col.level) {
        ds.features(i, k) = level_index[col.source].at(r[col.source]) == *col.level ? 1.0 : 0.0;
      } else {
        double v = 0.0;
        if (!ParseDouble(r[col.source], &v)) {
          throw SchemaError("column '" + header[col.source] +
                            "' has non-numeric value '" + r[col.source] +
                            "'; list it as categorical");
        }
        ds.features(i, k) = v;
      }
    }
    if (schema.task == Task::kClassification) {
      y[i] = r[target_col] == *schema.positive_class ? 1.0 : 0.0;
    } else if (!ParseDouble(r[target_col], &y[i])) {
      throw SchemaError("regression target '" + r[target_col] +
                        "' is not a finite number");
    }
    z[i] = static_cast<int>(level_index[protected_col].at(r[protected_col])) + 1;
  }
  ds.feature_names = std::move(names);
  ds.target = Target(schema.task, std::move(y));
  ds.groups = GroupLabels(std::move(z), group_count);
  ds.validate();
  return ds;
}

Dataset LoadTable(const std::filesystem::path& path, const SchemaConfig& schema,
                  LoadStats* stats) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open data file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  Dataset ds = LoadTableFromString(buf.str(), schema, stats);
  ds.provenance = path.filename().string();
  return ds;
}

// ---------------------------------------------------------------------------
// Synthetic generator

SyntheticData GenerateSynthetic(const SyntheticParams& p) {
  if (p.n_samples < 10) throw ParameterError("n_samples must be >= 10");
  if (p.signal_width > p.n_features) {
    throw ParameterError("n_features (" + std::to_string(p.n_features) +
                         ") is smaller than the signal width (" +
                         std::to_string(p.signal_width) + ")");
  }
  if (p.biased_width > p.signal_width) {
    throw ParameterError("biased width exceeds signal width");
  }
  if (!(p.group_probability > 0.0 && p.group_probability < 1.0)) {
    throw ParameterError("group probability must be in (0, 1)");
  }

  const std::size_t n = p.n_samples;
  const std::size_t m = p.n_features;
  Rng rng(DeriveSeed(p.seed, Stream::kSynthetic));

  SyntheticTruth truth;
  truth.beta.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double mean = j < p.signal_width ? p.beta_signal_mean : 0.0;
    truth.beta[j] = rng.Normal(mean, p.beta_stddev);
  }
  for (std::size_t j = 0; j < p.signal_width; ++j) truth.signal_features.push_back(j);
  for (std::size_t j = 0; j < p.biased_width; ++j) truth.biased_features.push_back(j);

  std::vector<int> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = rng.Bernoulli(p.group_probability) ? 1 : 0;

  Matrix x(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double mean = j < p.biased_width ? 1.0 + z[i] : 0.0;
      x(i, j) = rng.Normal(mean, 1.0);
    }
  }

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double eta = 0.0;
    for (std::size_t j = 0; j < m; ++j) eta += x(i, j) * truth.beta[j];
    if (p.task == Task::kClassification) {
      const double prob = 1.0 / (1.0 + std::exp(-eta));
      y[i] = rng.Bernoulli(prob) ? 1.0 : 0.0;
    } else {
      y[i] = eta + rng.Normal();
    }
  }

  SyntheticData out;
  out.dataset.features = std::move(x);
  for (std::size_t j = 0; j < m; ++j) out.dataset.feature_names.push_back("x" + std::to_string(j + 1));
  out.dataset.target = Target(p.task, std::move(y));
  std::vector<int> groups(n);
  for (std::size_t i = 0; i < n; ++i) groups[i] = z[i] + 1;
  out.dataset.groups = GroupLabels(std::move(groups), 2);
  out.dataset.provenance = std::string("synthetic:") + TaskName(p.task) +
                           ":seed=" + std::to_string(p.seed);
  out.truth = std::move(truth);
  return out;
}

// ---------------------------------------------------------------------------
// Interventions

Matrix PermuteFeatureWith(const Matrix& x, std::size_t j,
                          std::span<const std::size_t> order) {
  if (j >= x.cols()) {
    throw IndexError("feature " + std::to_string(j) + " out of range [0, " +
                     std::to_string(x.cols()) + ")");
  }
  if (order.size() != x.rows()) throw ShapeError("permutation length != rows");
  Matrix out = x;
  for (std::size_t i = 0; i < x.rows(); ++i) out(i, j) = x(order[i], j);
  return out;
}

Matrix PermuteFeature(const Matrix& x, std::size_t j, std::uint64_t seed) {
  if (j >= x.cols()) {
    throw IndexError("feature " + std::to_string(j) + " out of range [0, " +
                     std::to_string(x.cols()) + ")");
  }
  Rng rng(seed);
  const auto order = rng.Permutation(x.rows());
  return PermuteFeatureWith(x, j, order);
}

Matrix DropFeature(const Matrix& x, std::size_t j) {
  if (j >= x.cols()) {
    throw IndexError("feature " + std::to_string(j) + " out of range [0, " +
                     std::to_string(x.cols()) + ")");
  }
  if (x.cols() < 2) throw IndexError("cannot drop the last remaining feature");
  std::vector<std::size_t> keep;
  keep.reserve(x.cols() - 1);
  for (std::size_t c = 0; c < x.cols(); ++c) {
    if (c != j) keep.push_back(c);
  }
  return x.select_columns(keep);
}

Dataset DropFeature(const Dataset& ds, std::size_t j) {
  Dataset out;
  out.features = DropFeature(ds.features, j);
  out.feature_names = ds.feature_names;
  out.feature_names.erase(out.feature_names.begin() + static_cast<std::ptrdiff_t>(j));
  out.target = ds.target;
  out.groups = ds.groups;
  out.provenance = ds.provenance;
  return out;
}

SplitPair Split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ParameterError("test fraction must be in (0, 1)");
  }
  const std::size_t n = ds.rows();
  const double raw = static_cast<double>(n) * test_fraction;
  if (raw < 2.0) throw ParameterError("test split would have fewer than 2 rows");
  const auto n_test = static_cast<std::size_t>(std::llround(raw));
  if (n_test + 2 > n) throw ParameterError("train split would have fewer than 2 rows");

  constexpr int kMaxDraws = 100;
  for (int attempt = 0; attempt < kMaxDraws; ++attempt) {
    Rng rng(DeriveSeed(seed, Stream::kSplit, {static_cast<std::uint64_t>(attempt)}));
    auto order = rng.Permutation(n);
    std::vector<std::size_t> test(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
    std::sort(test.begin(), test.end());
    std::sort(train.begin(), train.end());
    SplitPair pair;
    pair.test = ds.select_rows(test);
    pair.train = ds.select_rows(train);
    if (pair.test.groups.groups_present() < 2 || pair.train.groups.groups_present() < 2) {
      continue;
    }
    pair.seed = seed;
    pair.train_rows = std::move(train);
    pair.test_rows = std::move(test);
    return pair;
  }
  throw SplitError("no partition with >= 2 groups on both sides after 100 draws");
}

void WriteTable(const Dataset& ds, const std::filesystem::path& path,
                char delimiter) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& name : ds.feature_names) out << name << delimiter;
  out << "target" << delimiter << "group\n";
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    for (std::size_t j = 0; j < ds.cols(); ++j) {
      out << FormatDouble(ds.features(i, j)) << delimiter;
    }
    out << FormatDouble(ds.target[i]) << delimiter << ds.groups[i] << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace fairimp
