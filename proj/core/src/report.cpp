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

#include "fairimp/report.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "fairimp/errors.hpp"
#include "fairimp/text_format.hpp"
#include "json.hpp"

namespace fairimp {

using Json = nlohmann::ordered_json;

namespace {

Json Optional(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

Method ParseMethod(const std::string& name) {
  for (auto m : {Method::kPermutation, Method::kOcclusionDirect, Method::kOcclusionMinipatch}) {
    if (name == MethodName(m)) return m;
  }
  throw ParameterError("unknown method '" + name + "' in report");
}

std::optional<double> ReadOptional(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

std::string ReportToJson(const RunReport& report) {
  const auto& imp = report.importance;
  Json j;
  j["schema_version"] = report.schema_version;
  j["config"] = Json::parse(report.config_json);
  j["method"] = MethodName(imp.method);
  j["bias_metric"] = MetricName(imp.bias_metric);
  j["loss_metric"] = MetricName(imp.loss_metric);
  j["model_accuracy"] = Optional(report.model.accuracy);
  j["model_fairness_dp_ratio"] = Optional(report.model.fairness_dp_ratio);
  j["model"] = {
      {"accuracy", Optional(report.model.accuracy)},
      {"fairness_dp_ratio", Optional(report.model.fairness_dp_ratio)},
      {"dp_difference", Optional(report.model.dp_difference)},
      {"mse", Optional(report.model.mse)},
      {"regression_dp", Optional(report.model.regression_dp)},
      {"n_evaluated", report.model.n_evaluated},
  };
  j["baseline"] = {{"bias", imp.baseline_bias}, {"loss", imp.baseline_loss}};
  if (imp.method == Method::kOcclusionMinipatch) {
    j["ensemble"] = {{"patches_retained", imp.patches_retained},
                     {"patches_skipped", imp.patches_skipped}};
  }
  Json scores = Json::array();
  for (const auto& s : imp.scores) {
    Json e;
    e["feature"] = s.feature;
    e["fairness"] = s.flagged ? Json(nullptr) : Json(s.fairness);
    e["accuracy"] = s.flagged ? Json(nullptr) : Json(s.accuracy);
    e["flagged"] = s.flagged;
    if (s.fairness_stddev || s.accuracy_stddev) {
      e["stddev"] = {{"fairness", Optional(s.fairness_stddev)},
                     {"accuracy", Optional(s.accuracy_stddev)}};
    } else {
      e["stddev"] = nullptr;
    }
    e["support"] = s.support;
    if (s.flagged) e["flag_reason"] = s.flag_reason;
    scores.push_back(std::move(e));
  }
  j["scores"] = std::move(scores);
  j["warnings"] = imp.warnings;
  return j.dump(2) + "\n";
}

RunReport ReportFromJson(const std::string& text) {
  RunReport r;
  try {
    const Json j = Json::parse(text);
    if (!j.is_object()) throw ParameterError("report must be a JSON object");
    for (const char* key : {"schema_version", "config", "scores", "method"}) {
      if (!j.contains(key)) throw ParameterError(std::string("report lacks '") + key + "'");
    }
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != kReportSchemaVersion) {
      throw ParameterError("unsupported report schema_version " +
                           std::to_string(r.schema_version));
    }
    r.config_json = j.at("config").dump();
    auto& imp = r.importance;
    imp.method = ParseMethod(j.at("method").get<std::string>());
    if (j.contains("bias_metric")) imp.bias_metric = ParseMetric(j.at("bias_metric").get<std::string>());
    if (j.contains("loss_metric")) imp.loss_metric = ParseMetric(j.at("loss_metric").get<std::string>());
    r.model.accuracy = ReadOptional(j, "model_accuracy");
    r.model.fairness_dp_ratio = ReadOptional(j, "model_fairness_dp_ratio");
    if (j.contains("model") && j.at("model").is_object()) {
      const auto& m = j.at("model");
      r.model.dp_difference = ReadOptional(m, "dp_difference");
      r.model.mse = ReadOptional(m, "mse");
      r.model.regression_dp = ReadOptional(m, "regression_dp");
      if (m.contains("n_evaluated")) r.model.n_evaluated = m.at("n_evaluated").get<std::size_t>();
    }
    if (j.contains("baseline")) {
      imp.baseline_bias = j.at("baseline").value("bias", 0.0);
      imp.baseline_loss = j.at("baseline").value("loss", 0.0);
    }
    if (j.contains("ensemble")) {
      imp.patches_retained = j.at("ensemble").value("patches_retained", std::size_t{0});
      imp.patches_skipped = j.at("ensemble").value("patches_skipped", std::size_t{0});
    }
    if (!j.at("scores").is_array()) throw ParameterError("'scores' must be an array");
    for (const auto& e : j.at("scores")) {
      FeatureScore s;
      s.feature = e.at("feature").get<std::string>();
      s.flagged = e.value("flagged", false);
      if (!s.flagged) {
        if (e.at("fairness").is_null() || e.at("accuracy").is_null()) {
          throw ParameterError("unflagged score for '" + s.feature + "' lacks a value");
        }
        s.fairness = e.at("fairness").get<double>();
        s.accuracy = e.at("accuracy").get<double>();
      }
      if (e.contains("stddev") && e.at("stddev").is_object()) {
        s.fairness_stddev = ReadOptional(e.at("stddev"), "fairness");
        s.accuracy_stddev = ReadOptional(e.at("stddev"), "accuracy");
      }
      s.support = e.value("support", std::size_t{0});
      s.flag_reason = e.value("flag_reason", std::string());
      imp.scores.push_back(std::move(s));
    }
    if (j.contains("warnings")) imp.warnings = j.at("warnings").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("malformed report: ") + e.what());
  }
  return r;
}

std::string ReportToCsv(const RunReport& report) {
  std::ostringstream out;
  out << "# config: " << Json::parse(report.config_json).dump() << "\n";
  out << "feature,fairness_score,accuracy_score,flagged\n";
  for (const auto& s : report.importance.scores) {
    std::string name = s.feature;
    if (name.find_first_of(",\"\n") != std::string::npos) {
      std::string quoted = "\"";
      for (char c : name) {
        if (c == '"') quoted += '"';
        quoted += c;
      }
      name = quoted + "\"";
    }
    out << name << ',';
    if (!s.flagged) out << FormatDouble(s.fairness);
    out << ',';
    if (!s.flagged) out << FormatDouble(s.accuracy);
    out << ',' << (s.flagged ? "true" : "false") << '\n';
  }
  return out.str();
}

namespace {

std::string XmlEscape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Feature order for display: fairness ascending, flagged last, ties by index.
std::vector<std::size_t> DisplayOrder(const ImportanceReport& imp) {
  std::vector<std::size_t> order(imp.scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& sa = imp.scores[a];
    const auto& sb = imp.scores[b];
    if (sa.flagged != sb.flagged) return !sa.flagged;
    if (sa.flagged) return false;
    return sa.fairness < sb.fairness;
  });
  return order;
}

}  // namespace

std::string RenderSvg(const RunReport& report) {
  const auto& imp = report.importance;
  const auto order = DisplayOrder(imp);

  constexpr double kLabelWidth = 240.0;
  constexpr double kPanelWidth = 320.0;
  constexpr double kGap = 40.0;
  constexpr double kRowHeight = 18.0;
  constexpr double kBarHeight = 12.0;
  constexpr double kTop = 70.0;
  constexpr double kBottom = 40.0;
  const double height = kTop + kRowHeight * static_cast<double>(order.size()) + kBottom;
  const double width = kLabelWidth + 2.0 * kPanelWidth + kGap + 20.0;

  double fair_max = 0.0;
  double acc_max = 0.0;
  for (const auto& s : imp.scores) {
    if (s.flagged) continue;
    fair_max = std::max(fair_max, std::fabs(s.fairness));
    acc_max = std::max(acc_max, std::fabs(s.accuracy));
  }
  if (fair_max == 0.0) fair_max = 1.0;
  if (acc_max == 0.0) acc_max = 1.0;

  struct Panel {
    const char* title;
    const char* css;
    const char* color;
    double left;
    double max_abs;
    bool fairness;
  };
  const Panel panels[] = {
      {"Fairness score", "fairness", "#1f77b4", kLabelWidth, fair_max, true},
      {"Accuracy score", "accuracy", "#d62728", kLabelWidth + kPanelWidth + kGap, acc_max, false},
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << FormatFixed(width, 0)
      << "\" height=\"" << FormatFixed(height, 0) << "\" viewBox=\"0 0 "
      << FormatFixed(width, 0) << ' ' << FormatFixed(height, 0) << "\" "
      << "font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<metadata>" << XmlEscape(Json::parse(report.config_json).dump()) << "</metadata>\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << FormatFixed(width, 0) << "\" height=\""
      << FormatFixed(height, 0) << "\" fill=\"#ffffff\"/>\n";
  svg << "<text x=\"10\" y=\"20\" font-size=\"13\">" << XmlEscape(MethodName(imp.method))
      << " importance (bias: " << MetricName(imp.bias_metric)
      << ", loss: " << MetricName(imp.loss_metric) << ")</text>\n";
  svg << "<text x=\"10\" y=\"38\" fill=\"#555555\">Positive: feature improves fairness / "
         "accuracy. Negative: feature harms it.</text>\n";

  for (const auto& p : panels) {
    const double zero = p.left + kPanelWidth / 2.0;
    const double scale = (kPanelWidth / 2.0 - 4.0) / p.max_abs;
    svg << "<g class=\"panel " << p.css << "\">\n";
    svg << "<text x=\"" << FormatFixed(zero, 1) << "\" y=\"60\" text-anchor=\"middle\">"
        << p.title << "</text>\n";
    svg << "<line class=\"axis\" x1=\"" << FormatFixed(zero, 1) << "\" y1=\""
        << FormatFixed(kTop - 4.0, 1) << "\" x2=\"" << FormatFixed(zero, 1) << "\" y2=\""
        << FormatFixed(height - kBottom + 4.0, 1) << "\" stroke=\"#000000\"/>\n";
    for (std::size_t row = 0; row < order.size(); ++row) {
      const auto& s = imp.scores[order[row]];
      const double y = kTop + kRowHeight * static_cast<double>(row) + (kRowHeight - kBarHeight) / 2.0;
      if (s.flagged) {
        svg << "<text class=\"flag\" x=\"" << FormatFixed(zero + 4.0, 1) << "\" y=\""
            << FormatFixed(y + kBarHeight - 2.0, 1) << "\" fill=\"#888888\">undefined</text>\n";
        continue;
      }
      const double v = p.fairness ? s.fairness : s.accuracy;
      const double len = std::fabs(v) * scale;
      const double x = v < 0.0 ? zero - len : zero;
      svg << "<rect class=\"bar " << p.css << (v < 0.0 ? " neg" : " pos") << "\" x=\""
          << FormatFixed(x, 2) << "\" y=\"" << FormatFixed(y, 2) << "\" width=\""
          << FormatFixed(len, 2) << "\" height=\"" << FormatFixed(kBarHeight, 2)
          << "\" fill=\"" << p.color << "\"><title>" << XmlEscape(s.feature) << ": "
          << FormatDouble(v) << "</title></rect>\n";
    }
    svg << "<text x=\"" << FormatFixed(p.left, 1) << "\" y=\""
        << FormatFixed(height - kBottom + 18.0, 1) << "\">" << FormatFixed(-p.max_abs, 4)
        << "</text>\n";
    svg << "<text x=\"" << FormatFixed(p.left + kPanelWidth, 1) << "\" y=\""
        << FormatFixed(height - kBottom + 18.0, 1) << "\" text-anchor=\"end\">"
        << FormatFixed(p.max_abs, 4) << "</text>\n";
    svg << "</g>\n";
  }

  for (std::size_t row = 0; row < order.size(); ++row) {
    const double y = kTop + kRowHeight * static_cast<double>(row) + kRowHeight - 5.0;
    svg << "<text class=\"label\" x=\"" << FormatFixed(kLabelWidth - 8.0, 1) << "\" y=\""
        << FormatFixed(y, 1) << "\" text-anchor=\"end\">"
        << XmlEscape(imp.scores[order[row]].feature) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string RenderSummary(const RunReport& report, std::size_t top) {
  const auto& imp = report.importance;
  std::vector<std::size_t> valued;
  for (std::size_t i = 0; i < imp.scores.size(); ++i) {
    if (!imp.scores[i].flagged) valued.push_back(i);
  }
  auto by_fairness = valued;
  std::stable_sort(by_fairness.begin(), by_fairness.end(), [&](std::size_t a, std::size_t b) {
    return imp.scores[a].fairness < imp.scores[b].fairness;
  });
  auto by_accuracy = valued;
  std::stable_sort(by_accuracy.begin(), by_accuracy.end(), [&](std::size_t a, std::size_t b) {
    return imp.scores[a].accuracy > imp.scores[b].accuracy;
  });

  std::ostringstream out;
  out << "method: " << MethodName(imp.method) << " (bias " << MetricName(imp.bias_metric)
      << ", loss " << MetricName(imp.loss_metric) << ")\n";
  if (report.model.accuracy) out << "model accuracy: " << FormatFixed(*report.model.accuracy, 4) << "\n";
  if (report.model.fairness_dp_ratio) {
    out << "model fairness (dp_ratio): " << FormatFixed(*report.model.fairness_dp_ratio, 4) << "\n";
  }
  if (report.model.dp_difference) {
    out << "model dp_difference: " << FormatFixed(*report.model.dp_difference, 4) << "\n";
  }
  if (report.model.mse) out << "model mse: " << FormatFixed(*report.model.mse, 4) << "\n";
  if (report.model.regression_dp) {
    out << "model regression dp: " << FormatFixed(*report.model.regression_dp, 4) << "\n";
  }
  out << "top " << top << " bias-harming features (most negative fairness score):\n";
  for (std::size_t k = 0; k < std::min(top, by_fairness.size()); ++k) {
    const auto& s = imp.scores[by_fairness[k]];
    out << "  " << (k + 1) << ". " << s.feature << "  " << FormatFixed(s.fairness, 6) << "\n";
  }
  out << "top " << top << " accuracy-driving features (largest accuracy score):\n";
  for (std::size_t k = 0; k < std::min(top, by_accuracy.size()); ++k) {
    const auto& s = imp.scores[by_accuracy[k]];
    out << "  " << (k + 1) << ". " << s.feature << "  " << FormatFixed(s.accuracy, 6) << "\n";
  }
  const std::size_t flagged = imp.scores.size() - valued.size();
  if (flagged > 0) out << flagged << " features flagged undefined\n";
  for (const auto& w : imp.warnings) out << "warning: " << w << "\n";
  return out.str();
}

}  // namespace fairimp
