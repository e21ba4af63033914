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
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "fairimp/cli.hpp"
#include "fairimp/errors.hpp"
#include "fairimp/report.hpp"

namespace fairimp {
namespace {

namespace fs = std::filesystem;

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t Count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult Run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

// Fresh scratch directory per test case.
struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name)
      : dir(fs::temp_directory_path() / ("fairimp_test_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator/(const std::string& leaf) const { return (dir / leaf).string(); }
};

RunReport HandReport() {
  RunReport r;
  r.config_json = R"({"seed":1})";
  r.model.accuracy = 0.9;
  r.model.fairness_dp_ratio = 0.8;
  r.importance.method = Method::kOcclusionMinipatch;
  FeatureScore a;
  a.feature = "b_pos";
  a.fairness = 0.1;
  a.accuracy = 0.05;
  a.support = 3;
  FeatureScore b;
  b.feature = "a_neg";
  b.fairness = -0.2;
  b.accuracy = -0.01;
  b.support = 4;
  r.importance.scores = {a, b};
  return r;
}

TEST_CASE("SVG encodes score signs around the zero axis") {
  const std::string svg = RenderSvg(HandReport());
  CHECK(Count(svg, "class=\"bar fairness neg\"") == 1);
  CHECK(Count(svg, "class=\"bar fairness pos\"") == 1);
  CHECK(Count(svg, "class=\"bar accuracy neg\"") == 1);
  CHECK(svg.find("<metadata>") != std::string::npos);
  CHECK(svg.find("a_neg") < svg.find("b_pos"));
  CHECK(RenderSvg(HandReport()) == svg);

  // The negative bar ends at the axis; the positive bar starts there.
  const auto axis_pos = svg.find("class=\"axis\" x1=\"");
  const double axis = std::stod(svg.substr(axis_pos + 17));
  const auto neg = svg.find("class=\"bar fairness neg\" x=\"");
  const double neg_x = std::stod(svg.substr(neg + 28));
  const double neg_w = std::stod(svg.substr(svg.find("width=\"", neg) + 7));
  const auto pos = svg.find("class=\"bar fairness pos\" x=\"");
  const double pos_x = std::stod(svg.substr(pos + 28));
  CHECK(neg_x + neg_w == doctest::Approx(axis).epsilon(1e-6));
  CHECK(pos_x == doctest::Approx(axis));
  CHECK(neg_x < axis);
}

TEST_CASE("flagged features render as undefined and as empty CSV cells") {
  RunReport r = HandReport();
  r.importance.scores[0].flagged = true;
  r.importance.scores[0].flag_reason = "in every patch";
  const std::string svg = RenderSvg(r);
  CHECK(Count(svg, "undefined") == 2);
  const std::string csv = ReportToCsv(r);
  CHECK(csv.find("# config: {\"seed\":1}\n") == 0);
  CHECK(csv.find("feature,fairness_score,accuracy_score,flagged\n") != std::string::npos);
  CHECK(csv.find("b_pos,,,true\n") != std::string::npos);
  CHECK(csv.find("a_neg,-0.2,-0.01,false\n") != std::string::npos);
  CHECK(csv.find("nan") == std::string::npos);
}

TEST_CASE("report JSON round trip") {
  RunReport r = HandReport();
  r.importance.scores[1].fairness_stddev = 0.03;
  r.importance.warnings = {"something"};
  const std::string json = ReportToJson(r);
  CHECK(ReportToJson(ReportFromJson(json)) == json);
  for (const char* key : {"\"schema_version\"", "\"config\"", "\"model_accuracy\"",
                          "\"model_fairness_dp_ratio\"", "\"scores\"", "\"warnings\"",
                          "\"stddev\"", "\"flagged\""}) {
    CHECK(json.find(key) != std::string::npos);
  }
  CHECK_THROWS_AS(ReportFromJson("{\"scores\": 3}"), ParameterError);
  CHECK_THROWS_AS(ReportFromJson("not json"), ParameterError);
}

TEST_CASE("summary lists the most harmful and most useful features") {
  const std::string s = RenderSummary(HandReport());
  CHECK(s.find("1. a_neg") != std::string::npos);
  CHECK(s.find("1. b_pos") != std::string::npos);
}

TEST_CASE("exit code mapping") {
  CHECK(cli::ExitCodeFor(ErrorCategory::kConfig) == 2);
  CHECK(cli::ExitCodeFor(ErrorCategory::kData) == 3);
  CHECK(cli::ExitCodeFor(ErrorCategory::kCompute) == 4);
}

TEST_CASE("simulate writes the dataset, truth and schema") {
  Scratch tmp("simulate");
  const auto r = Run({"simulate", "--seed", "3", "--out", tmp / "a.csv"});
  REQUIRE(r.code == 0);
  const std::string csv = Slurp(tmp / "a.csv");
  CHECK(Count(csv, "\n") == 1001);
  CHECK(Count(csv.substr(0, csv.find('\n')), ",") == 11);
  CHECK(fs::exists(tmp / "a.truth.json"));
  CHECK(fs::exists(tmp / "a.schema.json"));
  REQUIRE(Run({"simulate", "--seed", "3", "--out", tmp / "b.csv"}).code == 0);
  CHECK(Slurp(tmp / "b.csv") == csv);
  CHECK(Run({"simulate", "--m", "3", "--out", tmp / "c.csv"}).code == 2);
}

TEST_CASE("importance runs are reproducible and self-describing") {
  Scratch tmp("importance");
  const std::vector<std::string> base = {"importance", "--method", "perm", "--repetitions", "1",
                                         "--seed", "7", "--n", "300"};
  auto first = base;
  first.insert(first.end(), {"--out-dir", tmp / "one"});
  auto second = base;
  second.insert(second.end(), {"--out-dir", tmp / "two", "--workers", "3"});
  REQUIRE(Run(first).code == 0);
  REQUIRE(Run(second).code == 0);
  const std::string csv = Slurp(tmp / "one/scores.csv");
  CHECK(csv == Slurp(tmp / "two/scores.csv"));
  CHECK(Slurp(tmp / "one/report.json") == Slurp(tmp / "two/report.json"));
  CHECK(Count(csv, "\n") == 12);
  CHECK(csv.find("nan") == std::string::npos);
  CHECK(Slurp(tmp / "one/chart.svg").find("<metadata>") != std::string::npos);

  REQUIRE(Run({"importance", "--config", tmp / "one/report.json", "--out-dir", tmp / "three"}).code == 0);
  CHECK(Slurp(tmp / "three/report.json") == Slurp(tmp / "one/report.json"));

  const auto rep = Run({"report", tmp / "one/report.json", "--out", tmp / "chart.svg"});
  CHECK(rep.code == 0);
  CHECK(Slurp(tmp / "chart.svg") == Slurp(tmp / "one/chart.svg"));
  CHECK(rep.out.find("accuracy-driving") != std::string::npos);
}

TEST_CASE("minipatch run on a file dataset with the occlusion method") {
  Scratch tmp("mp");
  REQUIRE(Run({"simulate", "--task", "regression", "--n", "200", "--seed", "2", "--out",
               tmp / "reg.csv"}).code == 0);
  const auto r = Run({"importance", "--data", tmp / "reg.csv", "--schema", tmp / "reg.schema.json",
                      "--K", "40", "--out-dir", tmp / "out", "--no-svg"});
  REQUIRE(r.code == 0);
  CHECK_FALSE(fs::exists(tmp / "out/chart.svg"));
  const std::string json = Slurp(tmp / "out/report.json");
  CHECK(json.find("\"method\": \"occlusion_minipatch\"") != std::string::npos);
  CHECK(json.find("\"bias_metric\": \"reg_dp\"") != std::string::npos);
  const auto occl = Run({"importance", "--data", tmp / "reg.csv", "--schema",
                         tmp / "reg.schema.json", "--method", "occl", "--out-dir", tmp / "occl"});
  CHECK(occl.code == 0);
}

TEST_CASE("configuration, data and compute errors map to exit codes") {
  Scratch tmp("errors");
  CHECK(Run({}).code == 2);
  CHECK(Run({"importance", "--bogus"}).code == 2);
  CHECK(Run({"importance", "--method", "shap", "--out-dir", tmp / "x"}).code == 2);
  CHECK(Run({"importance", "--metric", "mse", "--out-dir", tmp / "x"}).code == 2);
  CHECK(Run({"importance", "--model", "{\"kind\":\"svm\"}", "--out-dir", tmp / "x"}).code == 2);
  CHECK(Run({"importance", "--data", tmp / "missing.csv", "--out-dir", tmp / "x"}).code == 2);

  std::ofstream(tmp / "schema.json") << R"({"target":"y","positive_class":"1","protected":"g"})";
  CHECK(Run({"importance", "--data", tmp / "missing.csv", "--schema", tmp / "schema.json",
             "--out-dir", tmp / "x"}).code == 3);

  // A single group-2 row: every patch's held-out set holds one row, so all
  // patches are skipped.
  {
    std::ofstream csv(tmp / "lonely.csv");
    csv << "a,b,y,g\n";
    for (int i = 0; i < 20; ++i) csv << i << ',' << (i * 7) % 5 << ',' << i % 2 << ',' << (i == 3 ? 2 : 1) << '\n';
  }
  const auto lonely = Run({"importance", "--data", tmp / "lonely.csv", "--schema", tmp / "schema.json",
                           "--in-sample", "--n-frac", "0.95", "--m-frac", "0.5", "--K", "4",
                           "--out-dir", tmp / "x"});
  CHECK(lonely.code == 4);
  CHECK(lonely.err.find("EnsembleError") != std::string::npos);

  CHECK(Run({"report", tmp / "schema.json"}).code == 2);
  CHECK(Run({"report", tmp / "nothing.json"}).code == 2);
}

TEST_CASE("tiny K on a wide dataset flags features without failing") {
  // With m = 20 of M = 96 and K = 3 a feature sits in all patches with
  // probability (20/96)^3, so about one feature is expected to be flagged.
  Scratch tmp("tinyk");
  const std::string data = std::string(FAIRIMP_DATA_DIR);
  const auto r = Run({"importance", "--data", data + "/adult.csv", "--schema",
                      data + "/schemas/adult.json", "--K", "3", "--max-rows", "2000",
                      "--seed", "4", "--out-dir", tmp / "out"});
  REQUIRE(r.code == 0);
  const RunReport report = ReportFromJson(Slurp(tmp / "out/report.json"));
  CHECK(report.importance.scores.size() == 96);
  std::size_t flagged = 0;
  for (const auto& s : report.importance.scores) {
    CHECK(s.flagged == (s.support == 0));
    flagged += s.flagged ? 1 : 0;
  }
  CHECK(flagged >= 1);
  CHECK(flagged <= 5);
  CHECK(r.err.find("warning") != std::string::npos);
  CHECK(Count(Slurp(tmp / "out/scores.csv"), ",,,true") == flagged);
}

}  // namespace
}  // namespace fairimp
