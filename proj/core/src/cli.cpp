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

#include "fairimp/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "fairimp/errors.hpp"
#include "fairimp/random.hpp"
#include "json.hpp"

namespace fairimp::cli {

using Json = nlohmann::ordered_json;

int ExitCodeFor(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kConfig: return kExitConfig;
    case ErrorCategory::kData: return kExitData;
    case ErrorCategory::kCompute: return kExitCompute;
  }
  return kExitCompute;
}

namespace {

const char* MethodFlag(Method m) {
  switch (m) {
    case Method::kPermutation: return "perm";
    case Method::kOcclusionDirect: return "occl";
    case Method::kOcclusionMinipatch: return "mp";
  }
  return "?";
}

Method ParseMethodFlag(const std::string& s) {
  if (s == "perm") return Method::kPermutation;
  if (s == "occl") return Method::kOcclusionDirect;
  if (s == "mp") return Method::kOcclusionMinipatch;
  throw ParameterError("unknown method '" + s + "' (expected perm, occl or mp)");
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

// ---------------------------------------------------------------------------
// RunConfig

std::string RunConfig::ToJson() const {
  Json j;
  if (data_path.empty()) {
    j["data"] = {{"source", "synthetic"},
                 {"task", TaskName(task)},
                 {"n_samples", n_samples},
                 {"n_features", n_features}};
  } else {
    j["data"] = {{"source", "file"},
                 {"path", data_path},
                 {"schema", schema ? Json::parse(schema->ToJsonText()) : Json(nullptr)}};
  }
  j["max_rows"] = max_rows;
  j["model"] = Json::parse(model.ToJsonText());
  j["method"] = MethodFlag(method);
  j["metric"] = MetricName(bias_metric);
  j["loss"] = MetricName(loss_metric);
  j["split"] = split;
  j["in_sample"] = in_sample;
  j["seed"] = seed;
  j["repetitions"] = repetitions;
  j["refit"] = refit;
  j["n_frac"] = n_frac;
  j["m_frac"] = m_frac;
  j["K"] = patches;
  return j.dump();
}

RunConfig RunConfig::FromJson(const std::string& text) {
  RunConfig c;
  try {
    Json j = Json::parse(text);
    // Accept a whole report.json as well as a bare config object.
    if (j.contains("config") && j.contains("schema_version")) j = j.at("config");
    const auto& data = j.at("data");
    if (data.at("source").get<std::string>() == "file") {
      c.data_path = data.at("path").get<std::string>();
      if (data.contains("schema") && !data.at("schema").is_null()) {
        c.schema = SchemaConfig::FromJsonText(data.at("schema").dump());
        c.task = c.schema->task;
      }
    } else {
      c.task = ParseTask(data.at("task").get<std::string>());
      c.n_samples = data.at("n_samples").get<std::size_t>();
      c.n_features = data.at("n_features").get<std::size_t>();
    }
    c.max_rows = j.value("max_rows", std::size_t{0});
    c.model = ModelSpec::FromJsonText(j.at("model").dump());
    c.method = ParseMethodFlag(j.at("method").get<std::string>());
    c.bias_metric = ParseMetric(j.at("metric").get<std::string>());
    c.loss_metric = ParseMetric(j.at("loss").get<std::string>());
    c.split = j.at("split").get<double>();
    c.in_sample = j.at("in_sample").get<bool>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.repetitions = j.at("repetitions").get<int>();
    c.refit = j.at("refit").get<bool>();
    c.n_frac = j.at("n_frac").get<double>();
    c.m_frac = j.at("m_frac").get<double>();
    c.patches = j.at("K").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("malformed run config: ") + e.what());
  }
  return c;
}

// ---------------------------------------------------------------------------
// importance

Dataset LoadRunDataset(const RunConfig& config) {
  Dataset ds;
  if (config.data_path.empty()) {
    SyntheticParams p;
    p.task = config.task;
    p.n_samples = config.n_samples;
    p.n_features = config.n_features;
    p.seed = config.seed;
    ds = GenerateSynthetic(p).dataset;
  } else {
    if (!config.schema) throw ParameterError("--data requires --schema");
    ds = LoadTable(config.data_path, *config.schema);
  }
  if (config.max_rows > 0 && config.max_rows < ds.rows()) {
    Rng rng(DeriveSeed(config.seed, Stream::kSubsample));
    const auto rows = rng.SampleWithoutReplacement(ds.rows(), config.max_rows);
    ds = ds.select_rows(rows);
    if (ds.groups.groups_present() < 2) throw GroupError("row subsample holds < 2 groups");
  }
  return ds;
}

namespace {

ModelSummary Summarize(const TrainedModel& model, const Dataset& eval) {
  ModelSummary s;
  const auto y_hat = model.predict(eval.features);
  s.n_evaluated = eval.rows();
  if (eval.target.kind() == Task::kClassification) {
    s.accuracy = 1.0 - ClassificationError(eval.target.values(), y_hat);
    s.fairness_dp_ratio = DpRatio(y_hat, eval.groups);
    s.dp_difference = DpDifference(y_hat, eval.groups);
  } else {
    s.mse = Mse(eval.target.values(), y_hat);
    s.regression_dp = RegressionDp(y_hat, eval.groups);
  }
  return s;
}

void ValidateConfig(const RunConfig& c, Task task) {
  if (!(c.split > 0.0 && c.split < 1.0)) throw ParameterError("--split must lie in (0, 1)");
  if (c.repetitions < 1) throw ParameterError("--repetitions must be >= 1");
  if (c.patches < 1) throw ParameterError("--K must be >= 1");
  if (!(c.n_frac > 0.0 && c.n_frac < 1.0)) throw ParameterError("--n-frac must lie in (0, 1)");
  if (!(c.m_frac > 0.0 && c.m_frac < 1.0)) throw ParameterError("--m-frac must lie in (0, 1)");
  for (auto m : {c.bias_metric, c.loss_metric}) {
    if (!MetricSupportsTask(m, task)) {
      throw MetricError(std::string("metric '") + MetricName(m) + "' does not apply to " +
                        TaskName(task) + " targets");
    }
  }
  if (!IsBiasMetric(c.bias_metric)) throw MetricError("--metric must be a bias metric");
  if (!IsLossMetric(c.loss_metric)) throw MetricError("--loss must be a loss metric");
  c.model.Validate();
}

}  // namespace

RunReport RunImportance(const RunConfig& config, int workers) {
  ValidateConfig(config, config.schema ? config.schema->task : config.task);
  const Dataset ds = LoadRunDataset(config);

  Dataset train;
  Dataset eval;
  if (config.in_sample) {
    train = ds;
    eval = ds;
  } else {
    auto pair = Split(ds, config.split, DeriveSeed(config.seed, Stream::kSplit));
    train = std::move(pair.train);
    eval = std::move(pair.test);
  }

  RunReport report;
  report.config_json = config.ToJson();
  const TrainedModel baseline = Fit(config.model, train.features, train.target, workers);
  report.model = Summarize(baseline, eval);

  ImportanceOptions opts;
  opts.bias_metric = config.bias_metric;
  opts.loss_metric = config.loss_metric;
  opts.repetitions = config.repetitions;
  opts.refit = config.refit;
  opts.seed = config.seed;
  opts.workers = workers;

  switch (config.method) {
    case Method::kPermutation:
      report.importance = PermImportanceAll(train, eval, config.model, opts);
      break;
    case Method::kOcclusionDirect:
      report.importance = OcclImportanceDirectAll(train, eval, config.model, opts);
      break;
    case Method::kOcclusionMinipatch: {
      MinipatchConfig mp = MinipatchConfig::FromFractions(ds.rows(), ds.cols(), config.n_frac,
                                                          config.m_frac, config.patches);
      mp.bias_metric = config.bias_metric;
      mp.loss_metric = config.loss_metric;
      mp.seed = config.seed;
      mp.workers = workers;
      const auto ens = FitMinipatchEnsemble(ds, config.model, mp);
      report.importance = MpOcclusionScores(ens);
      break;
    }
  }
  if (IsFairnessOriented(config.bias_metric)) {
    report.importance.warnings.push_back(
        "bias metric is fairness-oriented (dp_ratio): positive fairness scores mark harmful features");
  }
  return report;
}

void WriteArtifacts(const RunReport& report, const std::filesystem::path& out_dir, bool svg) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  WriteFile(out_dir / "report.json", ReportToJson(report));
  WriteFile(out_dir / "scores.csv", ReportToCsv(report));
  if (svg) WriteFile(out_dir / "chart.svg", RenderSvg(report));
}

// ---------------------------------------------------------------------------
// simulate

void RunSimulate(const SimulateConfig& config) {
  const auto data = GenerateSynthetic(config.params);
  const auto parent = config.out.parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  WriteTable(data.dataset, config.out);

  const auto stem = config.out.parent_path() / config.out.stem();
  Json truth;
  truth["task"] = TaskName(config.params.task);
  truth["seed"] = config.params.seed;
  truth["n_samples"] = config.params.n_samples;
  truth["n_features"] = config.params.n_features;
  truth["beta"] = data.truth.beta;
  Json signal = Json::array();
  for (auto j : data.truth.signal_features) signal.push_back(data.dataset.feature_names[j]);
  Json biased = Json::array();
  for (auto j : data.truth.biased_features) biased.push_back(data.dataset.feature_names[j]);
  truth["signal_features"] = signal;
  truth["biased_features"] = biased;
  WriteFile(stem.string() + ".truth.json", truth.dump(2) + "\n");

  SchemaConfig schema;
  schema.target = "target";
  schema.task = config.params.task;
  if (config.params.task == Task::kClassification) schema.positive_class = "1";
  schema.protected_column = "group";
  WriteFile(stem.string() + ".schema.json", Json::parse(schema.ToJsonText()).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Entry point

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"fairimp: fairness and accuracy feature importance"};
  app.require_subcommand(1);
  app.fallthrough();
  int workers = 0;
  app.add_option("--workers", workers, "Worker threads (0 = all cores); never changes results");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Write a synthetic dataset and its ground truth");
  std::string sim_task = "classification";
  SimulateConfig sim_cfg;
  std::string sim_out = "synthetic.csv";
  sim->add_option("--task", sim_task, "classification or regression");
  sim->add_option("--n", sim_cfg.params.n_samples, "Rows (default 1000)");
  sim->add_option("--m", sim_cfg.params.n_features, "Features (default 10)");
  sim->add_option("--seed", sim_cfg.params.seed, "Generator seed");
  sim->add_option("--out", sim_out, "Output CSV path");

  // importance
  auto* imp = app.add_subcommand("importance", "Compute fairness/accuracy importance scores");
  std::string data_path, schema_path, task_name = "classification", model_text = "rf";
  std::string method_name = "mp", metric_name, loss_name, config_path, out_dir = "out";
  RunConfig rc;
  bool no_refit = false;
  bool keep_protected = false;
  bool no_svg = false;
  imp->add_option("--data", data_path, "Delimited data file (omit for synthetic data)");
  imp->add_option("--schema", schema_path, "Schema JSON for --data");
  imp->add_option("--task", task_name, "Synthetic task: classification or regression");
  imp->add_option("--n", rc.n_samples, "Synthetic rows");
  imp->add_option("--m", rc.n_features, "Synthetic features");
  imp->add_option("--model", model_text, "Model spec JSON or preset 'rf'");
  imp->add_option("--method", method_name, "perm, occl or mp");
  imp->add_option("--metric", metric_name, "Bias metric: dp_comp, dp_diff, dp_ratio, reg_dp");
  imp->add_option("--loss", loss_name, "Loss metric: error or mse");
  imp->add_option("--repetitions", rc.repetitions, "Permutation repetitions");
  imp->add_option("--n-frac", rc.n_frac, "Minipatch row fraction");
  imp->add_option("--m-frac", rc.m_frac, "Minipatch feature fraction");
  imp->add_option("--K", rc.patches, "Minipatch count");
  imp->add_option("--split", rc.split, "Test fraction");
  imp->add_option("--seed", rc.seed, "Master seed");
  imp->add_option("--max-rows", rc.max_rows, "Seeded row subsample after loading (0 = all)");
  imp->add_option("--out-dir", out_dir, "Output directory");
  imp->add_option("--config", config_path, "Re-run from a report.json or config JSON");
  imp->add_flag("--in-sample", rc.in_sample, "Fit and evaluate on all rows");
  imp->add_flag("--no-refit", no_refit, "Evaluate-only permutation (classic, no retraining)");
  imp->add_flag("--keep-protected-feature", keep_protected, "Keep the protected column as a feature");
  imp->add_flag("--no-svg", no_svg, "Skip chart.svg");

  // report
  auto* rep = app.add_subcommand("report", "Render chart.svg and a summary from report.json");
  std::string report_path, chart_path;
  rep->add_option("report", report_path, "report.json")->required();
  rep->add_option("--out", chart_path, "Chart path (default: next to the report)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (sim->parsed()) {
      sim_cfg.params.task = ParseTask(sim_task);
      sim_cfg.out = sim_out;
      RunSimulate(sim_cfg);
      out << "wrote " << sim_cfg.out.string() << "\n";
      return kExitOk;
    }

    if (imp->parsed()) {
      RunConfig config;
      if (!config_path.empty()) {
        config = RunConfig::FromJson(ReadFile(config_path));
      } else {
        config = rc;
        config.refit = !no_refit;
        config.method = ParseMethodFlag(method_name);
        if (!data_path.empty()) {
          if (schema_path.empty()) throw ParameterError("--data requires --schema");
          config.data_path = data_path;
          config.schema = SchemaConfig::FromFile(schema_path);
          config.schema->keep_protected_feature = keep_protected;
          config.task = config.schema->task;
        } else {
          config.task = ParseTask(task_name);
        }
        config.model = ModelSpec::FromJsonText(model_text);
        if (model_text == "rf" || model_text.find("\"seed\"") == std::string::npos) {
          config.model.seed = DeriveSeed(config.seed, Stream::kModel);
        }
        config.bias_metric = metric_name.empty() ? DefaultBiasMetric(config.task)
                                                 : ParseMetric(metric_name);
        config.loss_metric = loss_name.empty() ? DefaultLossMetric(config.task)
                                               : ParseMetric(loss_name);
      }
      const RunReport report = RunImportance(config, workers);
      WriteArtifacts(report, out_dir, !no_svg);
      out << RenderSummary(report);
      out << "wrote " << (std::filesystem::path(out_dir) / "report.json").string() << "\n";
      if (!report.importance.warnings.empty()) {
        err << report.importance.warnings.size() << " warning(s)\n";
        for (const auto& w : report.importance.warnings) err << "warning: " << w << "\n";
      }
      return kExitOk;
    }

    if (rep->parsed()) {
      RunReport report;
      try {
        report = ReportFromJson(ReadFile(report_path));
      } catch (const IoError& e) {
        throw ParameterError(e.what());
      }
      const std::filesystem::path chart =
          chart_path.empty() ? std::filesystem::path(report_path).parent_path() / "chart.svg"
                             : std::filesystem::path(chart_path);
      WriteFile(chart, RenderSvg(report));
      out << RenderSummary(report);
      out << "wrote " << chart.string() << "\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return ExitCodeFor(e.category());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitCompute;
  }
  return kExitConfig;
}

}  // namespace fairimp::cli
