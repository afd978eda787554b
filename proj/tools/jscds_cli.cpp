/*
 * Copyright 2026 The jscds Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 * SPDX-License-Identifier: Apache-2.0
 */

// Command-line front end: gen, select, train, benchmark, eval.
//
// Exit codes: 0 success, 1 usage error, 2 data or validation error,
// 3 benchmark finished with failed cells.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "jscds/benchmark.hpp"
#include "jscds/datamodel.hpp"
#include "jscds/divergence.hpp"
#include "jscds/errors.hpp"
#include "jscds/metrics.hpp"
#include "jscds/selection.hpp"
#include "jscds/trainer.hpp"

namespace {

using namespace jscds;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitPartial = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::filesystem::path sidecar(const std::filesystem::path& out, const std::string& suffix) {
  return out.parent_path() / (out.stem().string() + suffix);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

struct GlobalFlags {
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "json";
};

void add_train_flags(CLI::App* cmd, TrainConfig& config) {
  cmd->add_option("--epochs", config.epochs, "Training epochs")->capture_default_str();
  cmd->add_option("--lr", config.learning_rate, "Adam learning rate")->capture_default_str();
  cmd->add_option("--batch-size", config.batch_size, "Mini-batch size")->capture_default_str();
  cmd->add_option("--reselect-every", config.reselect_interval,
                  "Epochs between core-set reselections")
      ->capture_default_str();
  cmd->add_option("--hidden", config.hidden_width, "Hidden layer width")->capture_default_str();
  cmd->add_option("--warmup", config.warmup_epochs,
                  "Full-data epochs before the first selection")
      ->capture_default_str();
}

void add_jscds_flags(CLI::App* cmd, std::string& window, bool& stratified) {
  cmd->add_option("--window", window, "JSCDS band: near (|MI-avg| nearest) or rank")
      ->check(CLI::IsMember({"near", "rank"}))
      ->capture_default_str();
  cmd->add_flag("--stratified", stratified, "JSCDS per-class quotas");
}

JscdsOptions jscds_options(const std::string& window, bool stratified) {
  if (window != "near" && window != "rank") {
    throw UsageError("--window must be near or rank, got '" + window + "'");
  }
  JscdsOptions options;
  options.window = window == "rank" ? JscdsWindow::kRankWindow : JscdsWindow::kNearAverage;
  options.stratified = stratified;
  return options;
}

std::optional<int> classes_flag(int classes) {
  return classes > 0 ? std::optional<int>(classes) : std::nullopt;
}

// Full-data run whose correctness trace feeds forgetting.
EpochTrace reference_trace(const FeatureDataset& train, TrainConfig config) {
  config.method = "full";
  config.fraction = 1.0;
  return train_with_reselection(train, config, Selector{}).report.trace;
}

Method method_flag(const std::string& name) {
  try {
    return parse_method(name);
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
}

int run_gen(const SyntheticSpec& spec, const GlobalFlags& global) {
  if (global.out.empty()) throw UsageError("gen requires --out");
  SyntheticSpec s = spec;
  s.seed = global.seed;
  try {
    s.validate();
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
  const FeatureDataset dataset = generate_synthetic(s);
  save_dataset(dataset, global.out);
  const auto clean = synthetic_clean_labels(s);
  std::size_t flipped = 0;
  for (std::size_t i = 0; i < clean.size(); ++i) flipped += clean[i] != dataset.labels()[i];
  std::cout << "samples " << dataset.size() << "\ndims " << dataset.dims() << "\nclasses "
            << dataset.num_classes() << "\nnoisy_labels " << flipped << "\n";
  return 0;
}

struct SelectFlags {
  std::string data;
  int classes = 0;
  std::string method = "jscds";
  double fraction = 0.5;
  std::string model;
  std::string trace;
  std::string window = "near";
  bool stratified = false;
};

int run_select(const SelectFlags& flags, const GlobalFlags& global) {
  if (global.out.empty()) throw UsageError("select requires --out");
  const Method method = method_flag(flags.method);
  try {
    check_fraction(flags.fraction);
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
  if (method == Method::kForgetting && flags.trace.empty()) {
    throw UsageError("--method forgetting requires --trace");
  }
  const FeatureDataset dataset = load_dataset(flags.data, classes_flag(flags.classes));
  Matrix embeddings =
      flags.model.empty() ? dataset.features() : embed(load_model(flags.model), dataset.features());
  std::optional<EpochTrace> trace;
  if (!flags.trace.empty()) trace = load_trace(flags.trace);

  const auto start = std::chrono::steady_clock::now();
  const Selector selector = make_selector(method, jscds_options(flags.window, flags.stratified));
  const SelectionResult result =
      selector(SelectionInputs{dataset, &embeddings, trace ? &*trace : nullptr}, flags.fraction,
               global.seed);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  save_selection(result, global.out);

  std::cout << "method " << result.method << "\nk " << result.indices.size() << "\n";
  if (method == Method::kJscds && result.scores) {
    const auto& s = result.scores->scores;
    const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
    std::cout << "mi_min " << *lo << "\nmi_avg " << avg_mi(*result.scores) << "\nmi_max " << *hi
              << "\n";
  }
  std::cout << "selection_seconds " << seconds << "\n";
  return 0;
}

struct TrainFlags {
  std::string data;
  int classes = 0;
  std::string trace;
  std::string window = "near";
  bool stratified = false;
};

int run_train(const TrainFlags& flags, TrainConfig config, const GlobalFlags& global) {
  if (global.out.empty()) throw UsageError("train requires --out");
  config.seed = global.seed;
  try {
    config.validate();
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
  const Method method = method_flag(config.method);
  config.method = std::string(method_name(method));
  const FeatureDataset dataset = load_dataset(flags.data, classes_flag(flags.classes));
  const DatasetSplit split = split_dataset(dataset, global.seed);

  std::optional<EpochTrace> trace;
  if (!flags.trace.empty()) {
    trace = load_trace(flags.trace);
  } else if (method == Method::kForgetting) {
    trace = reference_trace(split.train, config);
  }
  const Selector selector = method == Method::kFull
                                ? Selector{}
                                : make_selector(method, jscds_options(flags.window, flags.stratified));
  const TrainResult result = train_with_reselection(split.train, config, selector, &split.test,
                                                    trace ? &*trace : nullptr);

  const std::filesystem::path out(global.out);
  nlohmann::ordered_json doc;
  doc["method"] = config.method;
  doc["fraction"] = config.fraction;
  doc["seed"] = config.seed;
  doc["train_size"] = split.train.size();
  doc["test_size"] = split.test.size();
  doc["report"] = to_json(result.report);
  write_text(out, doc.dump(2) + "\n");
  write_text(sidecar(out, ".timing.json"), timing_json(result.report).dump(2) + "\n");
  save_model(result.model, sidecar(out, ".model.json"));
  save_trace(result.report.trace, sidecar(out, ".trace.csv"));

  const auto& m = *result.report.heldout;
  std::printf("test acc %.4f precision %.4f recall %.4f f1 %.4f specificity %.4f\n", m.acc,
              m.precision_macro, m.recall_macro, m.f1_macro, m.specificity_macro);
  return 0;
}

struct BenchFlags {
  std::string data;
  int classes = 0;
  std::vector<std::string> methods = {"random", "moderate", "kcenter", "forgetting", "jscds"};
  std::vector<double> fractions = {0.1, 0.3, 0.5, 0.7};
  std::vector<std::uint64_t> seeds;
  std::string window = "near";
  bool stratified = false;
};

int run_benchmark_cmd(const BenchFlags& flags, const TrainConfig& config,
                      const GlobalFlags& global) {
  if (global.out.empty()) throw UsageError("benchmark requires --out");
  BenchmarkGrid grid;
  grid.methods = flags.methods;
  grid.fractions = flags.fractions;
  grid.seeds = flags.seeds.empty() ? std::vector<std::uint64_t>{global.seed} : flags.seeds;
  grid.config = config;
  grid.jscds = jscds_options(flags.window, flags.stratified);
  try {
    grid.validate();
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
  const FeatureDataset dataset = load_dataset(flags.data, classes_flag(flags.classes));
  const BenchmarkReport report = run_benchmark(dataset, grid);

  const std::filesystem::path out(global.out);
  if (global.format == "csv") {
    write_text(out, cells_csv(report));
  } else {
    write_text(out, to_json(report).dump(2) + "\n");
  }
  write_text(sidecar(out, ".series.csv"), series_csv(report));
  write_text(sidecar(out, ".timing.json"), timing_json(report).dump(2) + "\n");

  std::printf("%-12s %8s %7s %7s %7s %7s %7s %9s\n", "method", "fraction", "acc", "pre", "rec",
              "f1", "spe", "select_s");
  for (const auto& a : report.aggregates) {
    std::printf("%-12s %8.2f %7.2f %7.2f %7.2f %7.2f %7.2f %9.4f\n", a.method.c_str(),
                a.fraction, 100 * a.mean.acc, 100 * a.mean.precision, 100 * a.mean.recall,
                100 * a.mean.f1, 100 * a.mean.specificity, a.selection_seconds);
  }
  if (report.failures() > 0) {
    std::cerr << report.failures() << " benchmark cell(s) failed; see " << out << "\n";
    return kExitPartial;
  }
  return 0;
}

struct EvalFlags {
  std::string data;
  int classes = 0;
  std::string model;
};

int run_eval(const EvalFlags& flags, const GlobalFlags& global) {
  const FeatureDataset dataset = load_dataset(flags.data, classes_flag(flags.classes));
  const ClassifierState model = load_model(flags.model);
  if (model.num_classes() != dataset.num_classes()) {
    throw ConfigError("model has " + std::to_string(model.num_classes()) +
                      " classes, dataset has " + std::to_string(dataset.num_classes()));
  }
  const MetricsReport metrics =
      report(dataset.labels(), predict(model, dataset.features()), dataset.num_classes());
  if (global.format == "json") {
    const std::string text = to_json(metrics).dump(2) + "\n";
    if (global.out.empty()) {
      std::cout << text;
    } else {
      write_text(global.out, text);
    }
  } else {
    std::ostringstream text;
    text << "acc " << metrics.acc << "\nprecision " << metrics.precision_macro << "\nrecall "
         << metrics.recall_macro << "\nf1 " << metrics.f1_macro << "\nspecificity "
         << metrics.specificity_macro << "\n";
    if (global.out.empty()) {
      std::cout << text.str();
    } else {
      write_text(global.out, text.str());
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coreset selection with Jensen-Shannon scoring, baselines and a benchmark sweep"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags global;
  app.add_option("--seed", global.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--out", global.out, "Output file");
  app.add_option("--format", global.format, "Output format")
      ->check(CLI::IsMember({"json", "csv", "text"}))
      ->capture_default_str();

  SyntheticSpec spec;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic labeled dataset");
  gen->add_option("--classes", spec.num_classes, "Number of classes")->capture_default_str();
  gen->add_option("--per-class", spec.samples_per_class, "Samples per class")->capture_default_str();
  gen->add_option("--dims", spec.dims, "Feature dimensions")->capture_default_str();
  gen->add_option("--spread", spec.cluster_spread, "Per-axis standard deviation")
      ->capture_default_str();
  gen->add_option("--separation", spec.center_separation, "Distance between class centers")
      ->capture_default_str();
  gen->add_option("--noise", spec.label_noise_rate, "Share of labels flipped, in [0, 1)")
      ->capture_default_str();

  SelectFlags select_flags;
  auto* select = app.add_subcommand("select", "Pick a core set from a dataset");
  select->add_option("--data", select_flags.data, "Dataset file")->required();
  select->add_option("--classes", select_flags.classes, "Number of classes (default: inferred)");
  select->add_option("--method", select_flags.method,
                     "random, moderate, kcenter, forgetting, jscds or full")
      ->capture_default_str();
  select->add_option("--fraction", select_flags.fraction, "Share of samples kept")
      ->capture_default_str();
  select->add_option("--model", select_flags.model, "Model file; embeddings are its hidden layer");
  select->add_option("--trace", select_flags.trace, "Epoch trace file (forgetting)");
  add_jscds_flags(select, select_flags.window, select_flags.stratified);

  TrainConfig train_config;
  TrainFlags train_flags;
  auto* train = app.add_subcommand("train", "Train with periodic core-set reselection");
  train->add_option("--data", train_flags.data, "Dataset file")->required();
  train->add_option("--classes", train_flags.classes, "Number of classes (default: inferred)");
  train->add_option("--method", train_config.method, "Selector, or full for no pruning")
      ->capture_default_str();
  train->add_option("--fraction", train_config.fraction, "Share of samples kept")
      ->capture_default_str();
  train->add_option("--trace", train_flags.trace,
                    "Reference trace for forgetting (default: a full-data run)");
  add_train_flags(train, train_config);
  add_jscds_flags(train, train_flags.window, train_flags.stratified);

  TrainConfig bench_config;
  BenchFlags bench_flags;
  auto* bench = app.add_subcommand("benchmark", "Sweep methods x fractions x seeds");
  bench->add_option("--data", bench_flags.data, "Dataset file")->required();
  bench->add_option("--classes", bench_flags.classes, "Number of classes (default: inferred)");
  bench->add_option("--methods", bench_flags.methods, "Selectors to compare")
      ->delimiter(',')
      ->capture_default_str();
  bench->add_option("--fractions", bench_flags.fractions, "Core-set fractions")
      ->delimiter(',')
      ->capture_default_str();
  bench->add_option("--seeds", bench_flags.seeds, "Seeds (default: --seed)")->delimiter(',');
  add_train_flags(bench, bench_config);
  add_jscds_flags(bench, bench_flags.window, bench_flags.stratified);

  EvalFlags eval_flags;
  auto* eval = app.add_subcommand("eval", "Score a saved model on a dataset");
  eval->add_option("--data", eval_flags.data, "Dataset file")->required();
  eval->add_option("--classes", eval_flags.classes, "Number of classes (default: inferred)");
  eval->add_option("--model", eval_flags.model, "Model file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gen) return run_gen(spec, global);
    if (*select) return run_select(select_flags, global);
    if (*train) return run_train(train_flags, train_config, global);
    if (*bench) return run_benchmark_cmd(bench_flags, bench_config, global);
    if (*eval) return run_eval(eval_flags, global);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
