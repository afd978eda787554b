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

#include "jscds/benchmark.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "jscds/errors.hpp"
#include "jscds/trainer.hpp"

namespace jscds {

void BenchmarkGrid::validate() const {
  if (methods.empty()) throw ValidationError("benchmark needs at least one method");
  if (fractions.empty()) throw ValidationError("benchmark needs at least one fraction");
  if (seeds.empty()) throw ValidationError("benchmark needs at least one seed");
  for (const auto& m : methods) parse_method(m);
  for (double f : fractions) check_fraction(f);
  TrainConfig probe = config;
  probe.fraction = 1.0;
  probe.validate();
}

std::size_t BenchmarkReport::failures() const {
  std::size_t failed = 0;
  for (const auto& c : reference) failed += c.ok() ? 0 : 1;
  for (const auto& c : cells) failed += c.ok() ? 0 : 1;
  return failed;
}

namespace {

std::string format_fraction(double f) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", f);
  return buf;
}

BenchmarkCell run_cell(const DatasetSplit& split, const TrainConfig& config,
                       const Selector& selector, const EpochTrace* reference_trace,
                       EpochTrace* trace_out) {
  BenchmarkCell cell;
  cell.method = config.method;
  cell.fraction = config.fraction;
  cell.seed = config.seed;
  try {
    auto result = train_with_reselection(split.train, config, selector, &split.test,
                                         reference_trace);
    cell.metrics = result.report.heldout;
    cell.reselection_epochs = result.report.reselection_epochs;
    cell.selection_seconds = result.report.selection_seconds;
    cell.train_seconds = result.report.train_seconds;
    if (trace_out != nullptr) *trace_out = std::move(result.report.trace);
  } catch (const std::exception& e) {
    cell.error = e.what();
  }
  return cell;
}

MetricSummary summary_of(const MetricsReport& m) {
  return {m.acc, m.precision_macro, m.recall_macro, m.f1_macro, m.specificity_macro};
}

nlohmann::ordered_json summary_json(const MetricSummary& s) {
  return {{"acc", s.acc},
          {"precision", s.precision},
          {"recall", s.recall},
          {"f1", s.f1},
          {"specificity", s.specificity}};
}

CellAggregate aggregate_group(const std::string& method, double fraction,
                              const std::vector<const BenchmarkCell*>& group) {
  CellAggregate agg;
  agg.method = method;
  agg.fraction = fraction;
  std::vector<MetricSummary> values;
  for (const auto* c : group) {
    if (!c->ok()) continue;
    values.push_back(summary_of(*c->metrics));
    agg.selection_seconds += c->selection_seconds;
    agg.train_seconds += c->train_seconds;
  }
  agg.successes = values.size();
  if (values.empty()) return agg;
  const auto n = static_cast<double>(values.size());
  agg.selection_seconds /= n;
  agg.train_seconds /= n;

  auto fields = [](MetricSummary& s) {
    return std::array<double*, 5>{&s.acc, &s.precision, &s.recall, &s.f1, &s.specificity};
  };
  auto mean_fields = fields(agg.mean);
  auto std_fields = fields(agg.std);
  for (std::size_t f = 0; f < 5; ++f) {
    double sum = 0.0;
    for (auto& v : values) sum += *fields(v)[f];
    const double mean = sum / n;
    double sq = 0.0;
    for (auto& v : values) sq += (*fields(v)[f] - mean) * (*fields(v)[f] - mean);
    *mean_fields[f] = mean;
    *std_fields[f] = values.size() > 1 ? std::sqrt(sq / (n - 1.0)) : 0.0;
  }
  return agg;
}

}  // namespace

std::vector<CellAggregate> aggregate(const std::vector<BenchmarkCell>& reference,
                                     const std::vector<BenchmarkCell>& cells) {
  std::vector<CellAggregate> out;
  std::vector<const BenchmarkCell*> ref;
  for (const auto& c : reference) ref.push_back(&c);
  out.push_back(aggregate_group("full", 1.0, ref));

  // Keyed by (method, fraction) in first-seen order.
  std::vector<std::pair<std::string, double>> order;
  std::map<std::pair<std::string, double>, std::vector<const BenchmarkCell*>> groups;
  for (const auto& c : cells) {
    const auto key = std::make_pair(c.method, c.fraction);
    if (!groups.contains(key)) order.push_back(key);
    groups[key].push_back(&c);
  }
  for (const auto& key : order) out.push_back(aggregate_group(key.first, key.second, groups[key]));
  return out;
}

BenchmarkReport run_benchmark(const FeatureDataset& dataset, const BenchmarkGrid& grid) {
  grid.validate();
  const auto start = std::chrono::steady_clock::now();
  BenchmarkReport report;
  report.grid = grid;

  std::vector<BenchmarkCell> cells;  // seed-major while running
  for (std::uint64_t seed : grid.seeds) {
    const DatasetSplit split =
        split_dataset(dataset, seed, grid.train_ratio, grid.validation_ratio);
    report.train_size = split.train.size();
    report.test_size = split.test.size();

    TrainConfig config = grid.config;
    config.seed = seed;
    config.method = "full";
    config.fraction = 1.0;
    EpochTrace reference_trace;
    report.reference.push_back(run_cell(split, config, Selector{}, nullptr, &reference_trace));
    const EpochTrace* trace = report.reference.back().ok() ? &reference_trace : nullptr;

    for (const auto& method_text : grid.methods) {
      const Method method = parse_method(method_text);
      const Selector selector = make_selector(method, grid.jscds);
      for (double fraction : grid.fractions) {
        config.method = std::string(method_name(method));
        config.fraction = fraction;
        cells.push_back(run_cell(split, config, selector, trace, nullptr));
      }
    }
  }

  // Reorder to method-major, then fraction, then seed.
  const std::size_t per_seed = grid.methods.size() * grid.fractions.size();
  for (std::size_t m = 0; m < per_seed; ++m) {
    for (std::size_t s = 0; s < grid.seeds.size(); ++s) {
      report.cells.push_back(std::move(cells[s * per_seed + m]));
    }
  }
  report.aggregates = aggregate(report.reference, report.cells);
  report.total_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

nlohmann::ordered_json to_json(const BenchmarkReport& report) {
  const auto& g = report.grid;
  nlohmann::ordered_json doc;
  doc["grid"] = {{"methods", g.methods},
                 {"fractions", g.fractions},
                 {"seeds", g.seeds},
                 {"config",
                  {{"learning_rate", g.config.learning_rate},
                   {"epochs", g.config.epochs},
                   {"batch_size", g.config.batch_size},
                   {"reselect_interval", g.config.reselect_interval},
                   {"hidden_width", g.config.hidden_width},
                   {"warmup_epochs", g.config.warmup_epochs}}},
                 {"jscds_window",
                  g.jscds.window == JscdsWindow::kRankWindow ? "rank" : "near_average"},
                 {"jscds_stratified", g.jscds.stratified},
                 {"split", {g.train_ratio, g.validation_ratio, 1.0 - g.train_ratio - g.validation_ratio}}};
  doc["train_size"] = report.train_size;
  doc["test_size"] = report.test_size;

  auto cell_json = [](const BenchmarkCell& c) {
    nlohmann::ordered_json j;
    j["method"] = c.method;
    j["fraction"] = c.fraction;
    j["seed"] = c.seed;
    j["status"] = c.ok() ? "ok" : "failed";
    if (c.ok()) {
      j["metrics"] = to_json(*c.metrics);
      j["reselection_epochs"] = c.reselection_epochs;
    } else {
      j["error"] = c.error;
    }
    return j;
  };
  auto reference = nlohmann::ordered_json::array();
  for (const auto& c : report.reference) reference.push_back(cell_json(c));
  doc["reference"] = std::move(reference);
  auto cells = nlohmann::ordered_json::array();
  for (const auto& c : report.cells) cells.push_back(cell_json(c));
  doc["cells"] = std::move(cells);

  auto aggregates = nlohmann::ordered_json::array();
  for (const auto& a : report.aggregates) {
    aggregates.push_back({{"method", a.method},
                          {"fraction", a.fraction},
                          {"successes", a.successes},
                          {"mean", summary_json(a.mean)},
                          {"std", summary_json(a.std)}});
  }
  doc["aggregates"] = std::move(aggregates);
  doc["failed_cells"] = report.failures();
  return doc;
}

namespace {

MetricSummary summary_from_json(const nlohmann::ordered_json& j) {
  return MetricSummary{j.at("acc").get<double>(), j.at("precision").get<double>(),
                       j.at("recall").get<double>(), j.at("f1").get<double>(),
                       j.at("specificity").get<double>()};
}

BenchmarkCell cell_from_json(const nlohmann::ordered_json& j) {
  BenchmarkCell c;
  c.method = j.at("method").get<std::string>();
  c.fraction = j.at("fraction").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  const auto status = j.at("status").get<std::string>();
  if (status == "ok") {
    c.metrics = metrics_from_json(j.at("metrics"));
    c.reselection_epochs = j.at("reselection_epochs").get<std::vector<int>>();
  } else if (status == "failed") {
    c.error = j.at("error").get<std::string>();
  } else {
    throw ValidationError("unknown cell status '" + status + "'");
  }
  return c;
}

}  // namespace

BenchmarkReport benchmark_from_json(const nlohmann::ordered_json& doc) {
  try {
    BenchmarkReport report;
    auto& g = report.grid;
    const auto& grid = doc.at("grid");
    g.methods = grid.at("methods").get<std::vector<std::string>>();
    g.fractions = grid.at("fractions").get<std::vector<double>>();
    g.seeds = grid.at("seeds").get<std::vector<std::uint64_t>>();
    const auto& config = grid.at("config");
    g.config.learning_rate = config.at("learning_rate").get<double>();
    g.config.epochs = config.at("epochs").get<int>();
    g.config.batch_size = config.at("batch_size").get<int>();
    g.config.reselect_interval = config.at("reselect_interval").get<int>();
    g.config.hidden_width = config.at("hidden_width").get<int>();
    g.config.warmup_epochs = config.at("warmup_epochs").get<int>();
    const auto window = grid.at("jscds_window").get<std::string>();
    if (window != "rank" && window != "near_average") {
      throw ValidationError("unknown jscds_window '" + window + "'");
    }
    g.jscds.window = window == "rank" ? JscdsWindow::kRankWindow : JscdsWindow::kNearAverage;
    g.jscds.stratified = grid.at("jscds_stratified").get<bool>();
    const auto split = grid.at("split").get<std::vector<double>>();
    if (split.size() != 3) throw ValidationError("split must list three ratios");
    g.train_ratio = split[0];
    g.validation_ratio = split[1];
    g.validate();

    report.train_size = doc.at("train_size").get<std::size_t>();
    report.test_size = doc.at("test_size").get<std::size_t>();
    for (const auto& c : doc.at("reference")) report.reference.push_back(cell_from_json(c));
    for (const auto& c : doc.at("cells")) report.cells.push_back(cell_from_json(c));
    for (const auto& a : doc.at("aggregates")) {
      CellAggregate agg;
      agg.method = a.at("method").get<std::string>();
      agg.fraction = a.at("fraction").get<double>();
      agg.successes = a.at("successes").get<std::size_t>();
      agg.mean = summary_from_json(a.at("mean"));
      agg.std = summary_from_json(a.at("std"));
      report.aggregates.push_back(agg);
    }
    if (doc.at("failed_cells").get<std::size_t>() != report.failures()) {
      throw ValidationError("failed_cells does not match the cell list");
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed benchmark report: ") + e.what());
  }
}

BenchmarkReport load_benchmark_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return benchmark_from_json(doc);
}

nlohmann::ordered_json timing_json(const BenchmarkReport& report) {
  auto cell_timing = [](const BenchmarkCell& c) {
    return nlohmann::ordered_json{{"method", c.method},
                                  {"fraction", c.fraction},
                                  {"seed", c.seed},
                                  {"selection_seconds", c.selection_seconds},
                                  {"train_seconds", c.train_seconds}};
  };
  nlohmann::ordered_json doc;
  auto reference = nlohmann::ordered_json::array();
  for (const auto& c : report.reference) reference.push_back(cell_timing(c));
  doc["reference"] = std::move(reference);
  auto cells = nlohmann::ordered_json::array();
  for (const auto& c : report.cells) cells.push_back(cell_timing(c));
  doc["cells"] = std::move(cells);
  auto aggregates = nlohmann::ordered_json::array();
  for (const auto& a : report.aggregates) {
    aggregates.push_back({{"method", a.method},
                          {"fraction", a.fraction},
                          {"selection_seconds", a.selection_seconds},
                          {"train_seconds", a.train_seconds}});
  }
  doc["aggregates"] = std::move(aggregates);
  doc["total_seconds"] = report.total_seconds;
  return doc;
}

std::string cells_csv(const BenchmarkReport& report) {
  std::ostringstream out;
  out << "method,fraction,seed,status,acc,precision,recall,f1,specificity\n";
  auto row = [&out](const BenchmarkCell& c) {
    out << c.method << ',' << format_fraction(c.fraction) << ',' << c.seed << ','
        << (c.ok() ? "ok" : "failed");
    if (c.ok()) {
      const auto s = summary_of(*c.metrics);
      char buf[128];
      std::snprintf(buf, sizeof(buf), ",%.6f,%.6f,%.6f,%.6f,%.6f", s.acc, s.precision, s.recall,
                    s.f1, s.specificity);
      out << buf;
    } else {
      out << ",,,,,";
    }
    out << '\n';
  };
  for (const auto& c : report.reference) row(c);
  for (const auto& c : report.cells) row(c);
  return out.str();
}

std::string series_csv(const BenchmarkReport& report) {
  std::ostringstream out;
  out << "metric,method,fraction,mean,std\n";
  const char* names[] = {"acc", "precision", "recall", "f1", "specificity"};
  for (std::size_t f = 0; f < 5; ++f) {
    for (const auto& a : report.aggregates) {
      const double means[] = {a.mean.acc, a.mean.precision, a.mean.recall, a.mean.f1,
                              a.mean.specificity};
      const double stds[] = {a.std.acc, a.std.precision, a.std.recall, a.std.f1,
                             a.std.specificity};
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%s,%s,%s,%.6f,%.6f\n", names[f], a.method.c_str(),
                    format_fraction(a.fraction).c_str(), means[f], stds[f]);
      out << buf;
    }
  }
  return out.str();
}

}  // namespace jscds
