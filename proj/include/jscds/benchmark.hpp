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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "jscds/datamodel.hpp"
#include "jscds/metrics.hpp"
#include "jscds/selection.hpp"
#include "json.hpp"

namespace jscds {

struct BenchmarkGrid {
  std::vector<std::string> methods = {"random", "moderate", "kcenter", "forgetting", "jscds"};
  std::vector<double> fractions = {0.1, 0.3, 0.5, 0.7};
  std::vector<std::uint64_t> seeds = {0};
  // method, fraction and seed are overwritten per cell.
  TrainConfig config;
  JscdsOptions jscds;
  double train_ratio = 0.8;
  double validation_ratio = 0.1;

  void validate() const;
};

struct BenchmarkCell {
  std::string method;
  double fraction = 1.0;
  std::uint64_t seed = 0;
  std::optional<MetricsReport> metrics;  // held-out (test split)
  std::string error;                     // set when the cell failed
  std::vector<int> reselection_epochs;
  double selection_seconds = 0.0;
  double train_seconds = 0.0;

  bool ok() const { return metrics.has_value(); }
};

struct MetricSummary {
  double acc = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double specificity = 0.0;
};

struct CellAggregate {
  std::string method;
  double fraction = 1.0;
  std::size_t successes = 0;
  MetricSummary mean;
  MetricSummary std;  // sample standard deviation; 0 with fewer than two successes
  double selection_seconds = 0.0;  // mean over successes
  double train_seconds = 0.0;
};

struct BenchmarkReport {
  BenchmarkGrid grid;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::vector<BenchmarkCell> reference;  // full-data training, one per seed
  std::vector<BenchmarkCell> cells;      // method-major, then fraction, then seed
  std::vector<CellAggregate> aggregates;  // reference first (method "full")
  double total_seconds = 0.0;

  std::size_t failures() const;
};

// Per seed: stratified 8:1:1 split, one full-data reference run, then every (method, fraction)
// cell on the same split. A failing cell is recorded and the sweep continues.
BenchmarkReport run_benchmark(const FeatureDataset& dataset, const BenchmarkGrid& grid);

std::vector<CellAggregate> aggregate(const std::vector<BenchmarkCell>& reference,
                                     const std::vector<BenchmarkCell>& cells);

// Deterministic content: grid, metrics and aggregates.
nlohmann::ordered_json to_json(const BenchmarkReport& report);
// Inverse of to_json; timings come back as zero. Throws ValidationError on a malformed document.
BenchmarkReport benchmark_from_json(const nlohmann::ordered_json& doc);
BenchmarkReport load_benchmark_report(const std::filesystem::path& path);
// Wall-clock fields, kept out of the main document so reruns diff clean.
nlohmann::ordered_json timing_json(const BenchmarkReport& report);
// One row per cell.
std::string cells_csv(const BenchmarkReport& report);
// metric,method,fraction,mean,std rows for metric-vs-fraction plots.
std::string series_csv(const BenchmarkReport& report);

}  // namespace jscds
