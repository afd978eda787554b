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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jscds/datamodel.hpp"
#include "jscds/divergence.hpp"

namespace jscds {

// Per-sample correct/incorrect flags, one column per training epoch.
class EpochTrace {
 public:
  EpochTrace() = default;
  explicit EpochTrace(std::vector<SampleId> ids) : ids_(std::move(ids)) {}

  void append_epoch(std::span<const std::uint8_t> correct);

  const std::vector<SampleId>& ids() const { return ids_; }
  std::size_t num_samples() const { return ids_.size(); }
  std::size_t num_epochs() const { return columns_.size(); }
  bool correct(std::size_t row, std::size_t epoch) const { return columns_[epoch][row] != 0; }

  // Flags of one sample across epochs.
  std::vector<std::uint8_t> row(std::size_t row) const;

  bool operator==(const EpochTrace&) const = default;

 private:
  std::vector<SampleId> ids_;
  std::vector<std::vector<std::uint8_t>> columns_;
};

// Trace file: header `id,e0,e1,...`, one row of 0/1 flags per sample.
EpochTrace load_trace(const std::filesystem::path& path);
void save_trace(const EpochTrace& trace, const std::filesystem::path& path);

// Number of correct -> incorrect transitions; +inf when the sample is never correct.
double forgetting_count(std::span<const std::uint8_t> correctness);

// Indicator-weighted class means of the distributions.
ClusterCenterSet cluster_centers(std::span<const ProbabilityVector> distributions,
                                 std::span<const ClassId> labels, int num_classes);

// Arithmetic mean of all scores.
double avg_mi(const ScoreTable& scores);

// Splits k across classes in proportion to their sizes (largest remainder, ties to the
// smaller class id). The result sums to k.
std::vector<std::size_t> apportion(std::span<const std::size_t> class_sizes, std::size_t k);

enum class JscdsWindow {
  // k samples with the smallest |MI - AvgMI|.
  kNearAverage,
  // k consecutive samples in descending-MI rank order, centered on where AvgMI falls.
  kRankWindow,
};

struct JscdsOptions {
  JscdsWindow window = JscdsWindow::kNearAverage;
  // Per-class quotas instead of one global pool.
  bool stratified = false;
  LogBase base = LogBase::kNatural;
};

// Row positions of the k entries closest to the table's mean, ties to the smaller id.
std::vector<std::size_t> select_near_average(const ScoreTable& scores, std::size_t k);

// Row positions of the k-long window in descending-score order around the mean's rank.
std::vector<std::size_t> select_rank_window(const ScoreTable& scores, std::size_t k);

SelectionResult select_jscds(const FeatureDataset& dataset, const Matrix& embeddings,
                             double fraction, std::uint64_t seed, const JscdsOptions& options = {});

SelectionResult select_random(const FeatureDataset& dataset, double fraction, std::uint64_t seed);

SelectionResult select_moderate(const FeatureDataset& dataset, const Matrix& embeddings,
                                double fraction, std::uint64_t seed);

// Row positions in the order the greedy max-min cover adds them, starting from the smallest id.
std::vector<std::size_t> kcenter_greedy_order(const FeatureDataset& dataset,
                                              const Matrix& embeddings, std::size_t k);

SelectionResult select_kcenter_greedy(const FeatureDataset& dataset, const Matrix& embeddings,
                                      double fraction, std::uint64_t seed);

SelectionResult select_forgetting(const FeatureDataset& dataset, const EpochTrace& trace,
                                  double fraction, std::uint64_t seed);

// Every dataset id, for training without pruning.
SelectionResult select_full(const FeatureDataset& dataset, double fraction, std::uint64_t seed);

enum class Method { kFull, kRandom, kModerate, kKCenterGreedy, kForgetting, kJscds };

// Accepts full, random, moderate, kcenter (or kcenter_greedy), forgetting, jscds.
Method parse_method(std::string_view name);
std::string_view method_name(Method method);

// What a selector may consume. Pointers are null when unavailable.
struct SelectionInputs {
  const FeatureDataset& dataset;
  const Matrix* embeddings = nullptr;
  const EpochTrace* trace = nullptr;
};

using Selector =
    std::function<SelectionResult(const SelectionInputs&, double fraction, std::uint64_t seed)>;

// Dispatches to the matching select_* function; ConfigError if a required input is missing.
Selector make_selector(Method method, JscdsOptions options = {});

}  // namespace jscds
