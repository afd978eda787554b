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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace jscds {

// Samples are rows.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

using SampleId = std::int64_t;
using ClassId = std::int32_t;

// Labeled feature vectors. Immutable after construction; the constructor enforces
// row alignment, unique ids, labels in range, every class populated and finite features.
class FeatureDataset {
 public:
  FeatureDataset(Matrix features, std::vector<ClassId> labels, std::vector<SampleId> ids,
                 int num_classes);

  const Matrix& features() const { return features_; }
  const std::vector<ClassId>& labels() const { return labels_; }
  const std::vector<SampleId>& ids() const { return ids_; }
  int num_classes() const { return num_classes_; }
  std::size_t size() const { return labels_.size(); }
  std::size_t dims() const { return static_cast<std::size_t>(features_.cols()); }

  // Rows in the given order; ids and labels travel with their rows.
  FeatureDataset subset(std::span<const std::size_t> rows) const;

  bool operator==(const FeatureDataset& other) const;

 private:
  Matrix features_;
  std::vector<ClassId> labels_;
  std::vector<SampleId> ids_;
  int num_classes_;
};

// Per-sample scalar scores, row-aligned with the dataset they were computed on.
struct ScoreTable {
  std::vector<SampleId> ids;
  std::vector<double> scores;
  std::string method;
  // Describes what a larger score means ("ambiguous", "distant", "forgettable").
  std::string higher_is;

  std::size_t size() const { return scores.size(); }
  bool operator==(const ScoreTable&) const = default;
};

struct SelectionResult {
  std::vector<SampleId> indices;  // sorted ascending, unique
  double fraction = 1.0;
  std::string method;
  std::uint64_t seed = 0;
  std::optional<ScoreTable> scores;

  bool operator==(const SelectionResult&) const = default;
};

// Number of samples a selector keeps: max(1, round(fraction * n)), rounding half away from zero.
std::size_t core_set_size(std::size_t n, double fraction);

// Throws ValidationError unless 0 < fraction <= 1.
void check_fraction(double fraction);

struct TrainConfig {
  double learning_rate = 0.001;
  int epochs = 50;
  int batch_size = 64;
  int reselect_interval = 10;
  int hidden_width = 32;
  // Epochs of full-data training before the first selection.
  int warmup_epochs = 0;
  std::uint64_t seed = 0;
  std::string method = "full";
  double fraction = 1.0;

  void validate() const;
};

struct SyntheticSpec {
  int num_classes = 3;
  int samples_per_class = 100;
  int dims = 16;
  double cluster_spread = 1.0;
  double center_separation = 3.0;
  double label_noise_rate = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Isotropic Gaussian clouds, one per class. Class centers sit on scaled unit axes so every
// pair of centers is exactly `center_separation` apart (requires num_classes <= dims).
// Sample i belongs to class i % J before noise; a label_noise_rate share of samples, picked
// from the seed, is relabeled to a uniformly drawn different class.
FeatureDataset generate_synthetic(const SyntheticSpec& spec);

// Labels the generator assigned before noise; used to count flips.
std::vector<ClassId> synthetic_clean_labels(const SyntheticSpec& spec);

// Dataset file: header `id,label,f0,...,f{d-1}` then one row per sample; features written with
// 9 significant digits. When num_classes is omitted it is max(label) + 1.
FeatureDataset load_dataset(const std::filesystem::path& path,
                            std::optional<int> num_classes = std::nullopt);
void save_dataset(const FeatureDataset& dataset, const std::filesystem::path& path);

// Selection file: JSON object with method, fraction, seed, indices (and optional scores).
void save_selection(const SelectionResult& result, const std::filesystem::path& path);
SelectionResult load_selection(const std::filesystem::path& path);

struct DatasetSplit {
  FeatureDataset train;
  FeatureDataset validation;
  FeatureDataset test;
};

// Seeded shuffle then cut by ratio. Each part keeps ascending id order.
DatasetSplit split_dataset(const FeatureDataset& dataset, std::uint64_t seed,
                           double train_ratio = 0.8, double validation_ratio = 0.1);

// SplitMix64 finalizer; derives independent stream seeds from a base seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace jscds
