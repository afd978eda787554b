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
#include <random>
#include <span>
#include <vector>

#include "jscds/datamodel.hpp"
#include "jscds/metrics.hpp"
#include "jscds/selection.hpp"
#include "json.hpp"

namespace jscds {

// d_in -> hidden (relu) -> classes perceptron. The relu hidden activation is the embedding
// that selectors consume.
struct ClassifierState {
  Matrix w1;  // d_in x hidden
  Vector b1;  // hidden
  Matrix w2;  // hidden x classes
  Vector b2;  // classes
  std::mt19937_64 rng;  // batch shuffling

  std::size_t input_dims() const { return static_cast<std::size_t>(w1.rows()); }
  std::size_t hidden_width() const { return static_cast<std::size_t>(w1.cols()); }
  int num_classes() const { return static_cast<int>(w2.cols()); }

  bool operator==(const ClassifierState& other) const;
};

struct Gradients {
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;
};

struct LossAndGrad {
  double loss = 0.0;
  Gradients grad;
};

// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
ClassifierState init_model(std::size_t input_dims, std::size_t hidden_width, int num_classes,
                           std::uint64_t seed);

// relu(x W1 + b1) per row.
Matrix embed(const ClassifierState& model, const Matrix& features);

Matrix forward(const ClassifierState& model, const Matrix& features);

// Mean softmax cross-entropy over the batch and its exact gradient.
LossAndGrad loss_and_grad(const ClassifierState& model, const Matrix& features,
                          std::span<const ClassId> labels);

// Argmax of the logits, ties to the smaller class id.
std::vector<ClassId> predict(const ClassifierState& model, const Matrix& features);

class AdamOptimizer {
 public:
  struct Options {
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
  };

  AdamOptimizer(const ClassifierState& model, Options options);

  void step(ClassifierState& model, const Gradients& grad);

 private:
  Options options_;
  long long t_ = 0;
  Gradients m_;
  Gradients v_;
};

struct TrainReport {
  std::vector<double> epoch_loss;
  std::vector<std::size_t> core_set_size;  // per epoch
  std::vector<int> reselection_epochs;
  std::vector<double> train_accuracy;  // full training set, per epoch
  EpochTrace trace;
  std::optional<MetricsReport> heldout;
  double selection_seconds = 0.0;
  double train_seconds = 0.0;
  double wall_seconds = 0.0;
};

struct TrainResult {
  ClassifierState model;
  TrainReport report;
};

// Trains on `train` with Adam. At every epoch e >= warmup_epochs with e % reselect_interval == 0
// the selector runs on embeddings of the full training set and the model trains only on its
// picks until the next reselection. An empty selector trains on everything (one recorded
// selection at epoch 0). Correctness of every training sample is recorded every epoch.
//
// Forgetting draws on the running trace once it spans two epochs and on `reference_trace`
// before that.
TrainResult train_with_reselection(const FeatureDataset& train, const TrainConfig& config,
                                   const Selector& selector,
                                   const FeatureDataset* heldout = nullptr,
                                   const EpochTrace* reference_trace = nullptr);

// Deterministic report content (no timings).
nlohmann::ordered_json to_json(const TrainReport& report);
nlohmann::ordered_json timing_json(const TrainReport& report);

void save_model(const ClassifierState& model, const std::filesystem::path& path);
ClassifierState load_model(const std::filesystem::path& path);

}  // namespace jscds
