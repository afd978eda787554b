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
#include <span>
#include <vector>

#include "jscds/datamodel.hpp"
#include "json.hpp"

namespace jscds {

// counts[true * J + predicted].
struct ConfusionMatrix {
  int num_classes = 0;
  std::vector<std::size_t> counts;

  std::size_t at(int truth, int predicted) const {
    return counts[static_cast<std::size_t>(truth) * num_classes + predicted];
  }
  std::size_t total() const;
  bool operator==(const ConfusionMatrix&) const = default;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double specificity = 0.0;
  bool operator==(const ClassMetrics&) const = default;
};

// Accuracy plus macro (unweighted class mean) precision, recall, F1 and specificity.
// Any 0/0 ratio counts as 0.
struct MetricsReport {
  double acc = 0.0;
  double precision_macro = 0.0;
  double recall_macro = 0.0;
  double f1_macro = 0.0;
  double specificity_macro = 0.0;
  std::vector<ClassMetrics> per_class;
  ConfusionMatrix confusion;
  bool operator==(const MetricsReport&) const = default;
};

ConfusionMatrix confusion_matrix(std::span<const ClassId> labels, std::span<const ClassId> preds,
                                 int num_classes);

MetricsReport report(std::span<const ClassId> labels, std::span<const ClassId> preds,
                     int num_classes);

nlohmann::ordered_json to_json(const MetricsReport& metrics);
// Inverse of to_json. Throws ValidationError on a malformed document.
MetricsReport metrics_from_json(const nlohmann::ordered_json& doc);

}  // namespace jscds
