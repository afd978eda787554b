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

namespace jscds {

// Lower clamp applied to every probability entry before renormalizing.
inline constexpr double kProbabilityFloor = 1e-12;

// A discrete distribution with every entry >= kProbabilityFloor and unit sum (within 1e-9).
class ProbabilityVector {
 public:
  ProbabilityVector() = default;

  // Validates; throws ValidationError for entries below the floor or a sum off by more than 1e-9.
  static ProbabilityVector from_values(std::vector<double> values);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  bool operator==(const ProbabilityVector&) const = default;

 private:
  explicit ProbabilityVector(std::vector<double> values) : values_(std::move(values)) {}

  friend ProbabilityVector softmax(std::span<const double>);
  friend ProbabilityVector floor_and_normalize(std::vector<double>);

  std::vector<double> values_;
};

enum class LogBase { kNatural, kTwo };

// Max-shifted softmax, then floored at kProbabilityFloor and renormalized.
ProbabilityVector softmax(std::span<const double> logits);

// Clamps below at kProbabilityFloor and rescales to unit sum. Input must be finite and nonnegative.
ProbabilityVector floor_and_normalize(std::vector<double> values);

// softmax of each row.
std::vector<ProbabilityVector> softmax_rows(const Matrix& logits);

double kl(const ProbabilityVector& p, const ProbabilityVector& q, LogBase base = LogBase::kNatural);

// Jensen-Shannon divergence: 0.5 kl(p, m) + 0.5 kl(q, m), m = (p + q) / 2.
// With natural log the value lies in [0, ln 2].
double jsd(const ProbabilityVector& p, const ProbabilityVector& q,
           LogBase base = LogBase::kNatural);

// One center distribution per class, plus the sample count that produced it.
struct ClusterCenterSet {
  std::vector<ProbabilityVector> centers;
  std::vector<std::size_t> counts;

  int num_classes() const { return static_cast<int>(centers.size()); }
};

// Per-sample JSD against the center of the sample's own class. Labels index `centers`.
ScoreTable mi_scores(std::span<const ProbabilityVector> distributions,
                     std::span<const ClassId> labels, std::span<const SampleId> ids,
                     const ClusterCenterSet& centers, LogBase base = LogBase::kNatural);

}  // namespace jscds
