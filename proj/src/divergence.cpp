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

#include "jscds/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "jscds/errors.hpp"

namespace jscds {

ProbabilityVector ProbabilityVector::from_values(std::vector<double> values) {
  if (values.empty()) throw ValidationError("probability vector must be non-empty");
  double sum = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericError("probability vector has a non-finite entry");
    if (v < kProbabilityFloor) {
      throw ValidationError("probability entry " + std::to_string(v) + " below floor");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError("probability vector sums to " + std::to_string(sum));
  }
  return ProbabilityVector(std::move(values));
}

ProbabilityVector floor_and_normalize(std::vector<double> values) {
  if (values.empty()) throw ValidationError("probability vector must be non-empty");
  double sum = 0.0;
  for (double& v : values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw NumericError("cannot normalize a negative or non-finite entry");
    }
    v = std::max(v, kProbabilityFloor);
    sum += v;
  }
  for (double& v : values) v /= sum;
  return ProbabilityVector(std::move(values));
}

ProbabilityVector softmax(std::span<const double> logits) {
  if (logits.empty()) throw ValidationError("softmax input must be non-empty");
  double peak = logits[0];
  for (double v : logits) {
    if (!std::isfinite(v)) throw NumericError("softmax input has a non-finite entry");
    peak = std::max(peak, v);
  }
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    sum += out[i];
  }
  bool floored = false;
  for (double& v : out) {
    v /= sum;
    if (v < kProbabilityFloor) {
      v = kProbabilityFloor;
      floored = true;
    }
  }
  if (floored) {
    double total = 0.0;
    for (double v : out) total += v;
    for (double& v : out) v /= total;
  }
  return ProbabilityVector(std::move(out));
}

std::vector<ProbabilityVector> softmax_rows(const Matrix& logits) {
  std::vector<ProbabilityVector> rows;
  rows.reserve(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    rows.push_back(softmax(std::span<const double>(logits.row(i).data(),
                                                   static_cast<std::size_t>(logits.cols()))));
  }
  return rows;
}

namespace {

void check_same_length(const ProbabilityVector& p, const ProbabilityVector& q) {
  if (p.size() != q.size()) {
    throw ShapeError("distribution lengths differ: " + std::to_string(p.size()) + " vs " +
                     std::to_string(q.size()));
  }
}

double log_scale(LogBase base) {
  return base == LogBase::kTwo ? 1.0 / std::numbers::ln2 : 1.0;
}

// Sum of p(w) ln(p(w) / m(w)) with m = (p + q) / 2 formed on the fly.
double kl_to_midpoint(std::span<const double> p, std::span<const double> q) {
  double sum = 0.0;
  for (std::size_t w = 0; w < p.size(); ++w) {
    if (p[w] == 0.0) continue;
    sum += p[w] * std::log(2.0 * p[w] / (p[w] + q[w]));
  }
  return sum;
}

}  // namespace

double kl(const ProbabilityVector& p, const ProbabilityVector& q, LogBase base) {
  check_same_length(p, q);
  double sum = 0.0;
  for (std::size_t w = 0; w < p.size(); ++w) {
    if (p[w] == 0.0) continue;
    sum += p[w] * std::log(p[w] / q[w]);
  }
  return sum * log_scale(base);
}

double jsd(const ProbabilityVector& p, const ProbabilityVector& q, LogBase base) {
  check_same_length(p, q);
  const double value =
      0.5 * kl_to_midpoint(p.values(), q.values()) + 0.5 * kl_to_midpoint(q.values(), p.values());
  // Rounding can leave tiny negatives for identical inputs.
  return std::max(value, 0.0) * log_scale(base);
}

ScoreTable mi_scores(std::span<const ProbabilityVector> distributions,
                     std::span<const ClassId> labels, std::span<const SampleId> ids,
                     const ClusterCenterSet& centers, LogBase base) {
  if (distributions.size() != labels.size() || labels.size() != ids.size()) {
    throw ShapeError("distributions, labels and ids must be row-aligned");
  }
  ScoreTable table;
  table.method = "jscds";
  table.higher_is = "ambiguous";
  table.ids.assign(ids.begin(), ids.end());
  table.scores.resize(distributions.size());
  for (std::size_t i = 0; i < distributions.size(); ++i) {
    const ClassId label = labels[i];
    if (label < 0 || label >= centers.num_classes()) {
      throw ConfigError("no cluster center for class " + std::to_string(label));
    }
    table.scores[i] = jsd(distributions[i], centers.centers[label], base);
  }
  return table;
}

}  // namespace jscds
