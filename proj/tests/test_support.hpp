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

#include <numeric>
#include <random>
#include <vector>

#include "jscds/datamodel.hpp"
#include "jscds/trainer.hpp"

namespace testing_support {

struct Instance {
  jscds::FeatureDataset dataset;
  jscds::Matrix embeddings;
  std::vector<std::vector<double>> rows;  // embeddings as plain vectors for oracles
  std::vector<int> labels;
  std::vector<std::int64_t> ids;
};

// Random labeled embeddings with every class populated. Ids are a shuffled, gappy set so that
// id order and row order disagree.
inline Instance random_instance(std::mt19937_64& rng, std::size_t n, int classes, std::size_t dims,
                                double scale = 2.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % classes);
  std::shuffle(labels.begin(), labels.end(), rng);
  std::vector<std::int64_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<std::int64_t>(3 * i + 1);
  std::shuffle(ids.begin(), ids.end(), rng);

  jscds::Matrix emb(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dims));
  std::vector<std::vector<double>> rows(n, std::vector<double>(dims));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t w = 0; w < dims; ++w) {
      rows[i][w] = gauss(rng) + (w == static_cast<std::size_t>(labels[i]) % dims ? 1.5 : 0.0);
      emb(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(w)) = rows[i][w];
    }
  }
  std::vector<jscds::ClassId> class_ids(labels.begin(), labels.end());
  jscds::FeatureDataset ds(emb, class_ids, ids, classes);
  return Instance{std::move(ds), emb, rows, labels, ids};
}

// Parameters and gradients flattened in a fixed order: w1, w2, b1, b2.
inline std::vector<double> pack(const jscds::ClassifierState& m) {
  std::vector<double> v;
  for (const jscds::Matrix* w : {&m.w1, &m.w2}) v.insert(v.end(), w->data(), w->data() + w->size());
  for (const jscds::Vector* b : {&m.b1, &m.b2}) v.insert(v.end(), b->data(), b->data() + b->size());
  return v;
}

inline std::vector<double> pack(const jscds::Gradients& g) {
  std::vector<double> v;
  for (const jscds::Matrix* w : {&g.w1, &g.w2}) v.insert(v.end(), w->data(), w->data() + w->size());
  for (const jscds::Vector* b : {&g.b1, &g.b2}) v.insert(v.end(), b->data(), b->data() + b->size());
  return v;
}

inline void unpack(jscds::ClassifierState& m, const std::vector<double>& v) {
  std::size_t at = 0;
  for (jscds::Matrix* w : {&m.w1, &m.w2}) {
    std::copy(v.begin() + at, v.begin() + at + w->size(), w->data());
    at += w->size();
  }
  for (jscds::Vector* b : {&m.b1, &m.b2}) {
    std::copy(v.begin() + at, v.begin() + at + b->size(), b->data());
    at += b->size();
  }
}

}  // namespace testing_support
