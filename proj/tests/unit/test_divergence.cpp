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

#include <cmath>
#include <numbers>
#include <random>

#include "../oracles.hpp"
#include "doctest.h"
#include "jscds/divergence.hpp"
#include "jscds/errors.hpp"

using namespace jscds;

namespace {

ProbabilityVector pv(std::vector<double> v) { return ProbabilityVector::from_values(std::move(v)); }

}  // namespace

TEST_CASE("softmax examples") {
  const std::vector<double> zero{0.0, 0.0};
  auto p = softmax(zero);
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-15));

  for (double c : {-1000.0, -3.0, 0.0, 7.5, 1000.0}) {
    const std::vector<double> flat(4, c);
    const auto q = softmax(flat);
    for (double v : q.values()) CHECK(std::abs(v - 0.25) < 1e-15);
  }

  const std::vector<double> logs{std::log(1.0), std::log(3.0)};
  p = softmax(logs);
  CHECK(std::abs(p[0] - 0.25) < 1e-15);
  CHECK(std::abs(p[1] - 0.75) < 1e-15);

  const std::vector<double> bad{0.0, std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(softmax(bad), NumericError);
  CHECK_THROWS_AS(softmax(std::vector<double>{}), ValidationError);
}

TEST_CASE("softmax floors underflowing entries") {
  const std::vector<double> wide{0.0, -800.0};
  const auto p = softmax(wide);
  CHECK(p[1] == doctest::Approx(kProbabilityFloor / (1.0 + kProbabilityFloor)).epsilon(1e-15));
  CHECK(p[1] > 0.0);
  CHECK(std::abs(p[0] + p[1] - 1.0) < 1e-15);
}

TEST_CASE("softmax shift invariance (property)") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(1 + trial % 40);
    for (double& x : v) x = g(rng);
    std::vector<double> shifted = v;
    const double c = g(rng) * 10;
    for (double& x : shifted) x += c;
    const auto a = softmax(v), b = softmax(shifted);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-12);
  }
}

TEST_CASE("kl examples") {
  const auto half = pv({0.5, 0.5});
  const auto skew = pv({0.25, 0.75});
  CHECK(std::abs(kl(half, half)) < 1e-12);
  // oracle: 0.5 ln 2 + 0.5 ln(2/3)
  CHECK(kl(half, skew) == doctest::Approx(0.14384103622589042).epsilon(1e-12));
  CHECK(kl(skew, half) == doctest::Approx(0.13081203594113697).epsilon(1e-12));
  CHECK(kl(half, skew, LogBase::kTwo) ==
        doctest::Approx(0.14384103622589042 / std::numbers::ln2).epsilon(1e-12));
  CHECK_THROWS_AS(kl(half, pv({0.2, 0.3, 0.5})), ShapeError);
}

TEST_CASE("jsd examples") {
  const auto half = pv({0.5, 0.5});
  CHECK(jsd(half, half) <= 1e-12);
  const double eps = kProbabilityFloor;
  const auto left = pv({1.0 - eps, eps});
  const auto right = pv({eps, 1.0 - eps});
  CHECK(std::abs(jsd(left, right) - std::numbers::ln2) < 1e-6);
  // Direct evaluation of both KL terms against m = (0.375, 0.625).
  CHECK(jsd(half, pv({0.25, 0.75})) == doctest::Approx(0.033822075568605205).epsilon(1e-12));
  CHECK_THROWS_AS(jsd(half, pv({1.0})), ShapeError);
}

TEST_CASE("ProbabilityVector validation") {
  CHECK_THROWS_AS(pv({0.5, 0.6}), ValidationError);
  CHECK_THROWS_AS(pv({1.0, 0.0}), ValidationError);
  CHECK_THROWS_AS(pv({}), ValidationError);
  CHECK_NOTHROW(pv({0.3, 0.7}));
}

TEST_CASE("jsd and kl properties on random pairs") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> dim(2, 256);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t d = dim(rng);
    const auto a = oracle::random_distribution(rng, d);
    const auto b = oracle::random_distribution(rng, d);
    const auto p = floor_and_normalize(a), q = floor_and_normalize(b);
    const double value = jsd(p, q);
    CHECK(std::abs(value - jsd(q, p)) <= 1e-12);
    CHECK(value >= -1e-12);
    CHECK(value <= std::numbers::ln2 + 1e-9);
    CHECK(std::abs(value - oracle::jsd(a, b)) <= 1e-9);
    CHECK(kl(p, q) >= -1e-12);
    CHECK(std::abs(kl(p, q) - oracle::kl(a, b)) <= 1e-9);
    CHECK(jsd(p, p) <= 1e-12);
  }
}

TEST_CASE("mi_scores") {
  ClusterCenterSet centers;
  centers.centers = {pv({0.2, 0.8}), pv({0.6, 0.4})};
  centers.counts = {1, 2};
  const std::vector<ProbabilityVector> dists{pv({0.2, 0.8}), pv({0.5, 0.5}), pv({0.5, 0.5}),
                                             pv({0.9, 0.1})};
  const std::vector<ClassId> labels{0, 1, 1, 0};
  const std::vector<SampleId> ids{10, 11, 12, 13};
  const auto table = mi_scores(dists, labels, ids, centers);
  CHECK(table.ids == ids);
  CHECK(table.scores[0] == 0.0);
  CHECK(table.scores[1] == table.scores[2]);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& c = centers.centers[labels[i]];
    const oracle::Dist p(dists[i].values().begin(), dists[i].values().end());
    const oracle::Dist q(c.values().begin(), c.values().end());
    CHECK(std::abs(table.scores[i] - oracle::jsd(p, q)) < 1e-12);
  }

  const std::vector<ClassId> missing{0, 1, 2, 0};
  CHECK_THROWS_AS(mi_scores(dists, missing, ids, centers), ConfigError);
  CHECK_THROWS_AS(mi_scores(dists, std::vector<ClassId>{0, 1}, ids, centers), ShapeError);
}
