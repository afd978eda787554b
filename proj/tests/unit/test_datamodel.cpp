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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <algorithm>
#include <limits>
#include <set>

#include "doctest.h"
#include "jscds/datamodel.hpp"
#include "jscds/errors.hpp"

using namespace jscds;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "jscds_test_datamodel";
  std::filesystem::create_directories(dir);
  return dir / name;
}

void write(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Nearest class mean on the dataset's own labels.
double nearest_center_accuracy(const FeatureDataset& ds) {
  const int J = ds.num_classes();
  Matrix centers = Matrix::Zero(J, ds.features().cols());
  std::vector<double> counts(J, 0.0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    centers.row(ds.labels()[i]) += ds.features().row(i);
    counts[ds.labels()[i]] += 1.0;
  }
  for (int c = 0; c < J; ++c) centers.row(c) /= counts[c];
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    int best = 0;
    for (int c = 1; c < J; ++c) {
      if ((ds.features().row(i) - centers.row(c)).squaredNorm() <
          (ds.features().row(i) - centers.row(best)).squaredNorm()) {
        best = c;
      }
    }
    hits += best == ds.labels()[i];
  }
  return static_cast<double>(hits) / ds.size();
}

}  // namespace

TEST_CASE("FeatureDataset enforces its invariants") {
  Matrix f(2, 1);
  f << 1.0, 2.0;
  CHECK_NOTHROW(FeatureDataset(f, {0, 1}, {0, 1}, 2));
  CHECK_THROWS_AS(FeatureDataset(f, {0, 1}, {3, 3}, 2), ValidationError);
  CHECK_THROWS_AS(FeatureDataset(f, {0, 2}, {0, 1}, 2), ValidationError);
  CHECK_THROWS_AS(FeatureDataset(f, {0, 0}, {0, 1}, 2), ConfigError);
  CHECK_THROWS_AS(FeatureDataset(f, {0}, {0, 1}, 2), ShapeError);
  f(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(FeatureDataset(f, {0, 1}, {0, 1}, 2), NumericError);
}

TEST_CASE("core_set_size rounds half away from zero and keeps at least one") {
  CHECK(core_set_size(10, 0.25) == 3);  // 2.5 -> 3
  CHECK(core_set_size(10, 0.1) == 1);
  CHECK(core_set_size(3, 0.1) == 1);    // 0.3 -> 0 -> clamped to 1
  CHECK(core_set_size(100, 0.5) == 50);
  CHECK(core_set_size(7, 1.0) == 7);
  CHECK_THROWS_AS(core_set_size(10, 0.0), ValidationError);
  CHECK_THROWS_AS(core_set_size(10, 1.5), ValidationError);
}

TEST_CASE("generate_synthetic: zero-noise shape") {
  SyntheticSpec spec;
  spec.num_classes = 2;
  spec.samples_per_class = 10;
  spec.dims = 2;
  spec.label_noise_rate = 0.0;
  const auto ds = generate_synthetic(spec);
  CHECK(ds.size() == 20);
  CHECK(ds.dims() == 2);
  CHECK(ds.labels() == synthetic_clean_labels(spec));
  CHECK(std::count(ds.labels().begin(), ds.labels().end(), 0) == 10);
  for (std::size_t i = 0; i < ds.size(); ++i) CHECK(ds.ids()[i] == static_cast<SampleId>(i));
}

TEST_CASE("generate_synthetic: noise flips exactly the requested count") {
  SyntheticSpec spec;
  spec.num_classes = 3;
  spec.samples_per_class = 100;
  spec.label_noise_rate = 0.1;
  spec.seed = 5;
  const auto noisy = generate_synthetic(spec);
  SyntheticSpec clean_spec = spec;
  clean_spec.label_noise_rate = 0.0;
  const auto clean = generate_synthetic(clean_spec);
  CHECK(noisy.features() == clean.features());
  int flipped = 0;
  for (std::size_t i = 0; i < noisy.size(); ++i) flipped += noisy.labels()[i] != clean.labels()[i];
  CHECK(flipped == 30);
}

TEST_CASE("generate_synthetic is a pure function of the spec") {
  SyntheticSpec spec;
  spec.label_noise_rate = 0.2;
  spec.seed = 42;
  CHECK(generate_synthetic(spec) == generate_synthetic(spec));
  SyntheticSpec other = spec;
  other.seed = 43;
  CHECK_FALSE(generate_synthetic(spec) == generate_synthetic(other));
}

TEST_CASE("generate_synthetic: well-separated clouds are nearest-center separable") {
  SyntheticSpec spec;
  spec.num_classes = 4;
  spec.samples_per_class = 200;
  spec.dims = 8;
  spec.cluster_spread = 1.0;
  spec.center_separation = 10.0;
  spec.seed = 3;
  CHECK(nearest_center_accuracy(generate_synthetic(spec)) == 1.0);
}

TEST_CASE("SyntheticSpec validation names the field") {
  SyntheticSpec spec;
  spec.label_noise_rate = 1.5;
  CHECK_THROWS_WITH_AS(spec.validate(), doctest::Contains("label_noise_rate"), ValidationError);
  spec = SyntheticSpec{};
  spec.cluster_spread = 0.0;
  CHECK_THROWS_WITH_AS(spec.validate(), doctest::Contains("cluster_spread"), ValidationError);
  spec = SyntheticSpec{};
  spec.num_classes = 20;
  spec.dims = 4;
  CHECK_THROWS_AS(generate_synthetic(spec), ValidationError);
}

TEST_CASE("dataset file round trip") {
  SyntheticSpec spec;
  spec.num_classes = 2;
  spec.samples_per_class = 3;  // 6 samples
  spec.dims = 3;
  spec.seed = 9;
  const auto ds = generate_synthetic(spec).subset(std::vector<std::size_t>{0, 1, 2, 3, 4});
  const auto path = temp_file("five.csv");
  save_dataset(ds, path);
  const auto loaded = load_dataset(path, 2);
  CHECK(loaded.labels() == ds.labels());
  CHECK(loaded.ids() == ds.ids());
  CHECK(loaded.features().isApprox(ds.features(), 1e-8));
  // Printed precision is a fixed point: a second save is byte-identical.
  const auto again = temp_file("five_again.csv");
  save_dataset(loaded, again);
  CHECK(slurp(path) == slurp(again));
  CHECK(load_dataset(again, 2) == loaded);
}

TEST_CASE("dataset parse errors carry the line number") {
  const auto path = temp_file("bad.csv");
  write(path, "id,label,f0,f1\n0,0,1.0,2.0\n1,3,1.0,2.0\n");
  try {
    load_dataset(path, 3);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }

  write(path, "id,label,f0,f1\n0,0,1.0,2.0\n1,1,1.0\n");
  try {
    load_dataset(path);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }

  write(path, "id,label,f0\n0,0,nan\n");
  CHECK_THROWS_AS(load_dataset(path), ParseError);
  write(path, "id,label,f0\n0,0,abc\n");
  CHECK_THROWS_AS(load_dataset(path), ParseError);
  CHECK_THROWS_AS(load_dataset(temp_file("missing.csv")), ParseError);
}

TEST_CASE("selection file round trip and validation") {
  SelectionResult r;
  r.indices = {2, 5, 9};
  r.fraction = 0.3;
  r.method = "jscds";
  r.seed = 17;
  const auto path = temp_file("sel.json");
  save_selection(r, path);
  CHECK(load_selection(path) == r);

  r.scores = ScoreTable{{2, 5, 9}, {0.1, 0.2, 0.3}, "jscds", "ambiguous"};
  save_selection(r, path);
  CHECK(load_selection(path) == r);

  write(path, R"({"method":"random","fraction":0.5,"seed":1,"indices":[1,1,2]})");
  CHECK_THROWS_AS(load_selection(path), ValidationError);
  write(path, R"({"method":"random","fraction":0,"seed":1,"indices":[1,2]})");
  CHECK_THROWS_AS(load_selection(path), ValidationError);
  write(path, R"({"method":"random","seed":1,"indices":[1,2]})");
  CHECK_THROWS_AS(load_selection(path), ParseError);
}

TEST_CASE("split_dataset is stratified, disjoint and seeded") {
  SyntheticSpec spec;
  spec.samples_per_class = 100;
  const auto ds = generate_synthetic(spec);
  const auto split = split_dataset(ds, 4);
  CHECK(split.train.size() == 240);
  CHECK(split.validation.size() == 30);
  CHECK(split.test.size() == 30);
  std::set<SampleId> all;
  for (const auto* part : {&split.train, &split.validation, &split.test}) {
    CHECK(std::is_sorted(part->ids().begin(), part->ids().end()));
    all.insert(part->ids().begin(), part->ids().end());
  }
  CHECK(all.size() == ds.size());
  CHECK(split_dataset(ds, 4).test == split.test);
  CHECK_FALSE(split_dataset(ds, 5).test == split.test);
}

TEST_CASE("TrainConfig validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.reselect_interval = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = TrainConfig{};
  c.reselect_interval = 60;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = TrainConfig{};
  c.learning_rate = 0.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = TrainConfig{};
  c.fraction = 0.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}
