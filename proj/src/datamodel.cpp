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

#include "jscds/datamodel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

#include "jscds/errors.hpp"
#include "json.hpp"

namespace jscds {

FeatureDataset::FeatureDataset(Matrix features, std::vector<ClassId> labels,
                               std::vector<SampleId> ids, int num_classes)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      ids_(std::move(ids)),
      num_classes_(num_classes) {
  if (num_classes_ < 2) {
    throw ValidationError("num_classes must be >= 2, got " + std::to_string(num_classes_));
  }
  if (static_cast<std::size_t>(features_.rows()) != labels_.size() ||
      labels_.size() != ids_.size()) {
    throw ShapeError("features, labels and ids must have the same number of rows");
  }
  if (labels_.empty()) throw ValidationError("dataset is empty");
  if (!features_.allFinite()) throw NumericError("dataset features contain non-finite values");

  std::unordered_set<SampleId> seen;
  seen.reserve(ids_.size());
  for (SampleId id : ids_) {
    if (!seen.insert(id).second) throw ValidationError("duplicate sample id " + std::to_string(id));
  }
  std::vector<std::size_t> per_class(num_classes_, 0);
  for (ClassId label : labels_) {
    if (label < 0 || label >= num_classes_) {
      throw ValidationError("label " + std::to_string(label) + " outside [0, " +
                            std::to_string(num_classes_) + ")");
    }
    ++per_class[label];
  }
  for (int c = 0; c < num_classes_; ++c) {
    if (per_class[c] == 0) throw ConfigError("class " + std::to_string(c) + " has no samples");
  }
}

FeatureDataset FeatureDataset::subset(std::span<const std::size_t> rows) const {
  Matrix features(static_cast<Eigen::Index>(rows.size()), features_.cols());
  std::vector<ClassId> labels;
  std::vector<SampleId> ids;
  labels.reserve(rows.size());
  ids.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= size()) throw ShapeError("subset row out of range");
    features.row(static_cast<Eigen::Index>(r)) = features_.row(static_cast<Eigen::Index>(rows[r]));
    labels.push_back(labels_[rows[r]]);
    ids.push_back(ids_[rows[r]]);
  }
  return FeatureDataset(std::move(features), std::move(labels), std::move(ids), num_classes_);
}

bool FeatureDataset::operator==(const FeatureDataset& other) const {
  return num_classes_ == other.num_classes_ && labels_ == other.labels_ && ids_ == other.ids_ &&
         features_.rows() == other.features_.rows() &&
         features_.cols() == other.features_.cols() && features_ == other.features_;
}

std::size_t core_set_size(std::size_t n, double fraction) {
  check_fraction(fraction);
  // std::round is half-away-from-zero.
  const auto k = static_cast<std::size_t>(std::round(fraction * static_cast<double>(n)));
  return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(n, 1));
}

void check_fraction(double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    std::ostringstream msg;
    msg << "fraction must be in (0, 1], got " << fraction;
    throw ValidationError(msg.str());
  }
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("learning_rate must be > 0");
  }
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (reselect_interval < 1 || reselect_interval > epochs) {
    throw ValidationError("reselect_interval must be in [1, epochs]");
  }
  if (hidden_width < 1) throw ValidationError("hidden_width must be >= 1");
  if (warmup_epochs < 0 || warmup_epochs >= epochs) {
    throw ValidationError("warmup_epochs must be in [0, epochs)");
  }
  check_fraction(fraction);
}

void SyntheticSpec::validate() const {
  if (num_classes < 2) throw ValidationError("num_classes must be >= 2");
  if (samples_per_class < 1) throw ValidationError("samples_per_class must be >= 1");
  if (dims < 1) throw ValidationError("dims must be >= 1");
  if (num_classes > dims) throw ValidationError("num_classes must be <= dims");
  if (!(cluster_spread > 0.0) || !std::isfinite(cluster_spread)) {
    throw ValidationError("cluster_spread must be > 0");
  }
  if (!(center_separation > 0.0) || !std::isfinite(center_separation)) {
    throw ValidationError("center_separation must be > 0");
  }
  if (!(label_noise_rate >= 0.0 && label_noise_rate < 1.0)) {
    throw ValidationError("label_noise_rate must be in [0, 1)");
  }
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

constexpr std::uint64_t kFeatureStream = 1;
constexpr std::uint64_t kNoiseStream = 2;

}  // namespace

std::vector<ClassId> synthetic_clean_labels(const SyntheticSpec& spec) {
  spec.validate();
  const std::size_t n = static_cast<std::size_t>(spec.num_classes) * spec.samples_per_class;
  std::vector<ClassId> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<ClassId>(i % spec.num_classes);
  return labels;
}

FeatureDataset generate_synthetic(const SyntheticSpec& spec) {
  std::vector<ClassId> labels = synthetic_clean_labels(spec);
  const std::size_t n = labels.size();
  const double axis_offset = spec.center_separation / std::sqrt(2.0);

  std::mt19937_64 feature_rng(mix_seed(spec.seed, kFeatureStream));
  std::normal_distribution<double> gauss(0.0, spec.cluster_spread);
  Matrix features(static_cast<Eigen::Index>(n), spec.dims);
  for (std::size_t i = 0; i < n; ++i) {
    for (int w = 0; w < spec.dims; ++w) features(i, w) = gauss(feature_rng);
    features(i, labels[i]) += axis_offset;
  }

  const auto flips = static_cast<std::size_t>(
      std::round(spec.label_noise_rate * static_cast<double>(n)));
  if (flips > 0) {
    std::mt19937_64 noise_rng(mix_seed(spec.seed, kNoiseStream));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    // Partial Fisher-Yates: the first `flips` positions are a uniform sample without replacement.
    for (std::size_t i = 0; i < flips; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(order[i], order[pick(noise_rng)]);
    }
    std::uniform_int_distribution<int> offset(1, spec.num_classes - 1);
    for (std::size_t i = 0; i < flips; ++i) {
      ClassId& label = labels[order[i]];
      label = static_cast<ClassId>((label + offset(noise_rng)) % spec.num_classes);
    }
  }

  std::vector<SampleId> ids(n);
  std::iota(ids.begin(), ids.end(), SampleId{0});
  return FeatureDataset(std::move(features), std::move(labels), std::move(ids), spec.num_classes);
}

namespace {

std::string format_feature(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

template <typename T>
T parse_integer(const std::string& text, const std::string& path, std::size_t line,
                const char* what) {
  try {
    std::size_t consumed = 0;
    long long v = std::stoll(text, &consumed);
    if (consumed != text.size()) throw std::invalid_argument(text);
    return static_cast<T>(v);
  } catch (const std::exception&) {
    throw ParseError(path, line, std::string("invalid ") + what + " '" + text + "'");
  }
}

double parse_real(const std::string& text, const std::string& path, std::size_t line) {
  double v = 0.0;
  try {
    std::size_t consumed = 0;
    v = std::stod(text, &consumed);
    if (consumed != text.size()) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw ParseError(path, line, "invalid feature value '" + text + "'");
  }
  if (!std::isfinite(v)) throw ParseError(path, line, "non-finite feature value '" + text + "'");
  return v;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

FeatureDataset load_dataset(const std::filesystem::path& path, std::optional<int> num_classes) {
  const std::string name = path.string();
  std::ifstream in(path);
  if (!in) throw ParseError(name, 0, "cannot open dataset file");

  std::string line;
  if (!std::getline(in, line)) throw ParseError(name, 1, "missing header");
  strip_cr(line);
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "id" || header[1] != "label") {
    throw ParseError(name, 1, "header must be id,label,f0,...");
  }
  const std::size_t dims = header.size() - 2;
  for (std::size_t w = 0; w < dims; ++w) {
    if (header[w + 2] != "f" + std::to_string(w)) {
      throw ParseError(name, 1, "expected column f" + std::to_string(w));
    }
  }

  std::vector<double> values;
  std::vector<ClassId> labels;
  std::vector<SampleId> ids;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != dims + 2) {
      throw ParseError(name, line_no,
                       "expected " + std::to_string(dims + 2) + " columns, got " +
                           std::to_string(fields.size()));
    }
    ids.push_back(parse_integer<SampleId>(fields[0], name, line_no, "id"));
    const auto label = parse_integer<ClassId>(fields[1], name, line_no, "label");
    if (label < 0 || (num_classes && label >= *num_classes)) {
      throw ParseError(name, line_no, "label " + fields[1] + " out of range");
    }
    labels.push_back(label);
    for (std::size_t w = 0; w < dims; ++w) values.push_back(parse_real(fields[w + 2], name, line_no));
  }
  if (labels.empty()) throw ParseError(name, line_no, "no samples");

  const int classes =
      num_classes.value_or(*std::max_element(labels.begin(), labels.end()) + 1);
  Matrix features = Eigen::Map<const Matrix>(values.data(), static_cast<Eigen::Index>(labels.size()),
                                             static_cast<Eigen::Index>(dims));
  return FeatureDataset(std::move(features), std::move(labels), std::move(ids), classes);
}

void save_dataset(const FeatureDataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write dataset file " + path.string());
  out << "id,label";
  for (std::size_t w = 0; w < dataset.dims(); ++w) out << ",f" << w;
  out << '\n';
  const Matrix& f = dataset.features();
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    out << dataset.ids()[i] << ',' << dataset.labels()[i];
    for (Eigen::Index w = 0; w < f.cols(); ++w) {
      out << ',' << format_feature(f(static_cast<Eigen::Index>(i), w));
    }
    out << '\n';
  }
}

void save_selection(const SelectionResult& result, const std::filesystem::path& path) {
  nlohmann::ordered_json doc;
  doc["method"] = result.method;
  doc["fraction"] = result.fraction;
  doc["seed"] = result.seed;
  doc["indices"] = result.indices;
  if (result.scores) {
    doc["scores"] = {{"method", result.scores->method},
                     {"higher_is", result.scores->higher_is},
                     {"ids", result.scores->ids},
                     {"values", result.scores->scores}};
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write selection file " + path.string());
  out << doc.dump(2) << '\n';
}

SelectionResult load_selection(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open selection file");
  SelectionResult result;
  try {
    const auto doc = nlohmann::json::parse(in);
    result.method = doc.at("method").get<std::string>();
    result.fraction = doc.at("fraction").get<double>();
    result.seed = doc.at("seed").get<std::uint64_t>();
    result.indices = doc.at("indices").get<std::vector<SampleId>>();
    if (doc.contains("scores")) {
      const auto& s = doc.at("scores");
      result.scores = ScoreTable{s.at("ids").get<std::vector<SampleId>>(),
                                 s.at("values").get<std::vector<double>>(),
                                 s.at("method").get<std::string>(),
                                 s.at("higher_is").get<std::string>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string(), 0, e.what());
  }
  check_fraction(result.fraction);
  for (std::size_t i = 1; i < result.indices.size(); ++i) {
    if (result.indices[i] == result.indices[i - 1]) {
      throw ValidationError("duplicate index " + std::to_string(result.indices[i]) +
                            " in selection file");
    }
    if (result.indices[i] < result.indices[i - 1]) {
      throw ValidationError("selection indices must be sorted ascending");
    }
  }
  if (result.indices.empty()) throw ValidationError("selection file has no indices");
  return result;
}

DatasetSplit split_dataset(const FeatureDataset& dataset, std::uint64_t seed, double train_ratio,
                           double validation_ratio) {
  if (!(train_ratio > 0.0) || !(validation_ratio > 0.0) ||
      train_ratio + validation_ratio >= 1.0) {
    throw ValidationError("split ratios must satisfy train > 0, validation > 0, sum < 1");
  }
  // Stratified so each part sees every class.
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> by_class(dataset.num_classes());
  for (std::size_t i = 0; i < dataset.size(); ++i) by_class[dataset.labels()[i]].push_back(i);

  std::vector<std::size_t> train, validation, test;
  for (auto& rows : by_class) {
    std::shuffle(rows.begin(), rows.end(), rng);
    const auto n = static_cast<double>(rows.size());
    const auto n_train = static_cast<std::size_t>(std::round(train_ratio * n));
    const auto n_val = static_cast<std::size_t>(std::round(validation_ratio * n));
    if (n_train + n_val >= rows.size()) {
      throw ConfigError("class too small to split into train/validation/test");
    }
    train.insert(train.end(), rows.begin(), rows.begin() + n_train);
    validation.insert(validation.end(), rows.begin() + n_train, rows.begin() + n_train + n_val);
    test.insert(test.end(), rows.begin() + n_train + n_val, rows.end());
  }
  auto by_id = [&](std::size_t a, std::size_t b) { return dataset.ids()[a] < dataset.ids()[b]; };
  std::sort(train.begin(), train.end(), by_id);
  std::sort(validation.begin(), validation.end(), by_id);
  std::sort(test.begin(), test.end(), by_id);
  return DatasetSplit{dataset.subset(train), dataset.subset(validation), dataset.subset(test)};
}

}  // namespace jscds
