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

#include "jscds/metrics.hpp"

#include <numeric>
#include <string>

#include "jscds/errors.hpp"

namespace jscds {

std::size_t ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

ConfusionMatrix confusion_matrix(std::span<const ClassId> labels, std::span<const ClassId> preds,
                                 int num_classes) {
  if (labels.size() != preds.size()) throw ShapeError("labels and predictions differ in length");
  if (labels.empty()) throw ValidationError("cannot score an empty prediction set");
  if (num_classes < 1) throw ValidationError("num_classes must be positive");
  ConfusionMatrix cm{num_classes,
                     std::vector<std::size_t>(static_cast<std::size_t>(num_classes) * num_classes)};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes || preds[i] < 0 || preds[i] >= num_classes) {
      throw ValidationError("class id out of range at position " + std::to_string(i));
    }
    ++cm.counts[static_cast<std::size_t>(labels[i]) * num_classes + preds[i]];
  }
  return cm;
}

namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

}  // namespace

MetricsReport report(std::span<const ClassId> labels, std::span<const ClassId> preds,
                     int num_classes) {
  MetricsReport out;
  out.confusion = confusion_matrix(labels, preds, num_classes);
  const auto& cm = out.confusion;
  const auto n = static_cast<double>(labels.size());

  std::size_t correct = 0;
  for (int c = 0; c < num_classes; ++c) correct += cm.at(c, c);
  out.acc = static_cast<double>(correct) / n;

  for (int c = 0; c < num_classes; ++c) {
    double tp = static_cast<double>(cm.at(c, c));
    double fp = 0.0, fn = 0.0;
    for (int o = 0; o < num_classes; ++o) {
      if (o == c) continue;
      fp += static_cast<double>(cm.at(o, c));
      fn += static_cast<double>(cm.at(c, o));
    }
    const double tn = n - tp - fp - fn;
    ClassMetrics m;
    m.precision = ratio(tp, tp + fp);
    m.recall = ratio(tp, tp + fn);
    m.specificity = ratio(tn, tn + fp);
    m.f1 = ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
    out.per_class.push_back(m);
  }
  for (const auto& m : out.per_class) {
    out.precision_macro += m.precision;
    out.recall_macro += m.recall;
    out.f1_macro += m.f1;
    out.specificity_macro += m.specificity;
  }
  const auto classes = static_cast<double>(num_classes);
  out.precision_macro /= classes;
  out.recall_macro /= classes;
  out.f1_macro /= classes;
  out.specificity_macro /= classes;
  return out;
}

nlohmann::ordered_json to_json(const MetricsReport& metrics) {
  nlohmann::ordered_json doc;
  doc["acc"] = metrics.acc;
  doc["precision"] = metrics.precision_macro;
  doc["recall"] = metrics.recall_macro;
  doc["f1"] = metrics.f1_macro;
  doc["specificity"] = metrics.specificity_macro;
  auto per_class = nlohmann::ordered_json::array();
  for (const auto& m : metrics.per_class) {
    per_class.push_back({{"precision", m.precision},
                         {"recall", m.recall},
                         {"f1", m.f1},
                         {"specificity", m.specificity}});
  }
  doc["per_class"] = std::move(per_class);
  auto rows = nlohmann::ordered_json::array();
  for (int t = 0; t < metrics.confusion.num_classes; ++t) {
    std::vector<std::size_t> row;
    for (int p = 0; p < metrics.confusion.num_classes; ++p) row.push_back(metrics.confusion.at(t, p));
    rows.push_back(row);
  }
  doc["confusion"] = std::move(rows);
  return doc;
}

MetricsReport metrics_from_json(const nlohmann::ordered_json& doc) {
  try {
    MetricsReport m;
    m.acc = doc.at("acc").get<double>();
    m.precision_macro = doc.at("precision").get<double>();
    m.recall_macro = doc.at("recall").get<double>();
    m.f1_macro = doc.at("f1").get<double>();
    m.specificity_macro = doc.at("specificity").get<double>();
    for (const auto& c : doc.at("per_class")) {
      m.per_class.push_back(ClassMetrics{c.at("precision").get<double>(), c.at("recall").get<double>(),
                                         c.at("f1").get<double>(),
                                         c.at("specificity").get<double>()});
    }
    const auto& rows = doc.at("confusion");
    m.confusion.num_classes = static_cast<int>(rows.size());
    for (const auto& row : rows) {
      if (row.size() != rows.size()) throw ValidationError("confusion matrix must be square");
      for (const auto& v : row) m.confusion.counts.push_back(v.get<std::size_t>());
    }
    if (m.per_class.size() != rows.size()) {
      throw ValidationError("per_class and confusion disagree on the class count");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed metrics document: ") + e.what());
  }
}

}  // namespace jscds
