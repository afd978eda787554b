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

#include "jscds/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "jscds/errors.hpp"

namespace jscds {

namespace {

constexpr std::uint64_t kInitStream = 11;
constexpr std::uint64_t kShuffleStream = 12;
constexpr std::uint64_t kSelectionStream = 1000;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_inputs(const ClassifierState& model, const Matrix& features) {
  if (static_cast<std::size_t>(features.cols()) != model.input_dims()) {
    throw ShapeError("features have " + std::to_string(features.cols()) +
                     " columns, model expects " + std::to_string(model.input_dims()));
  }
}

Matrix hidden_preactivation(const ClassifierState& model, const Matrix& features) {
  Matrix pre = features * model.w1;
  pre.rowwise() += model.b1.transpose();
  return pre;
}

Gradients zeros_like(const ClassifierState& model) {
  return Gradients{Matrix::Zero(model.w1.rows(), model.w1.cols()), Vector::Zero(model.b1.size()),
                   Matrix::Zero(model.w2.rows(), model.w2.cols()), Vector::Zero(model.b2.size())};
}

}  // namespace

bool ClassifierState::operator==(const ClassifierState& other) const {
  auto same = [](const auto& a, const auto& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
  };
  return same(w1, other.w1) && same(b1, other.b1) && same(w2, other.w2) && same(b2, other.b2) &&
         rng == other.rng;
}

ClassifierState init_model(std::size_t input_dims, std::size_t hidden_width, int num_classes,
                           std::uint64_t seed) {
  if (input_dims == 0 || hidden_width == 0 || num_classes < 1) {
    throw ValidationError("model dimensions must be positive");
  }
  std::mt19937_64 rng(mix_seed(seed, kInitStream));
  auto glorot = [&rng](Eigen::Index rows, Eigen::Index cols) {
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
    }
    return m;
  };
  const auto d = static_cast<Eigen::Index>(input_dims);
  const auto h = static_cast<Eigen::Index>(hidden_width);
  ClassifierState model;
  model.w1 = glorot(d, h);
  model.b1 = Vector::Zero(h);
  model.w2 = glorot(h, num_classes);
  model.b2 = Vector::Zero(num_classes);
  model.rng.seed(mix_seed(seed, kShuffleStream));
  return model;
}

Matrix embed(const ClassifierState& model, const Matrix& features) {
  check_inputs(model, features);
  return hidden_preactivation(model, features).cwiseMax(0.0);
}

Matrix forward(const ClassifierState& model, const Matrix& features) {
  Matrix logits = embed(model, features) * model.w2;
  logits.rowwise() += model.b2.transpose();
  return logits;
}

LossAndGrad loss_and_grad(const ClassifierState& model, const Matrix& features,
                          std::span<const ClassId> labels) {
  check_inputs(model, features);
  if (labels.empty()) throw ValidationError("batch is empty");
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw ShapeError("batch features and labels differ in length");
  }
  const Matrix pre = hidden_preactivation(model, features);
  const Matrix hidden = pre.cwiseMax(0.0);
  Matrix logits = hidden * model.w2;
  logits.rowwise() += model.b2.transpose();
  if (!logits.allFinite()) throw NumericError("non-finite logits");

  const auto batch = static_cast<double>(labels.size());
  const int classes = model.num_classes();
  // dlogits = (softmax - onehot) / batch
  Matrix dlogits(logits.rows(), logits.cols());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const ClassId y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= classes) throw ValidationError("label out of range in batch");
    const double peak = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd shifted = logits.row(i).array() - peak;
    const Eigen::RowVectorXd expd = shifted.array().exp();
    const double sum = expd.sum();
    loss += std::log(sum) - shifted(y);
    dlogits.row(i) = expd / sum;
    dlogits(i, y) -= 1.0;
  }
  dlogits /= batch;

  LossAndGrad out;
  out.loss = loss / batch;
  out.grad.w2 = hidden.transpose() * dlogits;
  out.grad.b2 = dlogits.colwise().sum().transpose();
  Matrix dhidden = dlogits * model.w2.transpose();
  dhidden = dhidden.cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
  out.grad.w1 = features.transpose() * dhidden;
  out.grad.b1 = dhidden.colwise().sum().transpose();
  if (!std::isfinite(out.loss)) throw NumericError("non-finite loss");
  return out;
}

std::vector<ClassId> predict(const ClassifierState& model, const Matrix& features) {
  const Matrix logits = forward(model, features);
  std::vector<ClassId> labels(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < logits.cols(); ++c) {
      if (logits(i, c) > logits(i, best)) best = c;
    }
    labels[static_cast<std::size_t>(i)] = static_cast<ClassId>(best);
  }
  return labels;
}

AdamOptimizer::AdamOptimizer(const ClassifierState& model, Options options)
    : options_(options), m_(zeros_like(model)), v_(zeros_like(model)) {}

void AdamOptimizer::step(ClassifierState& model, const Gradients& grad) {
  ++t_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    param.array() -= options_.learning_rate * (m.array() / correction1) /
                     ((v.array() / correction2).sqrt() + options_.epsilon);
  };
  update(model.w1, grad.w1, m_.w1, v_.w1);
  update(model.b1, grad.b1, m_.b1, v_.b1);
  update(model.w2, grad.w2, m_.w2, v_.w2);
  update(model.b2, grad.b2, m_.b2, v_.b2);
}

TrainResult train_with_reselection(const FeatureDataset& train, const TrainConfig& config,
                                   const Selector& selector, const FeatureDataset* heldout,
                                   const EpochTrace* reference_trace) {
  config.validate();
  const auto wall_start = Clock::now();
  const std::size_t n = train.size();

  TrainResult result{init_model(train.dims(), static_cast<std::size_t>(config.hidden_width),
                                train.num_classes(), config.seed),
                     TrainReport{}};
  ClassifierState& model = result.model;
  TrainReport& report = result.report;
  report.trace = EpochTrace(train.ids());
  AdamOptimizer adam(model, {.learning_rate = config.learning_rate});

  std::unordered_map<SampleId, std::size_t> row_of;
  row_of.reserve(n);
  for (std::size_t i = 0; i < n; ++i) row_of.emplace(train.ids()[i], i);

  std::vector<std::size_t> core(n);
  std::iota(core.begin(), core.end(), std::size_t{0});
  if (!selector) report.reselection_epochs.push_back(0);

  Matrix batch_x;
  std::vector<ClassId> batch_y;
  std::vector<std::uint8_t> correct(n);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (selector && epoch >= config.warmup_epochs && epoch % config.reselect_interval == 0) {
      const auto select_start = Clock::now();
      const Matrix embeddings = embed(model, train.features());
      const EpochTrace* trace =
          report.trace.num_epochs() >= 2 ? &report.trace : reference_trace;
      SelectionResult picked;
      try {
        picked = selector(SelectionInputs{train, &embeddings, trace}, config.fraction,
                          mix_seed(config.seed, kSelectionStream + static_cast<std::uint64_t>(epoch)));
      } catch (const Error& e) {
        throw Error("selection at epoch " + std::to_string(epoch) + " failed: " + e.what());
      }
      core.clear();
      for (SampleId id : picked.indices) {
        const auto it = row_of.find(id);
        if (it == row_of.end()) {
          throw ValidationError("selector returned unknown id " + std::to_string(id));
        }
        core.push_back(it->second);
      }
      std::sort(core.begin(), core.end());
      report.reselection_epochs.push_back(epoch);
      report.selection_seconds += seconds_since(select_start);
    }

    const auto train_start = Clock::now();
    std::shuffle(core.begin(), core.end(), model.rng);
    double loss_sum = 0.0;
    const auto batch_size = static_cast<std::size_t>(config.batch_size);
    for (std::size_t start = 0; start < core.size(); start += batch_size) {
      const std::size_t stop = std::min(core.size(), start + batch_size);
      batch_x.resize(static_cast<Eigen::Index>(stop - start), train.features().cols());
      batch_y.resize(stop - start);
      for (std::size_t i = start; i < stop; ++i) {
        batch_x.row(static_cast<Eigen::Index>(i - start)) =
            train.features().row(static_cast<Eigen::Index>(core[i]));
        batch_y[i - start] = train.labels()[core[i]];
      }
      LossAndGrad step;
      try {
        step = loss_and_grad(model, batch_x, batch_y);
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(start / batch_size) + ": " + e.what());
      }
      loss_sum += step.loss * static_cast<double>(stop - start);
      adam.step(model, step.grad);
    }
    std::sort(core.begin(), core.end());
    report.epoch_loss.push_back(loss_sum / static_cast<double>(core.size()));
    report.core_set_size.push_back(core.size());

    const auto predicted = predict(model, train.features());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      correct[i] = predicted[i] == train.labels()[i] ? 1 : 0;
      hits += correct[i];
    }
    report.trace.append_epoch(correct);
    report.train_accuracy.push_back(static_cast<double>(hits) / static_cast<double>(n));
    report.train_seconds += seconds_since(train_start);
  }

  if (heldout != nullptr) {
    report.heldout = jscds::report(heldout->labels(), predict(model, heldout->features()),
                                   train.num_classes());
  }
  report.wall_seconds = seconds_since(wall_start);
  return result;
}

nlohmann::ordered_json to_json(const TrainReport& report) {
  nlohmann::ordered_json doc;
  doc["epochs"] = report.epoch_loss.size();
  doc["reselection_epochs"] = report.reselection_epochs;
  doc["epoch_loss"] = report.epoch_loss;
  doc["core_set_size"] = report.core_set_size;
  doc["train_accuracy"] = report.train_accuracy;
  doc["heldout"] = report.heldout ? to_json(*report.heldout) : nlohmann::ordered_json(nullptr);
  return doc;
}

nlohmann::ordered_json timing_json(const TrainReport& report) {
  return {{"selection_seconds", report.selection_seconds},
          {"train_seconds", report.train_seconds},
          {"wall_seconds", report.wall_seconds}};
}

namespace {

std::vector<double> flatten(const Matrix& m) {
  return std::vector<double>(m.data(), m.data() + m.size());
}

Matrix unflatten(const std::vector<double>& values, Eigen::Index rows, Eigen::Index cols) {
  if (static_cast<Eigen::Index>(values.size()) != rows * cols) {
    throw ShapeError("parameter block has wrong size");
  }
  return Eigen::Map<const Matrix>(values.data(), rows, cols);
}

}  // namespace

void save_model(const ClassifierState& model, const std::filesystem::path& path) {
  std::ostringstream rng_state;
  rng_state << model.rng;
  nlohmann::ordered_json doc;
  doc["input_dims"] = model.input_dims();
  doc["hidden_width"] = model.hidden_width();
  doc["num_classes"] = model.num_classes();
  doc["w1"] = flatten(model.w1);
  doc["b1"] = std::vector<double>(model.b1.data(), model.b1.data() + model.b1.size());
  doc["w2"] = flatten(model.w2);
  doc["b2"] = std::vector<double>(model.b2.data(), model.b2.data() + model.b2.size());
  doc["rng_state"] = rng_state.str();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model file " + path.string());
  out << doc.dump() << '\n';
}

ClassifierState load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open model file");
  ClassifierState model;
  try {
    const auto doc = nlohmann::json::parse(in);
    const auto d = doc.at("input_dims").get<Eigen::Index>();
    const auto h = doc.at("hidden_width").get<Eigen::Index>();
    const auto j = doc.at("num_classes").get<Eigen::Index>();
    model.w1 = unflatten(doc.at("w1").get<std::vector<double>>(), d, h);
    model.w2 = unflatten(doc.at("w2").get<std::vector<double>>(), h, j);
    const auto b1 = doc.at("b1").get<std::vector<double>>();
    const auto b2 = doc.at("b2").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(b1.size()) != h || static_cast<Eigen::Index>(b2.size()) != j) {
      throw ShapeError("bias length mismatch");
    }
    model.b1 = Eigen::Map<const Vector>(b1.data(), h);
    model.b2 = Eigen::Map<const Vector>(b2.data(), j);
    std::istringstream rng_state(doc.at("rng_state").get<std::string>());
    rng_state >> model.rng;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string(), 0, e.what());
  }
  if (!model.w1.allFinite() || !model.w2.allFinite() || !model.b1.allFinite() ||
      !model.b2.allFinite()) {
    throw NumericError("model parameters are not finite");
  }
  return model;
}

}  // namespace jscds
