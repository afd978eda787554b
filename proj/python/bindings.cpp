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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <vector>

#include "jscds/benchmark.hpp"
#include "jscds/datamodel.hpp"
#include "jscds/divergence.hpp"
#include "jscds/errors.hpp"
#include "jscds/metrics.hpp"
#include "jscds/selection.hpp"
#include "jscds/trainer.hpp"

namespace py = pybind11;
using namespace jscds;

namespace {

using FlagMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

py::object to_python(const nlohmann::ordered_json& doc) {
  return py::module_::import("json").attr("loads")(doc.dump());
}

LogBase parse_base(const std::string& base) {
  if (base == "e") return LogBase::kNatural;
  if (base == "2") return LogBase::kTwo;
  throw ValidationError("base must be 'e' or '2', got '" + base + "'");
}

JscdsOptions parse_options(const std::string& window, bool stratified) {
  if (window != "near" && window != "rank") {
    throw ValidationError("window must be 'near' or 'rank', got '" + window + "'");
  }
  JscdsOptions options;
  options.window = window == "rank" ? JscdsWindow::kRankWindow : JscdsWindow::kNearAverage;
  options.stratified = stratified;
  return options;
}

FeatureDataset make_dataset(Matrix features, std::vector<ClassId> labels,
                            std::optional<std::vector<SampleId>> ids,
                            std::optional<int> num_classes) {
  std::vector<SampleId> sample_ids;
  if (ids) {
    sample_ids = std::move(*ids);
  } else {
    sample_ids.resize(labels.size());
    for (std::size_t i = 0; i < sample_ids.size(); ++i) sample_ids[i] = static_cast<SampleId>(i);
  }
  int classes = num_classes.value_or(0);
  if (!num_classes) {
    for (ClassId c : labels) classes = std::max(classes, c + 1);
  }
  return FeatureDataset(std::move(features), std::move(labels), std::move(sample_ids), classes);
}

// Rows follow the dataset, columns are epochs.
EpochTrace make_trace(const FeatureDataset& dataset, const FlagMatrix& flags) {
  if (static_cast<std::size_t>(flags.rows()) != dataset.size()) {
    throw ShapeError("trace has " + std::to_string(flags.rows()) + " rows, dataset has " +
                     std::to_string(dataset.size()));
  }
  EpochTrace trace(dataset.ids());
  for (Eigen::Index e = 0; e < flags.cols(); ++e) {
    std::vector<std::uint8_t> column(static_cast<std::size_t>(flags.rows()));
    for (Eigen::Index i = 0; i < flags.rows(); ++i) column[i] = flags(i, e) != 0;
    trace.append_epoch(column);
  }
  return trace;
}

FlagMatrix trace_matrix(const EpochTrace& trace) {
  FlagMatrix out(static_cast<Eigen::Index>(trace.ids().size()),
                 static_cast<Eigen::Index>(trace.num_epochs()));
  for (std::size_t i = 0; i < trace.ids().size(); ++i) {
    const auto row = trace.row(i);
    for (std::size_t e = 0; e < row.size(); ++e) out(i, e) = row[e];
  }
  return out;
}

py::dict selection_dict(const SelectionResult& r) {
  py::dict d;
  d["indices"] = r.indices;
  d["fraction"] = r.fraction;
  d["method"] = r.method;
  d["seed"] = r.seed;
  if (r.scores) {
    py::dict s;
    s["ids"] = r.scores->ids;
    s["values"] = r.scores->scores;
    s["method"] = r.scores->method;
    s["higher_is"] = r.scores->higher_is;
    d["scores"] = s;
  } else {
    d["scores"] = py::none();
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_jscds, m) {
  m.doc() = "Core-set selection with Jensen-Shannon scoring, baselines and a small trainer";

  auto base_error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", base_error.ptr());
  py::register_exception<ShapeError>(m, "ShapeError", base_error.ptr());
  py::register_exception<NumericError>(m, "NumericError", base_error.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base_error.ptr());
  py::register_exception<ParseError>(m, "ParseError", base_error.ptr());

  py::class_<FeatureDataset>(m, "Dataset")
      .def(py::init(&make_dataset), py::arg("features"), py::arg("labels"),
           py::arg("ids") = py::none(), py::arg("num_classes") = py::none())
      .def_property_readonly("features", &FeatureDataset::features)
      .def_property_readonly("labels", &FeatureDataset::labels)
      .def_property_readonly("ids", &FeatureDataset::ids)
      .def_property_readonly("num_classes", &FeatureDataset::num_classes)
      .def_property_readonly("dims", &FeatureDataset::dims)
      .def("__len__", &FeatureDataset::size)
      .def("__eq__", &FeatureDataset::operator==)
      .def("subset",
           [](const FeatureDataset& d, const std::vector<std::size_t>& rows) {
             return d.subset(rows);
           },
           py::arg("rows"))
      .def("save", [](const FeatureDataset& d, const std::filesystem::path& p) { save_dataset(d, p); },
           py::arg("path"))
      .def_static("load", &load_dataset, py::arg("path"), py::arg("num_classes") = py::none())
      .def("__repr__", [](const FeatureDataset& d) {
        return "<Dataset n=" + std::to_string(d.size()) + " dims=" + std::to_string(d.dims()) +
               " classes=" + std::to_string(d.num_classes()) + ">";
      });

  m.def(
      "generate_synthetic",
      [](int num_classes, std::size_t samples_per_class, std::size_t dims, double spread,
         double separation, double noise, std::uint64_t seed) {
        SyntheticSpec spec;
        spec.num_classes = num_classes;
        spec.samples_per_class = samples_per_class;
        spec.dims = dims;
        spec.cluster_spread = spread;
        spec.center_separation = separation;
        spec.label_noise_rate = noise;
        spec.seed = seed;
        return py::make_tuple(generate_synthetic(spec), synthetic_clean_labels(spec));
      },
      py::arg("num_classes") = 3, py::arg("samples_per_class") = 1000, py::arg("dims") = 16,
      py::arg("spread") = 1.0, py::arg("separation") = 3.0, py::arg("noise") = 0.1,
      py::arg("seed") = 0, "Returns (dataset, clean_labels).");

  m.def("core_set_size", &core_set_size, py::arg("n"), py::arg("fraction"));

  m.def(
      "softmax",
      [](const std::vector<double>& logits) {
        const auto p = softmax(logits);
        return std::vector<double>(p.values().begin(), p.values().end());
      },
      py::arg("logits"));
  m.def(
      "kl",
      [](const std::vector<double>& p, const std::vector<double>& q, const std::string& base) {
        return kl(ProbabilityVector::from_values(p), ProbabilityVector::from_values(q),
                  parse_base(base));
      },
      py::arg("p"), py::arg("q"), py::arg("base") = "e");
  m.def(
      "jsd",
      [](const std::vector<double>& p, const std::vector<double>& q, const std::string& base) {
        return jsd(ProbabilityVector::from_values(p), ProbabilityVector::from_values(q),
                   parse_base(base));
      },
      py::arg("p"), py::arg("q"), py::arg("base") = "e");

  m.def(
      "select",
      [](const FeatureDataset& dataset, const std::string& method, double fraction,
         std::uint64_t seed, std::optional<Matrix> embeddings, std::optional<FlagMatrix> trace,
         const std::string& window, bool stratified) {
        const Method which = parse_method(method);
        if (which == Method::kFull) throw ConfigError("method 'full' does not select");
        const Matrix emb = embeddings ? std::move(*embeddings) : dataset.features();
        std::optional<EpochTrace> epochs;
        if (trace) epochs = make_trace(dataset, *trace);
        const Selector selector = make_selector(which, parse_options(window, stratified));
        SelectionResult result;
        {
          py::gil_scoped_release release;
          result = selector(SelectionInputs{dataset, &emb, epochs ? &*epochs : nullptr}, fraction,
                            seed);
        }
        return selection_dict(result);
      },
      py::arg("dataset"), py::arg("method"), py::arg("fraction"), py::arg("seed") = 0,
      py::arg("embeddings") = py::none(), py::arg("trace") = py::none(),
      py::arg("window") = "near", py::arg("stratified") = false,
      "Picks a core set. Embeddings default to the raw features; trace is an n x epochs 0/1 "
      "matrix aligned with the dataset rows.");

  py::class_<ClassifierState>(m, "Model")
      .def_static("init", &init_model, py::arg("input_dims"), py::arg("hidden_width"),
                  py::arg("num_classes"), py::arg("seed"))
      .def_readwrite("w1", &ClassifierState::w1)
      .def_readwrite("b1", &ClassifierState::b1)
      .def_readwrite("w2", &ClassifierState::w2)
      .def_readwrite("b2", &ClassifierState::b2)
      .def_property_readonly("num_classes", &ClassifierState::num_classes)
      .def("embed", &embed, py::arg("features"))
      .def("logits", &forward, py::arg("features"))
      .def("predict", &predict, py::arg("features"))
      .def(
          "loss_and_grad",
          [](const ClassifierState& model, const Matrix& x, const std::vector<ClassId>& y) {
            const auto r = loss_and_grad(model, x, y);
            py::dict grad;
            grad["w1"] = r.grad.w1;
            grad["b1"] = r.grad.b1;
            grad["w2"] = r.grad.w2;
            grad["b2"] = r.grad.b2;
            return py::make_tuple(r.loss, grad);
          },
          py::arg("features"), py::arg("labels"))
      .def("save", [](const ClassifierState& s, const std::filesystem::path& p) { save_model(s, p); },
           py::arg("path"))
      .def_static("load", &load_model, py::arg("path"))
      .def("__eq__", &ClassifierState::operator==);

  m.def(
      "train",
      [](const FeatureDataset& train, const std::string& method, double fraction,
         std::uint64_t seed, int epochs, double learning_rate, int batch_size,
         int reselect_interval, int hidden_width, int warmup_epochs,
         std::optional<FeatureDataset> heldout, std::optional<FlagMatrix> reference_trace,
         const std::string& window, bool stratified) {
        TrainConfig config;
        config.method = method;
        config.fraction = fraction;
        config.seed = seed;
        config.epochs = epochs;
        config.learning_rate = learning_rate;
        config.batch_size = batch_size;
        config.reselect_interval = reselect_interval;
        config.hidden_width = hidden_width;
        config.warmup_epochs = warmup_epochs;
        config.validate();
        const Method which = parse_method(method);
        const Selector selector =
            which == Method::kFull ? Selector{} : make_selector(which, parse_options(window, stratified));
        std::optional<EpochTrace> reference;
        if (reference_trace) reference = make_trace(train, *reference_trace);
        std::optional<TrainResult> result;
        {
          py::gil_scoped_release release;
          result = train_with_reselection(train, config, selector, heldout ? &*heldout : nullptr,
                                          reference ? &*reference : nullptr);
        }
        py::dict report = to_python(to_json(result->report));
        report["trace"] = trace_matrix(result->report.trace);
        report["timing"] = to_python(timing_json(result->report));
        return py::make_tuple(result->model, report);
      },
      py::arg("train"), py::arg("method") = "full", py::arg("fraction") = 1.0,
      py::arg("seed") = 0, py::arg("epochs") = 50, py::arg("learning_rate") = 0.001,
      py::arg("batch_size") = 64, py::arg("reselect_interval") = 10,
      py::arg("hidden_width") = 32, py::arg("warmup_epochs") = 0,
      py::arg("heldout") = py::none(), py::arg("reference_trace") = py::none(),
      py::arg("window") = "near", py::arg("stratified") = false,
      "Trains with periodic core-set reselection. Returns (model, report).");

  m.def(
      "split",
      [](const FeatureDataset& d, std::uint64_t seed, double train_ratio, double validation_ratio) {
        auto s = split_dataset(d, seed, train_ratio, validation_ratio);
        return py::make_tuple(s.train, s.validation, s.test);
      },
      py::arg("dataset"), py::arg("seed") = 0, py::arg("train_ratio") = 0.8,
      py::arg("validation_ratio") = 0.1, "Stratified split into (train, validation, test).");

  m.def(
      "metrics",
      [](const std::vector<ClassId>& labels, const std::vector<ClassId>& predictions,
         int num_classes) { return to_python(to_json(report(labels, predictions, num_classes))); },
      py::arg("labels"), py::arg("predictions"), py::arg("num_classes"));

  m.def(
      "benchmark",
      [](const FeatureDataset& dataset, std::vector<std::string> methods,
         std::vector<double> fractions, std::vector<std::uint64_t> seeds, int epochs,
         int reselect_interval, int hidden_width, double learning_rate, int batch_size) {
        BenchmarkGrid grid;
        grid.methods = std::move(methods);
        grid.fractions = std::move(fractions);
        grid.seeds = std::move(seeds);
        grid.config.epochs = epochs;
        grid.config.reselect_interval = reselect_interval;
        grid.config.hidden_width = hidden_width;
        grid.config.learning_rate = learning_rate;
        grid.config.batch_size = batch_size;
        grid.validate();
        std::optional<BenchmarkReport> report;
        {
          py::gil_scoped_release release;
          report = run_benchmark(dataset, grid);
        }
        py::dict out = to_python(to_json(*report));
        out["timing"] = to_python(timing_json(*report));
        return out;
      },
      py::arg("dataset"),
      py::arg("methods") = std::vector<std::string>{"random", "moderate", "kcenter", "forgetting",
                                                    "jscds"},
      py::arg("fractions") = std::vector<double>{0.1, 0.3, 0.5, 0.7},
      py::arg("seeds") = std::vector<std::uint64_t>{0}, py::arg("epochs") = 50,
      py::arg("reselect_interval") = 10, py::arg("hidden_width") = 32,
      py::arg("learning_rate") = 0.001, py::arg("batch_size") = 64);
}
