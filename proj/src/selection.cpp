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

#include "jscds/selection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "jscds/errors.hpp"

namespace jscds {

void EpochTrace::append_epoch(std::span<const std::uint8_t> correct) {
  if (correct.size() != ids_.size()) {
    throw ShapeError("epoch column has " + std::to_string(correct.size()) + " flags for " +
                     std::to_string(ids_.size()) + " samples");
  }
  std::vector<std::uint8_t> column(correct.size());
  std::transform(correct.begin(), correct.end(), column.begin(),
                 [](std::uint8_t v) -> std::uint8_t { return v != 0 ? 1 : 0; });
  columns_.push_back(std::move(column));
}

std::vector<std::uint8_t> EpochTrace::row(std::size_t row) const {
  std::vector<std::uint8_t> flags(columns_.size());
  for (std::size_t e = 0; e < columns_.size(); ++e) flags[e] = columns_[e][row];
  return flags;
}

EpochTrace load_trace(const std::filesystem::path& path) {
  const std::string name = path.string();
  std::ifstream in(path);
  if (!in) throw ParseError(name, 0, "cannot open trace file");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(name, 1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header;
  {
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) header.push_back(field);
  }
  if (header.size() < 2 || header[0] != "id") throw ParseError(name, 1, "header must be id,e0,...");
  const std::size_t epochs = header.size() - 1;
  for (std::size_t e = 0; e < epochs; ++e) {
    if (header[e + 1] != "e" + std::to_string(e)) {
      throw ParseError(name, 1, "expected column e" + std::to_string(e));
    }
  }

  std::vector<SampleId> ids;
  std::vector<std::vector<std::uint8_t>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string field;
    std::vector<std::string> parts;
    while (std::getline(fields, field, ',')) parts.push_back(field);
    if (parts.size() != epochs + 1) {
      throw ParseError(name, line_no, "expected " + std::to_string(epochs + 1) + " columns");
    }
    try {
      std::size_t used = 0;
      ids.push_back(std::stoll(parts[0], &used));
      if (used != parts[0].size()) throw std::invalid_argument(parts[0]);
    } catch (const std::exception&) {
      throw ParseError(name, line_no, "invalid id '" + parts[0] + "'");
    }
    std::vector<std::uint8_t> flags(epochs);
    for (std::size_t e = 0; e < epochs; ++e) {
      if (parts[e + 1] == "0") {
        flags[e] = 0;
      } else if (parts[e + 1] == "1") {
        flags[e] = 1;
      } else {
        throw ParseError(name, line_no, "flag must be 0 or 1, got '" + parts[e + 1] + "'");
      }
    }
    rows.push_back(std::move(flags));
  }

  EpochTrace trace(ids);
  std::vector<std::uint8_t> column(ids.size());
  for (std::size_t e = 0; e < epochs; ++e) {
    for (std::size_t i = 0; i < rows.size(); ++i) column[i] = rows[i][e];
    trace.append_epoch(column);
  }
  return trace;
}

void save_trace(const EpochTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write trace file " + path.string());
  out << "id";
  for (std::size_t e = 0; e < trace.num_epochs(); ++e) out << ",e" << e;
  out << '\n';
  for (std::size_t i = 0; i < trace.num_samples(); ++i) {
    out << trace.ids()[i];
    for (std::size_t e = 0; e < trace.num_epochs(); ++e) out << (trace.correct(i, e) ? ",1" : ",0");
    out << '\n';
  }
}

double forgetting_count(std::span<const std::uint8_t> correctness) {
  bool ever_correct = false;
  double events = 0.0;
  for (std::size_t e = 0; e < correctness.size(); ++e) {
    ever_correct = ever_correct || correctness[e] != 0;
    if (e > 0 && correctness[e - 1] != 0 && correctness[e] == 0) events += 1.0;
  }
  return ever_correct ? events : std::numeric_limits<double>::infinity();
}

ClusterCenterSet cluster_centers(std::span<const ProbabilityVector> distributions,
                                 std::span<const ClassId> labels, int num_classes) {
  if (distributions.size() != labels.size()) {
    throw ShapeError("distributions and labels must be row-aligned");
  }
  if (distributions.empty()) throw ConfigError("cannot compute centers of an empty set");
  const std::size_t dims = distributions.front().size();
  std::vector<std::vector<double>> sums(num_classes, std::vector<double>(dims, 0.0));
  std::vector<std::size_t> counts(num_classes, 0);
  for (std::size_t i = 0; i < distributions.size(); ++i) {
    const ClassId label = labels[i];
    if (label < 0 || label >= num_classes) {
      throw ValidationError("label " + std::to_string(label) + " out of range");
    }
    if (distributions[i].size() != dims) throw ShapeError("distributions differ in length");
    auto values = distributions[i].values();
    for (std::size_t w = 0; w < dims; ++w) sums[label][w] += values[w];
    ++counts[label];
  }
  ClusterCenterSet set;
  set.counts = counts;
  for (int c = 0; c < num_classes; ++c) {
    if (counts[c] == 0) throw ConfigError("class " + std::to_string(c) + " has no samples");
    for (double& v : sums[c]) v /= static_cast<double>(counts[c]);
    // A mean of distributions is a distribution; this only absorbs rounding.
    set.centers.push_back(floor_and_normalize(std::move(sums[c])));
  }
  return set;
}

double avg_mi(const ScoreTable& scores) {
  if (scores.scores.empty()) throw ValidationError("cannot average an empty score table");
  double sum = 0.0;
  for (double s : scores.scores) sum += s;
  return sum / static_cast<double>(scores.scores.size());
}

std::vector<std::size_t> apportion(std::span<const std::size_t> class_sizes, std::size_t k) {
  const std::size_t total = std::accumulate(class_sizes.begin(), class_sizes.end(), std::size_t{0});
  if (k > total) throw ValidationError("cannot apportion more samples than exist");
  std::vector<std::size_t> quotas(class_sizes.size(), 0);
  if (total == 0) return quotas;
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < class_sizes.size(); ++c) {
    const double exact =
        static_cast<double>(k) * static_cast<double>(class_sizes[c]) / static_cast<double>(total);
    quotas[c] = std::min(class_sizes[c], static_cast<std::size_t>(std::floor(exact)));
    assigned += quotas[c];
    remainders.emplace_back(exact - std::floor(exact), c);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < k; i = (i + 1) % remainders.size()) {
    const std::size_t c = remainders[i].second;
    if (quotas[c] < class_sizes[c]) {
      ++quotas[c];
      ++assigned;
    }
  }
  return quotas;
}

namespace {

void check_embeddings(const FeatureDataset& dataset, const Matrix& embeddings) {
  if (static_cast<std::size_t>(embeddings.rows()) != dataset.size()) {
    throw ShapeError("embeddings have " + std::to_string(embeddings.rows()) + " rows for " +
                     std::to_string(dataset.size()) + " samples");
  }
  if (embeddings.cols() < 1) throw ShapeError("embeddings need at least one column");
  if (!embeddings.allFinite()) throw NumericError("embeddings contain non-finite values");
}

SelectionResult make_result(const FeatureDataset& dataset, std::span<const std::size_t> rows,
                            double fraction, std::string method, std::uint64_t seed) {
  SelectionResult result;
  result.indices.reserve(rows.size());
  for (std::size_t r : rows) result.indices.push_back(dataset.ids()[r]);
  std::sort(result.indices.begin(), result.indices.end());
  result.fraction = fraction;
  result.method = std::move(method);
  result.seed = seed;
  return result;
}

// The k positions among `pool` whose key is smallest, ties to the smaller id.
std::vector<std::size_t> smallest_k(std::vector<std::size_t> pool, std::span<const double> key,
                                    std::span<const SampleId> ids, std::size_t k) {
  k = std::min(k, pool.size());
  auto less = [&](std::size_t a, std::size_t b) {
    if (key[a] != key[b]) return key[a] < key[b];
    return ids[a] < ids[b];
  };
  std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k), pool.end(), less);
  pool.resize(k);
  return pool;
}

// Scores closer than this are treated as equal.
constexpr double kScoreTieTolerance = 1e-12;

// As smallest_k, but keys within `tol` of the first key of their run count as equal and go by
// id. Runs are anchored left to right over the sorted keys.
std::vector<std::size_t> smallest_k_tolerant(std::vector<std::size_t> pool,
                                             std::span<const double> key,
                                             std::span<const SampleId> ids, std::size_t k,
                                             double tol) {
  k = std::min(k, pool.size());
  std::sort(pool.begin(), pool.end(), [&](std::size_t a, std::size_t b) {
    if (key[a] != key[b]) return key[a] < key[b];
    return ids[a] < ids[b];
  });
  auto run = pool.begin();
  while (run != pool.end() && run < pool.begin() + static_cast<std::ptrdiff_t>(k)) {
    auto end = run;
    while (end != pool.end() && key[*end] - key[*run] <= tol) ++end;
    std::sort(run, end, [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
    run = end;
  }
  pool.resize(k);
  return pool;
}

std::vector<std::size_t> near_value(std::vector<std::size_t> pool, const ScoreTable& scores,
                                    double center, std::size_t k) {
  std::vector<double> gap(scores.size());
  for (std::size_t i : pool) gap[i] = std::abs(scores.scores[i] - center);
  return smallest_k_tolerant(std::move(pool), gap, scores.ids, k, kScoreTieTolerance);
}

std::vector<std::size_t> rank_window(std::vector<std::size_t> pool, const ScoreTable& scores,
                                     double center, std::size_t k) {
  k = std::min(k, pool.size());
  std::sort(pool.begin(), pool.end(), [&](std::size_t a, std::size_t b) {
    if (scores.scores[a] != scores.scores[b]) return scores.scores[a] > scores.scores[b];
    return scores.ids[a] < scores.ids[b];
  });
  const auto above = static_cast<std::size_t>(std::count_if(
      pool.begin(), pool.end(), [&](std::size_t i) { return scores.scores[i] > center; }));
  const std::size_t half = k / 2;
  std::size_t start = above > half ? above - half : 0;
  start = std::min(start, pool.size() - k);
  return {pool.begin() + static_cast<std::ptrdiff_t>(start),
          pool.begin() + static_cast<std::ptrdiff_t>(start + k)};
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

std::vector<std::vector<std::size_t>> rows_by_class(const FeatureDataset& dataset) {
  std::vector<std::vector<std::size_t>> groups(dataset.num_classes());
  for (std::size_t i = 0; i < dataset.size(); ++i) groups[dataset.labels()[i]].push_back(i);
  return groups;
}

std::vector<std::size_t> class_sizes(const std::vector<std::vector<std::size_t>>& groups) {
  std::vector<std::size_t> sizes;
  for (const auto& g : groups) sizes.push_back(g.size());
  return sizes;
}

}  // namespace

std::vector<std::size_t> select_near_average(const ScoreTable& scores, std::size_t k) {
  return near_value(all_rows(scores.size()), scores, avg_mi(scores), k);
}

std::vector<std::size_t> select_rank_window(const ScoreTable& scores, std::size_t k) {
  return rank_window(all_rows(scores.size()), scores, avg_mi(scores), k);
}

SelectionResult select_jscds(const FeatureDataset& dataset, const Matrix& embeddings,
                             double fraction, std::uint64_t seed, const JscdsOptions& options) {
  check_embeddings(dataset, embeddings);
  const std::size_t k = core_set_size(dataset.size(), fraction);

  const auto distributions = softmax_rows(embeddings);
  const auto centers = cluster_centers(distributions, dataset.labels(), dataset.num_classes());
  ScoreTable scores =
      mi_scores(distributions, dataset.labels(), dataset.ids(), centers, options.base);
  const double average = avg_mi(scores);

  auto pick = [&](std::vector<std::size_t> pool, std::size_t count) {
    return options.window == JscdsWindow::kRankWindow
               ? rank_window(std::move(pool), scores, average, count)
               : near_value(std::move(pool), scores, average, count);
  };

  std::vector<std::size_t> chosen;
  if (options.stratified) {
    const auto groups = rows_by_class(dataset);
    const auto quotas = apportion(class_sizes(groups), k);
    for (std::size_t c = 0; c < groups.size(); ++c) {
      const auto part = pick(groups[c], quotas[c]);
      chosen.insert(chosen.end(), part.begin(), part.end());
    }
  } else {
    chosen = pick(all_rows(dataset.size()), k);
  }

  SelectionResult result = make_result(dataset, chosen, fraction, "jscds", seed);
  result.scores = std::move(scores);
  return result;
}

SelectionResult select_random(const FeatureDataset& dataset, double fraction, std::uint64_t seed) {
  const std::size_t k = core_set_size(dataset.size(), fraction);
  std::vector<std::size_t> rows = all_rows(dataset.size());
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, rows.size() - 1);
    std::swap(rows[i], rows[pick(rng)]);
  }
  rows.resize(k);
  return make_result(dataset, rows, fraction, "random", seed);
}

SelectionResult select_moderate(const FeatureDataset& dataset, const Matrix& embeddings,
                                double fraction, std::uint64_t seed) {
  check_embeddings(dataset, embeddings);
  const std::size_t k = core_set_size(dataset.size(), fraction);
  const auto groups = rows_by_class(dataset);
  const auto quotas = apportion(class_sizes(groups), k);

  ScoreTable distances;
  distances.method = "moderate";
  distances.higher_is = "distant";
  distances.ids = dataset.ids();
  distances.scores.assign(dataset.size(), 0.0);

  std::vector<std::size_t> chosen;
  for (std::size_t c = 0; c < groups.size(); ++c) {
    const auto& rows = groups[c];
    Eigen::RowVectorXd centroid = Eigen::RowVectorXd::Zero(embeddings.cols());
    for (std::size_t r : rows) centroid += embeddings.row(static_cast<Eigen::Index>(r));
    centroid /= static_cast<double>(rows.size());

    std::vector<double> class_distances;
    for (std::size_t r : rows) {
      const double d = (embeddings.row(static_cast<Eigen::Index>(r)) - centroid).norm();
      distances.scores[r] = d;
      class_distances.push_back(d);
    }
    std::sort(class_distances.begin(), class_distances.end());
    const std::size_t m = class_distances.size();
    const double lo = class_distances[(m - 1) / 2];
    const double hi = class_distances[m / 2];
    // Twice the distance to the median (lo + hi) / 2.
    std::vector<double> gap(dataset.size());
    for (std::size_t r : rows) gap[r] = std::abs((distances.scores[r] - lo) + (distances.scores[r] - hi));
    const double tol = 1e-12 * (1.0 + hi);
    const auto part = smallest_k_tolerant(rows, gap, distances.ids, quotas[c], tol);
    chosen.insert(chosen.end(), part.begin(), part.end());
  }

  SelectionResult result = make_result(dataset, chosen, fraction, "moderate", seed);
  result.scores = std::move(distances);
  return result;
}

std::vector<std::size_t> kcenter_greedy_order(const FeatureDataset& dataset,
                                              const Matrix& embeddings, std::size_t k) {
  check_embeddings(dataset, embeddings);
  const std::size_t n = dataset.size();
  k = std::min(k, n);
  const auto& ids = dataset.ids();

  std::vector<bool> taken(n, false);
  std::vector<std::size_t> order;
  order.reserve(k);
  // Squared distances keep the same argmax.
  Eigen::VectorXd min_dist = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n),
                                                       std::numeric_limits<double>::infinity());
  auto add = [&](std::size_t r) {
    taken[r] = true;
    order.push_back(r);
    const Eigen::VectorXd d =
        (embeddings.rowwise() - embeddings.row(static_cast<Eigen::Index>(r))).rowwise().squaredNorm();
    min_dist = min_dist.cwiseMin(d);
  };
  if (k == 0) return order;
  add(static_cast<std::size_t>(std::min_element(ids.begin(), ids.end()) - ids.begin()));
  while (order.size() < k) {
    std::size_t best = n;
    for (std::size_t r = 0; r < n; ++r) {
      if (taken[r]) continue;
      if (best == n || min_dist[r] > min_dist[best] ||
          (min_dist[r] == min_dist[best] && ids[r] < ids[best])) {
        best = r;
      }
    }
    add(best);
  }
  return order;
}

SelectionResult select_kcenter_greedy(const FeatureDataset& dataset, const Matrix& embeddings,
                                      double fraction, std::uint64_t seed) {
  const std::size_t k = core_set_size(dataset.size(), fraction);
  const auto order = kcenter_greedy_order(dataset, embeddings, k);
  return make_result(dataset, order, fraction, "kcenter", seed);
}

SelectionResult select_forgetting(const FeatureDataset& dataset, const EpochTrace& trace,
                                  double fraction, std::uint64_t seed) {
  const std::size_t k = core_set_size(dataset.size(), fraction);
  if (trace.num_epochs() < 2) throw ValidationError("forgetting needs a trace of >= 2 epochs");
  std::unordered_map<SampleId, std::size_t> trace_row;
  trace_row.reserve(trace.num_samples());
  for (std::size_t i = 0; i < trace.num_samples(); ++i) trace_row.emplace(trace.ids()[i], i);

  // Never-learned samples get a count above any achievable one so the table stays finite.
  const auto never_learned = static_cast<double>(trace.num_epochs());
  ScoreTable counts;
  counts.method = "forgetting";
  counts.higher_is = "forgettable";
  counts.ids = dataset.ids();
  counts.scores.resize(dataset.size());
  std::vector<double> key(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto it = trace_row.find(dataset.ids()[i]);
    if (it == trace_row.end()) {
      throw ValidationError("trace has no row for sample id " + std::to_string(dataset.ids()[i]));
    }
    const double count = forgetting_count(trace.row(it->second));
    counts.scores[i] = std::isinf(count) ? never_learned : count;
    key[i] = -counts.scores[i];
  }
  const auto chosen = smallest_k(all_rows(dataset.size()), key, dataset.ids(), k);
  SelectionResult result = make_result(dataset, chosen, fraction, "forgetting", seed);
  result.scores = std::move(counts);
  return result;
}

SelectionResult select_full(const FeatureDataset& dataset, double fraction, std::uint64_t seed) {
  check_fraction(fraction);
  return make_result(dataset, all_rows(dataset.size()), fraction, "full", seed);
}

Method parse_method(std::string_view name) {
  if (name == "full") return Method::kFull;
  if (name == "random") return Method::kRandom;
  if (name == "moderate") return Method::kModerate;
  if (name == "kcenter" || name == "kcenter_greedy") return Method::kKCenterGreedy;
  if (name == "forgetting") return Method::kForgetting;
  if (name == "jscds") return Method::kJscds;
  throw ValidationError("unknown selection method '" + std::string(name) + "'");
}

std::string_view method_name(Method method) {
  switch (method) {
    case Method::kFull: return "full";
    case Method::kRandom: return "random";
    case Method::kModerate: return "moderate";
    case Method::kKCenterGreedy: return "kcenter";
    case Method::kForgetting: return "forgetting";
    case Method::kJscds: return "jscds";
  }
  return "unknown";
}

Selector make_selector(Method method, JscdsOptions options) {
  auto need_embeddings = [](const SelectionInputs& in) -> const Matrix& {
    if (in.embeddings == nullptr) throw ConfigError("selector needs embeddings");
    return *in.embeddings;
  };
  switch (method) {
    case Method::kFull:
      return [](const SelectionInputs& in, double f, std::uint64_t s) {
        return select_full(in.dataset, f, s);
      };
    case Method::kRandom:
      return [](const SelectionInputs& in, double f, std::uint64_t s) {
        return select_random(in.dataset, f, s);
      };
    case Method::kModerate:
      return [need_embeddings](const SelectionInputs& in, double f, std::uint64_t s) {
        return select_moderate(in.dataset, need_embeddings(in), f, s);
      };
    case Method::kKCenterGreedy:
      return [need_embeddings](const SelectionInputs& in, double f, std::uint64_t s) {
        return select_kcenter_greedy(in.dataset, need_embeddings(in), f, s);
      };
    case Method::kForgetting:
      return [](const SelectionInputs& in, double f, std::uint64_t s) {
        if (in.trace == nullptr) throw ConfigError("forgetting selector needs an epoch trace");
        return select_forgetting(in.dataset, *in.trace, f, s);
      };
    case Method::kJscds:
      return [need_embeddings, options](const SelectionInputs& in, double f, std::uint64_t s) {
        return select_jscds(in.dataset, need_embeddings(in), f, s, options);
      };
  }
  throw ValidationError("unknown selection method");
}

}  // namespace jscds
