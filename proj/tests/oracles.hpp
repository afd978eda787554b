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

// Independent reference computations used only by tests. Nothing here calls into the
// library's scoring or selection paths.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <vector>

namespace oracle {

using Dist = std::vector<double>;

inline Dist random_distribution(std::mt19937_64& rng, std::size_t d) {
  std::exponential_distribution<double> draw(1.0);
  Dist p(d);
  double sum = 0.0;
  for (double& v : p) {
    v = draw(rng) + 1e-6;
    sum += v;
  }
  for (double& v : p) v /= sum;
  return p;
}

// Pairwise (recursive halving) summation; a different accumulation order than a running sum.
inline double pairwise_sum(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  if (hi - lo == 0) return 0.0;
  if (hi - lo == 1) return v[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v, 0, v.size()); }

// Direct summation: sum_w p ln p - p ln m + q ln q - q ln m over explicit terms.
inline double jsd(const Dist& p, const Dist& q) {
  std::vector<double> terms;
  for (std::size_t w = 0; w < p.size(); ++w) {
    const long double m = (static_cast<long double>(p[w]) + q[w]) / 2.0L;
    if (p[w] > 0) terms.push_back(static_cast<double>(0.5L * p[w] * std::log(p[w] / m)));
    if (q[w] > 0) terms.push_back(static_cast<double>(0.5L * q[w] * std::log(q[w] / m)));
  }
  return pairwise_sum(terms);
}

inline double kl(const Dist& p, const Dist& q) {
  long double s = 0.0L;
  for (std::size_t w = 0; w < p.size(); ++w) {
    if (p[w] > 0) s += static_cast<long double>(p[w]) * std::log(static_cast<long double>(p[w]) / q[w]);
  }
  return static_cast<double>(s);
}

inline Dist softmax(const std::vector<double>& v) {
  const double peak = *std::max_element(v.begin(), v.end());
  Dist out(v.size());
  long double sum = 0.0L;
  for (std::size_t i = 0; i < v.size(); ++i) sum += std::exp(static_cast<long double>(v[i] - peak));
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = static_cast<double>(std::exp(static_cast<long double>(v[i] - peak)) / sum);
  }
  return out;
}

// Brute-force JSCDS on raw rows: softmax, class means, JSD to own class mean, then the k samples
// whose |score - mean| is smallest.
inline std::vector<std::int64_t> jscds(const std::vector<std::vector<double>>& rows,
                                       const std::vector<int>& labels,
                                       const std::vector<std::int64_t>& ids, int classes,
                                       std::size_t k) {
  const std::size_t n = rows.size();
  std::vector<Dist> dists;
  for (const auto& r : rows) dists.push_back(softmax(r));
  const std::size_t d = dists[0].size();
  std::vector<Dist> centers(classes, Dist(d, 0.0));
  std::vector<double> counts(classes, 0.0);
  // Accumulate in reverse order.
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t w = 0; w < d; ++w) centers[labels[i]][w] += dists[i][w];
    counts[labels[i]] += 1.0;
  }
  for (int c = 0; c < classes; ++c) {
    for (double& v : centers[c]) v /= counts[c];
  }
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) scores[i] = jsd(dists[i], centers[labels[i]]);
  const double avg = pairwise_sum(scores) / static_cast<double>(n);
  // Rank each sample by how many others beat it: a clearly smaller gap, or a gap equal within
  // 1e-12 and a smaller id.
  std::vector<std::pair<std::size_t, std::int64_t>> ranked;
  for (std::size_t i = 0; i < n; ++i) {
    const double gi = std::abs(scores[i] - avg);
    std::size_t beaten_by = 0;
    for (std::size_t o = 0; o < n; ++o) {
      const double go = std::abs(scores[o] - avg);
      beaten_by += go < gi - 1e-12 || (std::abs(go - gi) <= 1e-12 && ids[o] < ids[i]);
    }
    ranked.emplace_back(beaten_by, ids[i]);
  }
  std::sort(ranked.begin(), ranked.end());
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(ranked[i].second);
  std::sort(out.begin(), out.end());
  return out;
}

// Hamilton apportionment, written independently.
inline std::vector<std::size_t> largest_remainder(const std::vector<std::size_t>& sizes,
                                                  std::size_t k) {
  const double total = std::accumulate(sizes.begin(), sizes.end(), 0.0);
  std::vector<std::size_t> q(sizes.size());
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t used = 0;
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    const double exact = k * (sizes[c] / total);
    q[c] = static_cast<std::size_t>(exact);
    used += q[c];
    rem.push_back({-(exact - q[c]), c});
  }
  std::sort(rem.begin(), rem.end());
  for (std::size_t i = 0; used < k; ++i, ++used) ++q[rem[i].second];
  return q;
}

// Brute-force Moderate: per class, enumerate every contiguous window of the distance-sorted list
// and keep the one with the smallest total |d - median|.
inline std::vector<std::int64_t> moderate(const std::vector<std::vector<double>>& rows,
                                          const std::vector<int>& labels,
                                          const std::vector<std::int64_t>& ids, int classes,
                                          std::size_t k) {
  std::vector<std::vector<std::size_t>> members(classes);
  for (std::size_t i = 0; i < rows.size(); ++i) members[labels[i]].push_back(i);
  std::vector<std::size_t> sizes;
  for (const auto& m : members) sizes.push_back(m.size());
  const auto quotas = largest_remainder(sizes, k);
  std::vector<std::int64_t> out;
  for (int c = 0; c < classes; ++c) {
    const auto& m = members[c];
    const std::size_t d = rows[m[0]].size();
    std::vector<double> centroid(d, 0.0);
    for (std::size_t i : m) {
      for (std::size_t w = 0; w < d; ++w) centroid[w] += rows[i][w] / m.size();
    }
    std::vector<std::pair<double, std::int64_t>> dist;
    for (std::size_t i : m) {
      double s = 0.0;
      for (std::size_t w = 0; w < d; ++w) s += (rows[i][w] - centroid[w]) * (rows[i][w] - centroid[w]);
      dist.push_back({std::sqrt(s), ids[i]});
    }
    std::sort(dist.begin(), dist.end());
    const std::size_t size = dist.size();
    const long double median = size % 2 ? dist[size / 2].first
                                   : (static_cast<long double>(dist[size / 2 - 1].first) + dist[size / 2].first) / 2;
    const std::size_t q = quotas[c];
    if (q == 0) continue;
    // Every contiguous window of the sorted distances; the cheapest total gap wins, and windows
    // within rounding of each other go to the lexicographically smaller id set.
    std::vector<std::int64_t> best;
    long double best_cost = std::numeric_limits<long double>::infinity();
    for (std::size_t start = 0; start + q <= size; ++start) {
      long double cost = 0.0L;
      std::vector<std::int64_t> window;
      for (std::size_t i = start; i < start + q; ++i) {
        cost += std::abs(static_cast<long double>(dist[i].first) - median);
        window.push_back(dist[i].second);
      }
      std::sort(window.begin(), window.end());
      const long double tol = 1e-9L * (1.0L + best_cost);
      if (best.empty() || cost < best_cost - tol ||
          (cost <= best_cost + tol && window < best)) {
        best_cost = std::min(cost, best_cost);
        best = window;
      }
    }
    out.insert(out.end(), best.begin(), best.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline int transitions(const std::vector<int>& flags) {
  int count = 0;
  for (std::size_t e = 1; e < flags.size(); ++e) count += (flags[e - 1] == 1 && flags[e] == 0);
  return count;
}

inline double euclid(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Central differences of f over every coordinate of x.
inline std::vector<double> central_differences(const std::function<double(const std::vector<double>&)>& f,
                                               std::vector<double> x, double step) {
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + step;
    const double up = f(x);
    x[i] = saved - step;
    const double down = f(x);
    x[i] = saved;
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

struct Tally {
  double acc, precision, recall, f1, specificity;
};

// Per-class one-vs-rest tally straight from the label pairs.
inline Tally metrics(const std::vector<int>& labels, const std::vector<int>& preds, int classes) {
  Tally t{0, 0, 0, 0, 0};
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += labels[i] == preds[i];
  t.acc = static_cast<double>(hits) / labels.size();
  for (int c = 0; c < classes; ++c) {
    double tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const bool is = labels[i] == c, said = preds[i] == c;
      tp += is && said;
      fp += !is && said;
      fn += is && !said;
      tn += !is && !said;
    }
    const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double r = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    const double s = tn + fp > 0 ? tn / (tn + fp) : 0.0;
    const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    t.precision += p / classes;
    t.recall += r / classes;
    t.specificity += s / classes;
    t.f1 += f / classes;
  }
  return t;
}

}  // namespace oracle
