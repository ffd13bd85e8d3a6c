/*
 * Copyright 2026 The sgbh Authors.
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
 */

#include "sgbh/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace sgbh {
namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

bool contains(std::span<const NodeIndex> sorted, NodeIndex v) {
  return std::binary_search(sorted.begin(), sorted.end(), v);
}

}  // namespace

HashCenterSet kmeans_binary(const Matrix& codes, std::size_t k,
                            std::size_t max_iters, std::uint64_t seed) {
  const std::size_t n = codes.rows();
  const std::size_t d = codes.cols();
  if (k == 0) throw std::invalid_argument("k must be >= 1");
  if (k > n) {
    throw std::invalid_argument("k = " + std::to_string(k) +
                                " exceeds the number of codes (" +
                                std::to_string(n) + ")");
  }
  Rng rng(seed);

  // Distinct codes first, then duplicates if there are fewer than k.
  std::map<std::vector<double>, std::size_t> first_seen;
  std::vector<std::size_t> distinct, repeated;
  for (std::size_t r = 0; r < n; ++r) {
    auto row = codes.row(r);
    auto [it, inserted] =
        first_seen.try_emplace(std::vector<double>(row.begin(), row.end()), r);
    (inserted ? distinct : repeated).push_back(r);
  }
  std::shuffle(distinct.begin(), distinct.end(), rng);
  std::shuffle(repeated.begin(), repeated.end(), rng);
  std::vector<std::size_t> seeds(distinct.begin(),
                                 distinct.begin() + static_cast<std::ptrdiff_t>(std::min(k, distinct.size())));
  for (std::size_t i = 0; seeds.size() < k; ++i) seeds.push_back(repeated[i]);

  HashCenterSet out;
  out.centers = Matrix(k, d);
  for (std::size_t c = 0; c < k; ++c) {
    auto src = codes.row(seeds[c]);
    std::copy(src.begin(), src.end(), out.centers.row(c).begin());
  }

  std::vector<std::uint32_t> assignment(n, std::numeric_limits<std::uint32_t>::max());
  std::vector<double> dist(n, 0.0);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t iter = 0; iter < std::max<std::size_t>(max_iters, 1); ++iter) {
    bool changed = false;
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t r = 0; r < n; ++r) {
      auto x = codes.row(r);
      std::uint32_t best = 0;
      double best_dist = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double dc = squared_distance(x, out.centers.row(c));
        if (dc < best_dist) {
          best_dist = dc;
          best = static_cast<std::uint32_t>(c);
        }
      }
      changed |= assignment[r] != best;
      assignment[r] = best;
      dist[r] = best_dist;
      ++counts[best];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = n;
      for (std::size_t r = 0; r < n; ++r) {
        if (counts[assignment[r]] < 2) continue;
        if (far == n || dist[r] > dist[far]) far = r;
      }
      --counts[assignment[far]];
      assignment[far] = static_cast<std::uint32_t>(c);
      dist[far] = 0.0;
      counts[c] = 1;
      changed = true;
    }

    out.centers.fill(0.0);
    for (std::size_t r = 0; r < n; ++r) axpy(1.0, codes.row(r), out.centers.row(assignment[r]));
    for (std::size_t c = 0; c < k; ++c) {
      for (double& v : out.centers.row(c)) v /= static_cast<double>(counts[c]);
    }
    double distortion = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      distortion += squared_distance(codes.row(r), out.centers.row(assignment[r]));
    }
    out.distortion.push_back(distortion);
    if (!changed) break;
  }

  out.assignment = std::move(assignment);
  out.members.assign(k, {});
  for (std::size_t r = 0; r < n; ++r) {
    out.members[out.assignment[r]].push_back(static_cast<NodeIndex>(r));
  }
  return out;
}

std::vector<double> center_selection_probs(std::span<const double> query,
                                           const Matrix& centers) {
  if (query.size() != centers.cols()) {
    throw std::invalid_argument("query/center dimension mismatch");
  }
  std::vector<double> probs(centers.rows());
  double max_logit = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.rows(); ++c) {
    probs[c] = dot(query, centers.row(c));
    max_logit = std::max(max_logit, probs[c]);
  }
  double total = 0.0;
  for (double& p : probs) {
    p = std::exp(p - max_logit);
    total += p;
  }
  for (double& p : probs) p /= total;
  return probs;
}

NodeIndex sample_negative_uniform(std::size_t num_destinations,
                                  std::span<const NodeIndex> train_neighbors,
                                  Rng& rng) {
  if (train_neighbors.size() >= num_destinations) {
    throw NoNegativeError("source is connected to every destination");
  }
  const std::size_t free = num_destinations - train_neighbors.size();
  if (free * 2 < num_destinations) {
    // Dense row: draw the rank among non-neighbors directly.
    std::uniform_int_distribution<std::size_t> pick(0, free - 1);
    std::size_t rank = pick(rng);
    NodeIndex v = 0;
    for (;; ++v) {
      if (contains(train_neighbors, v)) continue;
      if (rank-- == 0) return v;
    }
  }
  std::uniform_int_distribution<NodeIndex> pick(
      0, static_cast<NodeIndex>(num_destinations - 1));
  for (;;) {
    const NodeIndex v = pick(rng);
    if (!contains(train_neighbors, v)) return v;
  }
}

NodeIndex sample_negative(std::span<const double> probs,
                          const HashCenterSet& centers,
                          std::span<const NodeIndex> train_neighbors,
                          std::size_t num_destinations, Rng& rng,
                          SamplerStats* stats) {
  if (train_neighbors.size() >= num_destinations) {
    throw NoNegativeError("source is connected to every destination");
  }
  if (stats) ++stats->draws;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double target = unit(rng);
  std::size_t chosen = probs.size() - 1;
  double cumulative = 0.0;
  for (std::size_t c = 0; c < probs.size(); ++c) {
    cumulative += probs[c];
    if (target < cumulative) {
      chosen = c;
      break;
    }
  }
  const auto& members = centers.members[chosen];
  if (!members.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
    for (int attempt = 0; attempt < kRejectionBudget; ++attempt) {
      const NodeIndex v = members[pick(rng)];
      if (!contains(train_neighbors, v)) return v;
    }
  }
  if (stats) ++stats->fallbacks;
  return sample_negative_uniform(num_destinations, train_neighbors, rng);
}

HashCenterSet refresh_centers(const LayerEmbeddings& state,
                              std::size_t num_sources, std::size_t k,
                              std::size_t max_iters, std::uint64_t seed,
                              std::size_t epoch) {
  const LayerState& shallow = state.layers.front();
  const std::size_t nv = shallow.hidden.rows() - num_sources;
  Matrix codes(nv, shallow.hidden.cols());
  for (std::size_t v = 0; v < nv; ++v) {
    auto x = shallow.hidden.row(num_sources + v);
    auto b = codes.row(v);
    for (std::size_t i = 0; i < x.size(); ++i) b[i] = x[i] >= 0.0 ? 1.0 : -1.0;
  }
  HashCenterSet centers =
      kmeans_binary(codes, k, max_iters, fork_seed(seed, "kmeans/" + std::to_string(epoch)));
  centers.epoch = epoch;
  return centers;
}

}  // namespace sgbh
