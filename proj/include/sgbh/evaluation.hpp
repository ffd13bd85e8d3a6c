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

#ifndef SGBH_EVALUATION_HPP_
#define SGBH_EVALUATION_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgbh/graph.hpp"
#include "sgbh/retrieval.hpp"

namespace sgbh {

inline constexpr std::size_t kDefaultKs[] = {20, 40, 60, 80, 100};

// |top-K ∩ relevant| / |relevant|. `relevant` must be sorted and non-empty.
double recall_at_k(std::span<const NodeIndex> ranked,
                   std::span<const NodeIndex> relevant, std::size_t k);

// Binary-relevance NDCG with a log2(rank + 1) discount; the ideal DCG places
// min(K, |relevant|) hits at the top.
double ndcg_at_k(std::span<const NodeIndex> ranked,
                 std::span<const NodeIndex> relevant, std::size_t k);

struct MetricsReport {
  std::vector<std::size_t> ks;
  std::vector<double> recall;
  std::vector<double> ndcg;
  std::size_t num_evaluated = 0;  // sources with at least one test edge

  double recall_at(std::size_t k) const;
  double ndcg_at(std::size_t k) const;
};

// Ranks the max(ks) best destinations for every source with a test edge
// (skipping its training neighbors when `exclude_train`) and averages the
// metrics at each K. Throws std::invalid_argument if the split has no test
// edges or the codebook size disagrees with the split.
MetricsReport evaluate(const PackedCodebook& codebook, const DatasetSplit& split,
                       std::span<const std::size_t> ks = kDefaultKs,
                       bool exclude_train = true);

// Mean over evaluated sources of K / |candidates| (capped at 1): the expected
// recall of a uniformly random ranking.
double random_recall_expectation(const DatasetSplit& split, std::size_t k,
                                 bool exclude_train = true);

// Test edges whose destination appears in the source's Top-K list.
std::vector<Edge> hit_edge_set(const PackedCodebook& codebook,
                               const DatasetSplit& split, std::size_t k = 100,
                               bool exclude_train = true);

enum class PairKind { kNeighbor, kNonNeighbor };

struct GroupSimilarity {
  std::size_t layer = 0;
  std::size_t group = 0;
  PairKind kind = PairKind::kNeighbor;
  std::optional<double> mean;  // empty when the group has no pairs
  std::size_t count = 0;
};

struct HammingStatsOptions {
  std::size_t groups = 8;
  std::size_t non_neighbor_samples = 2000;
  std::uint64_t seed = 2026;
};

// Per layer and per random source group: mean Hamming similarity of the hit
// pairs, and of uniformly sampled pairs outside train ∪ test. Only the sign
// bits of the codebook are read.
std::vector<GroupSimilarity> layer_hamming_stats(
    const PackedCodebook& codebook, std::span<const Edge> hit_edges,
    const DatasetSplit& split, const HammingStatsOptions& options = {});

// Average of the non-missing group means for one layer and kind.
std::optional<double> mean_over_groups(std::span<const GroupSimilarity> stats,
                                       std::size_t layer, PairKind kind);

// Source -> group assignment used by layer_hamming_stats.
std::vector<std::size_t> assign_source_groups(std::size_t num_sources,
                                              std::size_t groups,
                                              std::uint64_t seed);

void write_metrics_csv(const MetricsReport& report,
                       const std::filesystem::path& path);
MetricsReport read_metrics_csv(const std::filesystem::path& path);
void write_similarity_csv(std::span<const GroupSimilarity> stats,
                          const std::filesystem::path& path);

}  // namespace sgbh

#endif  // SGBH_EVALUATION_HPP_
