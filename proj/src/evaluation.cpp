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

#include "sgbh/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "sgbh/random.hpp"

namespace sgbh {
namespace {

bool contains(std::span<const NodeIndex> sorted, NodeIndex v) {
  return std::binary_search(sorted.begin(), sorted.end(), v);
}

void check_sizes(const PackedCodebook& codebook, const DatasetSplit& split) {
  if (codebook.num_sources() != split.num_sources() ||
      codebook.num_destinations() != split.num_destinations()) {
    throw std::invalid_argument(
        "codebook has " + std::to_string(codebook.num_sources()) + " sources / " +
        std::to_string(codebook.num_destinations()) + " destinations but graph has " +
        std::to_string(split.num_sources()) + " / " +
        std::to_string(split.num_destinations()));
  }
}

std::vector<NodeIndex> ranked_destinations(const PackedCodebook& codebook,
                                           const DatasetSplit& split,
                                           NodeIndex u, std::size_t k,
                                           bool exclude_train) {
  auto exclude = exclude_train ? split.train.source_neighbors(u)
                               : std::span<const NodeIndex>{};
  SearchResult result = topk_search(codebook, u, k, exclude);
  std::vector<NodeIndex> ranked;
  ranked.reserve(result.items.size());
  for (const auto& item : result.items) ranked.push_back(item.destination);
  return ranked;
}

std::size_t index_of_k(std::span<const std::size_t> ks, std::size_t k) {
  auto it = std::find(ks.begin(), ks.end(), k);
  if (it == ks.end()) throw std::out_of_range("K not in report: " + std::to_string(k));
  return static_cast<std::size_t>(it - ks.begin());
}

}  // namespace

double recall_at_k(std::span<const NodeIndex> ranked,
                   std::span<const NodeIndex> relevant, std::size_t k) {
  if (relevant.empty()) throw std::invalid_argument("relevant set is empty");
  const std::size_t top = std::min(k, ranked.size());
  std::size_t hits = 0;
  for (std::size_t r = 0; r < top; ++r) hits += contains(relevant, ranked[r]);
  return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

double ndcg_at_k(std::span<const NodeIndex> ranked,
                 std::span<const NodeIndex> relevant, std::size_t k) {
  if (relevant.empty()) throw std::invalid_argument("relevant set is empty");
  const std::size_t top = std::min(k, ranked.size());
  double dcg = 0.0;
  for (std::size_t r = 0; r < top; ++r) {
    if (contains(relevant, ranked[r])) dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  }
  double idcg = 0.0;
  const std::size_t ideal = std::min(k, relevant.size());
  for (std::size_t r = 0; r < ideal; ++r) idcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  return dcg / idcg;
}

double MetricsReport::recall_at(std::size_t k) const { return recall[index_of_k(ks, k)]; }
double MetricsReport::ndcg_at(std::size_t k) const { return ndcg[index_of_k(ks, k)]; }

MetricsReport evaluate(const PackedCodebook& codebook, const DatasetSplit& split,
                       std::span<const std::size_t> ks, bool exclude_train) {
  check_sizes(codebook, split);
  if (ks.empty()) throw std::invalid_argument("no cutoffs requested");
  if (split.test.num_edges() == 0) throw std::invalid_argument("split has no test edges");
  const std::size_t max_k = *std::max_element(ks.begin(), ks.end());
  MetricsReport report;
  report.ks.assign(ks.begin(), ks.end());
  report.recall.assign(ks.size(), 0.0);
  report.ndcg.assign(ks.size(), 0.0);
  for (NodeIndex u = 0; u < split.num_sources(); ++u) {
    auto relevant = split.test.source_neighbors(u);
    if (relevant.empty()) continue;
    auto ranked = ranked_destinations(codebook, split, u, max_k, exclude_train);
    for (std::size_t i = 0; i < ks.size(); ++i) {
      report.recall[i] += recall_at_k(ranked, relevant, ks[i]);
      report.ndcg[i] += ndcg_at_k(ranked, relevant, ks[i]);
    }
    ++report.num_evaluated;
  }
  for (std::size_t i = 0; i < ks.size(); ++i) {
    report.recall[i] /= static_cast<double>(report.num_evaluated);
    report.ndcg[i] /= static_cast<double>(report.num_evaluated);
  }
  return report;
}

double random_recall_expectation(const DatasetSplit& split, std::size_t k,
                                 bool exclude_train) {
  double total = 0.0;
  std::size_t count = 0;
  for (NodeIndex u = 0; u < split.num_sources(); ++u) {
    if (split.test.source_neighbors(u).empty()) continue;
    std::size_t candidates = split.num_destinations();
    if (exclude_train) candidates -= split.train.source_neighbors(u).size();
    total += std::min(1.0, static_cast<double>(k) / static_cast<double>(candidates));
    ++count;
  }
  if (count == 0) throw std::invalid_argument("split has no test edges");
  return total / static_cast<double>(count);
}

std::vector<Edge> hit_edge_set(const PackedCodebook& codebook,
                               const DatasetSplit& split, std::size_t k,
                               bool exclude_train) {
  check_sizes(codebook, split);
  std::vector<Edge> hits;
  for (NodeIndex u = 0; u < split.num_sources(); ++u) {
    auto relevant = split.test.source_neighbors(u);
    if (relevant.empty()) continue;
    auto ranked = ranked_destinations(codebook, split, u, k, exclude_train);
    std::sort(ranked.begin(), ranked.end());
    for (NodeIndex v : relevant) {
      if (std::binary_search(ranked.begin(), ranked.end(), v)) hits.push_back({u, v});
    }
  }
  return hits;
}

std::vector<std::size_t> assign_source_groups(std::size_t num_sources,
                                              std::size_t groups,
                                              std::uint64_t seed) {
  if (groups == 0) throw std::invalid_argument("groups must be >= 1");
  std::vector<std::size_t> order(num_sources);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(seed, "groups");
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> group(num_sources);
  for (std::size_t i = 0; i < num_sources; ++i) group[order[i]] = i % groups;
  return group;
}

std::vector<GroupSimilarity> layer_hamming_stats(
    const PackedCodebook& codebook, std::span<const Edge> hit_edges,
    const DatasetSplit& split, const HammingStatsOptions& options) {
  check_sizes(codebook, split);
  const std::size_t nu = codebook.num_sources();
  const std::size_t nv = codebook.num_destinations();
  const std::size_t layers = codebook.num_segments();
  const std::size_t d = codebook.dim();
  const auto group = assign_source_groups(nu, options.groups, options.seed);

  auto sim = [&](NodeIndex u, NodeIndex v, std::size_t l) {
    return hamming_similarity(codebook.bits(u, l), codebook.bits(nu + v, l), d);
  };

  // sums[(l * groups + g) * 2 + kind]
  std::vector<double> sums(layers * options.groups * 2, 0.0);
  std::vector<std::size_t> counts(sums.size(), 0);
  auto slot = [&](std::size_t l, std::size_t g, PairKind kind) {
    return (l * options.groups + g) * 2 + static_cast<std::size_t>(kind);
  };

  for (const Edge& e : hit_edges) {
    for (std::size_t l = 0; l < layers; ++l) {
      const std::size_t s = slot(l, group[e.source], PairKind::kNeighbor);
      sums[s] += sim(e.source, e.destination, l);
      ++counts[s];
    }
  }

  Rng rng = make_rng(options.seed, "non-neighbors");
  std::uniform_int_distribution<NodeIndex> pick(0, static_cast<NodeIndex>(nv - 1));
  for (NodeIndex u = 0; u < nu; ++u) {
    const std::size_t linked =
        split.train.source_neighbors(u).size() + split.test.source_neighbors(u).size();
    if (linked >= nv) continue;
    for (std::size_t s = 0; s < options.non_neighbor_samples; ++s) {
      NodeIndex v;
      do {
        v = pick(rng);
      } while (split.train.has_edge(u, v) || split.test.has_edge(u, v));
      for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t at = slot(l, group[u], PairKind::kNonNeighbor);
        sums[at] += sim(u, v, l);
        ++counts[at];
      }
    }
  }

  std::vector<GroupSimilarity> stats;
  for (std::size_t l = 0; l < layers; ++l) {
    for (PairKind kind : {PairKind::kNeighbor, PairKind::kNonNeighbor}) {
      for (std::size_t g = 0; g < options.groups; ++g) {
        const std::size_t s = slot(l, g, kind);
        GroupSimilarity row{l, g, kind, std::nullopt, counts[s]};
        if (counts[s] > 0) row.mean = sums[s] / static_cast<double>(counts[s]);
        stats.push_back(row);
      }
    }
  }
  return stats;
}

std::optional<double> mean_over_groups(std::span<const GroupSimilarity> stats,
                                       std::size_t layer, PairKind kind) {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& s : stats) {
    if (s.layer == layer && s.kind == kind && s.mean) {
      total += *s.mean;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return total / static_cast<double>(n);
}

void write_metrics_csv(const MetricsReport& report,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "k,recall,ndcg\n" << std::setprecision(17);
  for (std::size_t i = 0; i < report.ks.size(); ++i) {
    out << report.ks[i] << ',' << report.recall[i] << ',' << report.ndcg[i] << '\n';
  }
}

MetricsReport read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  MetricsReport report;
  std::string line;
  std::getline(in, line);
  if (line != "k,recall,ndcg") throw std::runtime_error("unexpected metrics header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::size_t k;
    double recall, ndcg;
    char c1, c2;
    if (!(row >> k >> c1 >> recall >> c2 >> ndcg) || c1 != ',' || c2 != ',') {
      throw std::runtime_error("malformed metrics row: " + line);
    }
    report.ks.push_back(k);
    report.recall.push_back(recall);
    report.ndcg.push_back(ndcg);
  }
  return report;
}

void write_similarity_csv(std::span<const GroupSimilarity> stats,
                          const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "layer,group,kind,mean,count\n" << std::setprecision(17);
  for (const auto& s : stats) {
    out << s.layer << ',' << s.group + 1 << ','
        << (s.kind == PairKind::kNeighbor ? "neighbor" : "non-neighbor") << ',';
    if (s.mean) {
      out << *s.mean;
    } else {
      out << "NA";
    }
    out << ',' << s.count << '\n';
  }
}

}  // namespace sgbh
