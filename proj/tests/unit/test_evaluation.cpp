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

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "oracles.hpp"
#include "sgbh/evaluation.hpp"
#include "temp_files.hpp"

namespace sgbh {
namespace {

double recall_oracle(const std::vector<NodeIndex>& ranked, const std::set<NodeIndex>& rel,
                     std::size_t k) {
  std::set<NodeIndex> top(ranked.begin(), ranked.begin() + std::min(k, ranked.size()));
  std::size_t inter = 0;
  for (NodeIndex v : rel) inter += top.count(v);
  return static_cast<double>(inter) / static_cast<double>(rel.size());
}

double ndcg_oracle(const std::vector<NodeIndex>& ranked, const std::set<NodeIndex>& rel,
                   std::size_t k) {
  double dcg = 0.0, idcg = 0.0;
  for (std::size_t r = 1; r <= std::min(k, ranked.size()); ++r) {
    if (rel.count(ranked[r - 1])) dcg += std::log(2.0) / std::log(r + 1.0);
  }
  for (std::size_t r = 1; r <= std::min(k, rel.size()); ++r) idcg += std::log(2.0) / std::log(r + 1.0);
  return dcg / idcg;
}

TEST(RecallAtK, EdgeCases) {
  const std::vector<NodeIndex> ranked{4, 2, 9, 1};
  EXPECT_EQ(recall_at_k(ranked, std::vector<NodeIndex>{2, 4}, 2), 1.0);
  EXPECT_EQ(recall_at_k(ranked, std::vector<NodeIndex>{5, 7}, 4), 0.0);
  EXPECT_EQ(recall_at_k(ranked, std::vector<NodeIndex>{1, 7}, 3), 0.0);
  EXPECT_EQ(recall_at_k(ranked, std::vector<NodeIndex>{1, 7}, 4), 0.5);
  EXPECT_THROW(recall_at_k(ranked, {}, 4), std::invalid_argument);
}

TEST(NdcgAtK, EdgeCases) {
  const std::vector<NodeIndex> ranked{4, 2, 9};
  EXPECT_DOUBLE_EQ(ndcg_at_k(ranked, std::vector<NodeIndex>{4}, 3), 1.0);
  EXPECT_NEAR(ndcg_at_k(ranked, std::vector<NodeIndex>{2}, 3), 0.63092975357145743, 1e-15);
  EXPECT_DOUBLE_EQ(ndcg_at_k(ranked, std::vector<NodeIndex>{2, 4}, 3), 1.0);
  EXPECT_EQ(ndcg_at_k(ranked, std::vector<NodeIndex>{7}, 3), 0.0);
}

TEST(Metrics, MatchBruteForceOracles) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<NodeIndex> pool(60);
    std::iota(pool.begin(), pool.end(), 0);
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::vector<NodeIndex> ranked(pool.begin(), pool.begin() + 40);
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::size_t nrel = 1 + trial % 15;
    std::set<NodeIndex> rel(pool.begin(), pool.begin() + nrel);
    const std::vector<NodeIndex> relv(rel.begin(), rel.end());
    for (std::size_t k : {1u, 5u, 20u, 40u, 60u}) {
      EXPECT_NEAR(recall_at_k(ranked, relv, k), recall_oracle(ranked, rel, k), 1e-15);
      EXPECT_NEAR(ndcg_at_k(ranked, relv, k), ndcg_oracle(ranked, rel, k), 1e-12);
    }
  }
}

// Codebook whose scores put every test destination of u first: matching
// destinations share u's code, all others carry its complement.
PackedCodebook oracle_codebook(const DatasetSplit& split, bool favour_test) {
  const std::size_t nu = split.num_sources(), nv = split.num_destinations();
  PackedCodebook cb(nu + nv, nu, 0, 64);
  std::vector<double> code(64, -1.0);
  for (std::size_t u = 0; u < nu; ++u) {
    std::fill(code.begin(), code.end(), -1.0);
    code[u] = 1.0;
    cb.set_segment(u, 0, 1.0f, code);
  }
  for (std::size_t v = 0; v < nv; ++v) {
    std::fill(code.begin(), code.end(), -1.0);
    for (std::size_t u = 0; u < nu; ++u) {
      const bool rel = split.test.has_edge(static_cast<NodeIndex>(u), static_cast<NodeIndex>(v));
      if (rel == favour_test) code[u] = 1.0;
    }
    cb.set_segment(nu + v, 0, 1.0f, code);
  }
  return cb;
}

DatasetSplit three_user_split() {
  const auto train = BipartiteGraph::from_edges(3, 30, {{0, 0}, {1, 1}, {2, 2}});
  const auto test = BipartiteGraph::from_edges(
      3, 30, {{0, 5}, {0, 17}, {1, 8}, {1, 29}, {1, 3}, {2, 12}});
  return {train, test};
}

TEST(Evaluate, PerfectFixtureHasUnitRecall) {
  const auto split = three_user_split();
  const auto report = evaluate(oracle_codebook(split, true), split);
  EXPECT_EQ(report.num_evaluated, 3u);
  for (std::size_t k : kDefaultKs) {
    EXPECT_EQ(report.recall_at(k), 1.0);
    EXPECT_DOUBLE_EQ(report.ndcg_at(k), 1.0);
  }
}

TEST(Evaluate, RecallIsMonotoneAndBounded) {
  const auto g = testing::random_graph(40, 150, 0.08, 6);
  const auto split = split_dataset(g, 0.8, 6);
  const auto cb = testing::random_codebook(40, 150, 2, 32, 6);
  const auto report = evaluate(cb, split);
  for (std::size_t i = 0; i < report.ks.size(); ++i) {
    EXPECT_GE(report.recall[i], 0.0);
    EXPECT_LE(report.recall[i], 1.0);
    EXPECT_GE(report.ndcg[i], 0.0);
    EXPECT_LE(report.ndcg[i], 1.0);
    if (i) {
      EXPECT_GE(report.recall[i], report.recall[i - 1]);
    }
  }
}

TEST(Evaluate, RandomCodesApproachRandomRankingRecall) {
  // 200 sources with 10 test and 2 train edges each over 1000 destinations.
  const std::size_t nu = 200, nv = 1000;
  double total = 0.0, expected = 0.0;
  const int seeds = 5;
  for (int s = 0; s < seeds; ++s) {
    std::mt19937_64 rng(100 + s);
    std::vector<Edge> tr, te;
    std::vector<NodeIndex> pool(nv);
    std::iota(pool.begin(), pool.end(), 0);
    for (NodeIndex u = 0; u < nu; ++u) {
      std::shuffle(pool.begin(), pool.end(), rng);
      for (int i = 0; i < 2; ++i) tr.push_back({u, pool[i]});
      for (int i = 2; i < 12; ++i) te.push_back({u, pool[i]});
    }
    const DatasetSplit split{BipartiteGraph::from_edges(nu, nv, tr),
                             BipartiteGraph::from_edges(nu, nv, te)};
    total += evaluate(testing::random_codebook(nu, nv, 1, 64, 200 + s), split).recall_at(20);
    expected += random_recall_expectation(split, 20);
  }
  const double mean = total / seeds;
  EXPECT_NEAR(expected / seeds, 20.0 / 998.0, 1e-12);
  // Hypergeometric per-source variance, averaged over sources and seeds.
  const double n = 998.0, p = 10.0 / n;
  const double var_hits = 20.0 * p * (1 - p) * (n - 20.0) / (n - 1.0);
  const double sigma = std::sqrt(var_hits / 100.0 / (nu * seeds));
  EXPECT_LT(std::abs(mean - 20.0 / 998.0), 3.0 * sigma) << mean;
}

TEST(Evaluate, TrainExclusionOnlyAffectsSourcesWithStrongTrainItems) {
  // Source 0: its train item outscores the test item. Source 1: it does not.
  const DatasetSplit split{BipartiteGraph::from_edges(2, 4, {{0, 0}, {1, 3}}),
                           BipartiteGraph::from_edges(2, 4, {{0, 1}, {1, 2}})};
  PackedCodebook cb(6, 2, 0, 8);
  const std::vector<double> pos(8, 1.0), neg(8, -1.0);
  std::vector<double> half(8, 1.0);
  std::fill(half.begin(), half.begin() + 2, -1.0);
  cb.set_segment(0, 0, 1.0f, pos);
  cb.set_segment(1, 0, 1.0f, neg);
  cb.set_segment(2 + 0, 0, 1.0f, pos);   // u0 train: score 8
  cb.set_segment(2 + 1, 0, 1.0f, half);  // u0 test: 4, u1 test-miss: -4
  cb.set_segment(2 + 2, 0, 1.0f, neg);   // u1 test: 8
  cb.set_segment(2 + 3, 0, 0.5f, half);  // u1 train: -2
  const std::vector<std::size_t> ks{1, 2};
  const auto on = evaluate(cb, split, ks, true);
  const auto off = evaluate(cb, split, ks, false);
  EXPECT_EQ(on.recall_at(1), 1.0);
  EXPECT_EQ(off.recall_at(1), 0.5);  // source 0 loses its hit, source 1 keeps it
  EXPECT_EQ(off.recall_at(2), 1.0);
  EXPECT_NEAR(off.ndcg_at(2), (1.0 + 0.63092975357145743) / 2.0, 1e-15);
}

TEST(Evaluate, RejectsEmptyTestSetAndSizeMismatch) {
  const auto split = three_user_split();
  const DatasetSplit no_test{split.train, BipartiteGraph::from_edges(3, 30, {})};
  EXPECT_THROW(evaluate(oracle_codebook(split, true), no_test), std::invalid_argument);
  try {
    evaluate(testing::random_codebook(3, 31, 0, 8, 1), split);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("31"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("30"), std::string::npos);
  }
}

TEST(HitEdgeSet, PerfectAndAdversarialFixtures) {
  const auto split = three_user_split();
  const auto all = hit_edge_set(oracle_codebook(split, true), split, 5);
  EXPECT_EQ(std::vector<Edge>(all.begin(), all.end()),
            std::vector<Edge>(split.test.edges().begin(), split.test.edges().end()));
  EXPECT_TRUE(hit_edge_set(oracle_codebook(split, false), split, 5).empty());
}

TEST(HitEdgeSet, IsSubsetOfTestEdges) {
  const auto split = split_dataset(testing::random_graph(30, 200, 0.05, 8), 0.8, 8);
  const auto hits = hit_edge_set(testing::random_codebook(30, 200, 1, 16, 8), split, 100);
  for (const Edge& e : hits) EXPECT_TRUE(split.test.has_edge(e.source, e.destination));
}

TEST(LayerHammingStats, IdenticalCodesGiveUnitSimilarity) {
  const auto split = split_dataset(testing::random_graph(24, 40, 0.2, 9), 0.8, 9);
  PackedCodebook cb(64, 24, 2, 16);
  const std::vector<double> code(16, 1.0);
  for (std::size_t n = 0; n < 64; ++n) {
    for (std::size_t l = 0; l < 3; ++l) cb.set_segment(n, l, 0.3f, code);
  }
  const auto hits = hit_edge_set(cb, split);
  const auto stats = layer_hamming_stats(cb, hits, split, {8, 50, 1});
  ASSERT_EQ(stats.size(), 3u * 2u * 8u);
  for (const auto& s : stats) {
    if (s.count) {
      EXPECT_EQ(*s.mean, 1.0);
    }
  }
}

TEST(LayerHammingStats, RandomCodesAverageOneHalf) {
  const auto split = split_dataset(testing::random_graph(80, 300, 0.05, 10), 0.8, 10);
  const auto cb = testing::random_codebook(80, 300, 2, 64, 10);
  const auto hits = hit_edge_set(cb, split);
  const auto stats = layer_hamming_stats(cb, hits, split, {8, 500, 3});
  for (const auto& s : stats) {
    if (s.kind != PairKind::kNonNeighbor) continue;
    ASSERT_TRUE(s.mean.has_value());
    // Each source draws 500 of 300 destinations, so pairs repeat about
    // twice; halve the sample size to account for it.
    const double sigma = std::sqrt(0.25 / 64.0 / (static_cast<double>(s.count) / 2.0));
    EXPECT_LT(std::abs(*s.mean - 0.5), 3.0 * sigma) << "layer " << s.layer << " group " << s.group;
  }
}

TEST(LayerHammingStats, DependsOnlyOnSignBits) {
  const auto split = split_dataset(testing::random_graph(30, 60, 0.1, 11), 0.8, 11);
  const auto cb = testing::random_codebook(30, 60, 2, 32, 11);
  auto rescaled = cb;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> scale(0.1f, 10.0f);
  for (std::size_t n = 0; n < 90; ++n) {
    for (std::size_t l = 0; l < 3; ++l) rescaled.set_alpha(n, l, cb.alpha(n, l) * scale(rng));
  }
  const auto hits = hit_edge_set(cb, split);
  const auto a = layer_hamming_stats(cb, hits, split, {});
  const auto b = layer_hamming_stats(rescaled, hits, split, {});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].mean, b[i].mean);
    EXPECT_EQ(a[i].count, b[i].count);
  }
}

TEST(LayerHammingStats, NonNeighborSamplesAvoidKnownEdges) {
  // Two complete blocks: every edge joins equal codes, every non-edge joins
  // complementary ones, so a single leaked edge would lift the mean above 0.
  const std::size_t nu = 50, nv = 20;
  std::vector<Edge> edges;
  for (NodeIndex u = 0; u < nu; ++u) {
    for (NodeIndex v = 0; v < nv; ++v) {
      if ((u % 2) == (v % 2)) edges.push_back({u, v});
    }
  }
  const auto split = split_dataset(BipartiteGraph::from_edges(nu, nv, edges), 0.8, 12);
  PackedCodebook cb(nu + nv, nu, 0, 8);
  const std::vector<double> pos(8, 1.0), neg(8, -1.0);
  for (std::size_t u = 0; u < nu; ++u) cb.set_segment(u, 0, 1.0f, u % 2 ? pos : neg);
  for (std::size_t v = 0; v < nv; ++v) cb.set_segment(nu + v, 0, 1.0f, v % 2 ? pos : neg);
  const auto stats = layer_hamming_stats(cb, {}, split, {8, 2000, 4});
  std::size_t draws = 0;
  for (const auto& s : stats) {
    if (s.kind == PairKind::kNeighbor) {
      EXPECT_FALSE(s.mean.has_value());  // no hit pairs: missing, not zero
    } else {
      EXPECT_EQ(*s.mean, 0.0);
      draws += s.count;
    }
  }
  EXPECT_EQ(draws, 100000u);
}

TEST(LayerHammingStats, GroupsPartitionSources) {
  const auto group = assign_source_groups(43, 8, 5);
  std::vector<std::size_t> sizes(8, 0);
  for (std::size_t g : group) ++sizes[g];
  for (std::size_t s : sizes) {
    EXPECT_GE(s, 5u);
    EXPECT_LE(s, 6u);
  }
  EXPECT_EQ(group, assign_source_groups(43, 8, 5));
}

TEST(LayerHammingStats, MeanOverGroupsSkipsMissing) {
  const std::vector<GroupSimilarity> stats{{0, 0, PairKind::kNeighbor, 0.5, 3},
                                           {0, 1, PairKind::kNeighbor, std::nullopt, 0},
                                           {0, 2, PairKind::kNeighbor, 0.75, 1},
                                           {1, 0, PairKind::kNeighbor, 0.1, 1}};
  EXPECT_DOUBLE_EQ(*mean_over_groups(stats, 0, PairKind::kNeighbor), 0.625);
  EXPECT_FALSE(mean_over_groups(stats, 0, PairKind::kNonNeighbor).has_value());
}

TEST(MetricsCsv, RoundTripsExactly) {
  testing::TempDir dir;
  const auto split = split_dataset(testing::random_graph(30, 90, 0.1, 13), 0.8, 13);
  const auto report = evaluate(testing::random_codebook(30, 90, 1, 16, 13), split);
  write_metrics_csv(report, dir / "m.csv");
  const auto back = read_metrics_csv(dir / "m.csv");
  EXPECT_EQ(back.ks, report.ks);
  EXPECT_EQ(back.recall, report.recall);
  EXPECT_EQ(back.ndcg, report.ndcg);
}

TEST(SimilarityCsv, WritesMissingGroupsAsNa) {
  testing::TempDir dir;
  const std::vector<GroupSimilarity> stats{{0, 0, PairKind::kNeighbor, 0.5, 3},
                                           {2, 7, PairKind::kNonNeighbor, std::nullopt, 0}};
  write_similarity_csv(stats, dir / "s.csv");
  EXPECT_EQ(testing::read_file(dir / "s.csv"),
            "layer,group,kind,mean,count\n0,1,neighbor,0.5,3\n2,8,non-neighbor,NA,0\n");
}

}  // namespace
}  // namespace sgbh
