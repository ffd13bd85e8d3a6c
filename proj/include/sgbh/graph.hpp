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

#ifndef SGBH_GRAPH_HPP_
#define SGBH_GRAPH_HPP_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgbh/matrix.hpp"

namespace sgbh {

using NodeIndex = std::uint32_t;

struct Edge {
  NodeIndex source = 0;
  NodeIndex destination = 0;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Bipartite interaction graph G = (U, V, E) with dense 0-based indices on
// both sides. Edges are kept sorted by (source, destination) and unique.
class BipartiteGraph {
 public:
  BipartiteGraph() = default;

  // Duplicates are dropped. Throws std::invalid_argument on an out-of-range
  // index.
  static BipartiteGraph from_edges(std::size_t num_sources,
                                   std::size_t num_destinations,
                                   std::vector<Edge> edges);

  std::size_t num_sources() const { return num_sources_; }
  std::size_t num_destinations() const { return num_destinations_; }
  std::size_t num_nodes() const { return num_sources_ + num_destinations_; }
  std::size_t num_edges() const { return edges_.size(); }
  std::span<const Edge> edges() const { return edges_; }

  // Sorted neighbor lists.
  std::span<const NodeIndex> source_neighbors(NodeIndex u) const {
    return source_adj_[u];
  }
  std::span<const NodeIndex> destination_neighbors(NodeIndex v) const {
    return destination_adj_[v];
  }
  bool has_edge(NodeIndex u, NodeIndex v) const;

  friend bool operator==(const BipartiteGraph& a, const BipartiteGraph& b) {
    return a.num_sources_ == b.num_sources_ &&
           a.num_destinations_ == b.num_destinations_ && a.edges_ == b.edges_;
  }

 private:
  std::size_t num_sources_ = 0;
  std::size_t num_destinations_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeIndex>> source_adj_;
  std::vector<std::vector<NodeIndex>> destination_adj_;
};

// Reads `<u> <v>` lines (tab or space separated). Lines starting with '#'
// are comments, except a header `# num_sources=<U> num_destinations=<V>`
// which fixes the node counts. Without a header the counts are max index + 1.
BipartiteGraph load_edge_list(const std::filesystem::path& path);

// Writes the header line and one edge per line; load_edge_list reads it back
// to an identical graph.
void write_edge_list(const BipartiteGraph& graph,
                     const std::filesystem::path& path);

// Raw identifiers for each dense index, in index order.
struct IdMapping {
  std::vector<std::string> source_ids;
  std::vector<std::string> destination_ids;
};

struct RemappedGraph {
  BipartiteGraph graph;
  IdMapping mapping;
};

// Like load_edge_list, but accepts arbitrary non-whitespace tokens as IDs and
// assigns dense indices in order of first appearance.
RemappedGraph load_edge_list_remapped(const std::filesystem::path& path);

// Writes `<prefix>.sources.map` and `<prefix>.destinations.map`, each with
// lines `<dense index>\t<raw id>`.
void write_id_mapping(const IdMapping& mapping,
                      const std::filesystem::path& prefix);

struct DatasetSplit {
  BipartiteGraph train;
  BipartiteGraph test;

  std::size_t num_sources() const { return train.num_sources(); }
  std::size_t num_destinations() const { return train.num_destinations(); }
};

// Per-source stratified split: each source keeps round(ratio * deg) of its
// edges for training (at least one when deg >= 1), chosen by a seeded
// shuffle. Throws std::invalid_argument unless 0 < ratio < 1.
DatasetSplit split_dataset(const BipartiteGraph& graph, double ratio,
                           std::uint64_t seed);

// Symmetric degree-normalized adjacency D^-1/2 A D^-1/2 over all |U|+|V|
// nodes in CSR layout. Source u is row u, destination v is row |U|+v.
class NormalizedAdjacency {
 public:
  NormalizedAdjacency() = default;

  std::size_t num_nodes() const { return row_offsets_.empty() ? 0 : row_offsets_.size() - 1; }
  std::size_t num_nonzeros() const { return columns_.size(); }

  std::span<const std::size_t> row_offsets() const { return row_offsets_; }
  std::span<const NodeIndex> columns() const { return columns_; }
  std::span<const double> values() const { return values_; }

  // Returns entry (r, c), zero when absent.
  double at(std::size_t r, std::size_t c) const;

  // out = A * in. Rows of `in` are node embeddings.
  Matrix multiply(const Matrix& in) const;

 private:
  friend NormalizedAdjacency build_normalized_adjacency(const BipartiteGraph&);
  std::vector<std::size_t> row_offsets_;
  std::vector<NodeIndex> columns_;
  std::vector<double> values_;
};

// Degrees are taken from `train` only.
NormalizedAdjacency build_normalized_adjacency(const BipartiteGraph& train);
inline NormalizedAdjacency build_normalized_adjacency(const DatasetSplit& split) {
  return build_normalized_adjacency(split.train);
}

}  // namespace sgbh

#endif  // SGBH_GRAPH_HPP_
