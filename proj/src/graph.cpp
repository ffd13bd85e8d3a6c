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

#include "sgbh/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "sgbh/random.hpp"

namespace sgbh {
namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

bool parse_index(std::string_view token, NodeIndex& out) {
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end;
}

// Recognizes `# num_sources=<U> num_destinations=<V>`.
bool parse_header(std::string_view line, std::size_t& nu, std::size_t& nv) {
  auto fields = split_fields(line.substr(1));
  bool has_u = false, has_v = false;
  for (auto f : fields) {
    auto eq = f.find('=');
    if (eq == std::string_view::npos) continue;
    auto key = f.substr(0, eq);
    auto value = f.substr(eq + 1);
    std::size_t parsed = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), parsed);
    if (ec != std::errc() || ptr != value.data() + value.size()) continue;
    if (key == "num_sources") { nu = parsed; has_u = true; }
    if (key == "num_destinations") { nv = parsed; has_v = true; }
  }
  return has_u && has_v;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list: " + path.string());
  return in;
}

}  // namespace

BipartiteGraph BipartiteGraph::from_edges(std::size_t num_sources,
                                          std::size_t num_destinations,
                                          std::vector<Edge> edges) {
  for (const Edge& e : edges) {
    if (e.source >= num_sources || e.destination >= num_destinations) {
      throw std::invalid_argument("edge (" + std::to_string(e.source) + ", " +
                                  std::to_string(e.destination) +
                                  ") out of range");
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  BipartiteGraph g;
  g.num_sources_ = num_sources;
  g.num_destinations_ = num_destinations;
  g.source_adj_.resize(num_sources);
  g.destination_adj_.resize(num_destinations);
  for (const Edge& e : edges) {
    g.source_adj_[e.source].push_back(e.destination);
    g.destination_adj_[e.destination].push_back(e.source);
  }
  // Source lists are sorted by construction; destination lists are filled in
  // source order, which is also sorted.
  g.edges_ = std::move(edges);
  return g;
}

bool BipartiteGraph::has_edge(NodeIndex u, NodeIndex v) const {
  if (u >= num_sources_) return false;
  const auto& adj = source_adj_[u];
  return std::binary_search(adj.begin(), adj.end(), v);
}

BipartiteGraph load_edge_list(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::vector<Edge> edges;
  std::size_t header_u = 0, header_v = 0;
  bool has_header = false;
  std::size_t max_u = 0, max_v = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (fields[0].front() == '#') {
      if (!has_header) has_header = parse_header(line.substr(line.find('#')), header_u, header_v);
      continue;
    }
    Edge e;
    if (fields.size() != 2 || !parse_index(fields[0], e.source) ||
        !parse_index(fields[1], e.destination)) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                           ": expected two non-negative integers",
                       line_no);
    }
    max_u = std::max<std::size_t>(max_u, e.source + 1);
    max_v = std::max<std::size_t>(max_v, e.destination + 1);
    edges.push_back(e);
  }
  if (edges.empty()) {
    throw ParseError(path.string() + ": edge list is empty", line_no);
  }
  if (has_header) {
    if (max_u > header_u || max_v > header_v) {
      throw ParseError(path.string() + ": index exceeds header node counts", 0);
    }
    return BipartiteGraph::from_edges(header_u, header_v, std::move(edges));
  }
  return BipartiteGraph::from_edges(max_u, max_v, std::move(edges));
}

void write_edge_list(const BipartiteGraph& graph,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write edge list: " + path.string());
  out << "# num_sources=" << graph.num_sources()
      << " num_destinations=" << graph.num_destinations() << "\n";
  for (const Edge& e : graph.edges()) {
    out << e.source << '\t' << e.destination << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

RemappedGraph load_edge_list_remapped(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  RemappedGraph result;
  std::unordered_map<std::string, NodeIndex> source_index, destination_index;
  auto intern = [](std::unordered_map<std::string, NodeIndex>& index,
                   std::vector<std::string>& ids, std::string_view raw) {
    auto [it, inserted] =
        index.try_emplace(std::string(raw), static_cast<NodeIndex>(ids.size()));
    if (inserted) ids.emplace_back(raw);
    return it->second;
  };
  std::vector<Edge> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_fields(line);
    if (fields.empty() || fields[0].front() == '#') continue;
    if (fields.size() != 2) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                           ": expected two identifiers",
                       line_no);
    }
    edges.push_back({intern(source_index, result.mapping.source_ids, fields[0]),
                     intern(destination_index,
                            result.mapping.destination_ids, fields[1])});
  }
  if (edges.empty()) {
    throw ParseError(path.string() + ": edge list is empty", line_no);
  }
  result.graph = BipartiteGraph::from_edges(
      result.mapping.source_ids.size(), result.mapping.destination_ids.size(),
      std::move(edges));
  return result;
}

void write_id_mapping(const IdMapping& mapping,
                      const std::filesystem::path& prefix) {
  auto write_one = [](const std::vector<std::string>& ids,
                      const std::filesystem::path& p) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write mapping: " + p.string());
    for (std::size_t i = 0; i < ids.size(); ++i) out << i << '\t' << ids[i] << '\n';
  };
  write_one(mapping.source_ids, prefix.string() + ".sources.map");
  write_one(mapping.destination_ids, prefix.string() + ".destinations.map");
}

DatasetSplit split_dataset(const BipartiteGraph& graph, double ratio,
                           std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw std::invalid_argument("split ratio must lie in (0, 1)");
  }
  Rng rng = make_rng(seed, "split");
  std::vector<Edge> train, test;
  train.reserve(graph.num_edges());
  std::vector<NodeIndex> order;
  for (NodeIndex u = 0; u < graph.num_sources(); ++u) {
    auto nbrs = graph.source_neighbors(u);
    if (nbrs.empty()) continue;
    order.assign(nbrs.begin(), nbrs.end());
    std::shuffle(order.begin(), order.end(), rng);
    auto quota = static_cast<std::size_t>(std::lround(ratio * static_cast<double>(order.size())));
    quota = std::clamp<std::size_t>(quota, 1, order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      (i < quota ? train : test).push_back({u, order[i]});
    }
  }
  return {BipartiteGraph::from_edges(graph.num_sources(),
                                     graph.num_destinations(), std::move(train)),
          BipartiteGraph::from_edges(graph.num_sources(),
                                     graph.num_destinations(), std::move(test))};
}

double NormalizedAdjacency::at(std::size_t r, std::size_t c) const {
  auto begin = columns_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[r]);
  auto end = columns_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[r + 1]);
  auto it = std::lower_bound(begin, end, static_cast<NodeIndex>(c));
  if (it == end || *it != c) return 0.0;
  return values_[static_cast<std::size_t>(it - columns_.begin())];
}

Matrix NormalizedAdjacency::multiply(const Matrix& in) const {
  if (in.rows() != num_nodes()) {
    throw std::invalid_argument("adjacency/embedding row mismatch");
  }
  Matrix out(in.rows(), in.cols());
  for (std::size_t r = 0; r < num_nodes(); ++r) {
    auto dst = out.row(r);
    for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      axpy(values_[k], in.row(columns_[k]), dst);
    }
  }
  return out;
}

NormalizedAdjacency build_normalized_adjacency(const BipartiteGraph& train) {
  const std::size_t nu = train.num_sources();
  const std::size_t n = train.num_nodes();
  auto degree = [&](std::size_t node) {
    return node < nu ? train.source_neighbors(static_cast<NodeIndex>(node)).size()
                     : train.destination_neighbors(static_cast<NodeIndex>(node - nu)).size();
  };
  NormalizedAdjacency adj;
  adj.row_offsets_.resize(n + 1, 0);
  adj.columns_.reserve(2 * train.num_edges());
  adj.values_.reserve(2 * train.num_edges());
  for (std::size_t node = 0; node < n; ++node) {
    const double sqrt_self = std::sqrt(static_cast<double>(degree(node)));
    if (node < nu) {
      for (NodeIndex v : train.source_neighbors(static_cast<NodeIndex>(node))) {
        const std::size_t col = nu + v;
        adj.columns_.push_back(static_cast<NodeIndex>(col));
        adj.values_.push_back(1.0 / (sqrt_self * std::sqrt(static_cast<double>(degree(col)))));
      }
    } else {
      for (NodeIndex u : train.destination_neighbors(static_cast<NodeIndex>(node - nu))) {
        adj.columns_.push_back(u);
        adj.values_.push_back(1.0 / (std::sqrt(static_cast<double>(degree(u))) * sqrt_self));
      }
    }
    adj.row_offsets_[node + 1] = adj.columns_.size();
  }
  return adj;
}

}  // namespace sgbh
