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

#include "sgbh/synthetic.hpp"

#include <random>
#include <stdexcept>
#include <vector>

#include "sgbh/random.hpp"

namespace sgbh {

std::size_t source_block(const PlantedBlockSpec& spec, std::size_t u) {
  return u * spec.blocks / spec.sources;
}

std::size_t destination_block(const PlantedBlockSpec& spec, std::size_t v) {
  return v * spec.blocks / spec.destinations;
}

BipartiteGraph planted_block_graph(const PlantedBlockSpec& spec) {
  if (spec.blocks < 1) throw std::invalid_argument("block count must be >= 1");
  if (spec.blocks > spec.sources || spec.blocks > spec.destinations) {
    throw std::invalid_argument("more blocks than nodes on one side");
  }
  auto valid = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!valid(spec.p_in) || !valid(spec.p_out)) {
    throw std::invalid_argument("edge probabilities must lie in [0, 1]");
  }
  if (spec.p_in == 0.0 && spec.p_out == 0.0) {
    throw std::invalid_argument("p_in and p_out are both 0: the graph would be empty");
  }
  Rng rng = make_rng(spec.seed, "synth");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < spec.sources; ++u) {
    for (std::size_t v = 0; v < spec.destinations; ++v) {
      const double p =
          source_block(spec, u) == destination_block(spec, v) ? spec.p_in : spec.p_out;
      if (unit(rng) < p) {
        edges.push_back({static_cast<NodeIndex>(u), static_cast<NodeIndex>(v)});
      }
    }
  }
  return BipartiteGraph::from_edges(spec.sources, spec.destinations, std::move(edges));
}

}  // namespace sgbh
