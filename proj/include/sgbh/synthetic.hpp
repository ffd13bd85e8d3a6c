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

#ifndef SGBH_SYNTHETIC_HPP_
#define SGBH_SYNTHETIC_HPP_

#include <cstddef>
#include <cstdint>

#include "sgbh/graph.hpp"

namespace sgbh {

// Planted block-bipartite graph: sources and destinations are cut into
// `blocks` contiguous ranges; a pair in the same block is linked with
// probability p_in, otherwise with p_out.
struct PlantedBlockSpec {
  std::size_t blocks = 8;
  std::size_t sources = 40;
  std::size_t destinations = 60;
  double p_in = 0.6;
  double p_out = 0.02;
  std::uint64_t seed = 2026;
};

std::size_t source_block(const PlantedBlockSpec& spec, std::size_t u);
std::size_t destination_block(const PlantedBlockSpec& spec, std::size_t v);

// Throws std::invalid_argument for a block count of 0, more blocks than nodes
// on either side, probabilities outside [0, 1], or p_in = p_out = 0.
BipartiteGraph planted_block_graph(const PlantedBlockSpec& spec);

}  // namespace sgbh

#endif  // SGBH_SYNTHETIC_HPP_
