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

#ifndef SGBH_SAMPLER_HPP_
#define SGBH_SAMPLER_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "sgbh/graph.hpp"
#include "sgbh/matrix.hpp"
#include "sgbh/model.hpp"
#include "sgbh/random.hpp"

namespace sgbh {

// K-means centers over layer-0 destination codes. Centers stay real-valued:
// each coordinate is the mean sign of the cluster members on that dimension.
struct HashCenterSet {
  Matrix centers;                              // |C| x d, values in [-1, 1]
  std::vector<std::vector<NodeIndex>> members;  // destination indices
  std::vector<std::uint32_t> assignment;        // destination -> center
  std::vector<double> distortion;               // after each Lloyd iteration
  std::size_t epoch = 0;

  std::size_t size() const { return centers.rows(); }
};

// Thrown when every destination is a training neighbor of the query source.
class NoNegativeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Lloyd iterations under squared Euclidean distance, seeded with k distinct
// codes drawn at random. An emptied cluster takes over the point farthest
// from its center. Throws std::invalid_argument if k is 0 or exceeds the
// number of rows.
HashCenterSet kmeans_binary(const Matrix& codes, std::size_t k,
                            std::size_t max_iters, std::uint64_t seed);

// Softmax over q_u^(0) . c_i.
std::vector<double> center_selection_probs(std::span<const double> query,
                                           const Matrix& centers);

struct SamplerStats {
  std::size_t draws = 0;
  std::size_t fallbacks = 0;
};

inline constexpr int kRejectionBudget = 10;

// Picks a center from `probs`, then a uniform member of it that is not in
// `train_neighbors` (sorted), retrying up to kRejectionBudget times before
// falling back to sample_negative_uniform.
NodeIndex sample_negative(std::span<const double> probs,
                          const HashCenterSet& centers,
                          std::span<const NodeIndex> train_neighbors,
                          std::size_t num_destinations, Rng& rng,
                          SamplerStats* stats = nullptr);

// Uniform over destinations outside `train_neighbors` (sorted).
NodeIndex sample_negative_uniform(std::size_t num_destinations,
                                  std::span<const NodeIndex> train_neighbors,
                                  Rng& rng);

// Binarizes q_v^(0) of every destination (dropping alpha) and clusters the
// codes. The k-means stream is seeded from (seed, epoch).
HashCenterSet refresh_centers(const LayerEmbeddings& state,
                              std::size_t num_sources, std::size_t k,
                              std::size_t max_iters, std::uint64_t seed,
                              std::size_t epoch);

}  // namespace sgbh

#endif  // SGBH_SAMPLER_HPP_
