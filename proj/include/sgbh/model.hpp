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

#ifndef SGBH_MODEL_HPP_
#define SGBH_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgbh/graph.hpp"
#include "sgbh/matrix.hpp"

namespace sgbh {

// Raised when a forward pass or a loss produces a non-finite value.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelConfig {
  std::size_t dim = 64;     // d, bits per layer
  std::size_t layers = 2;   // L, graph convolutions
  // w_l for l = 1..L in the deep-layer sum. Empty means 1/L each.
  std::vector<double> layer_weights;
  double fourier_h = 3.0;
  int fourier_terms = 11;
  std::uint64_t seed = 2026;

  // Throws std::invalid_argument on a violated invariant.
  void validate() const;
  double layer_weight(std::size_t l) const;
};

struct EmbeddingTable {
  Matrix values;  // (|U|+|V|) x d, the only learnable parameters
};

// Xavier-uniform in [-sqrt(6/(2d)), +sqrt(6/(2d))].
EmbeddingTable init_embeddings(const ModelConfig& cfg, std::size_t num_nodes);

double xavier_bound(std::size_t dim);

struct HashCode {
  double alpha = 0.0;
  std::vector<double> code;  // entries in {-1, +1}
};

// alpha = ||x||_1 / d, b = sign(x) with sign(0) = +1.
HashCode adaptive_hash(std::span<const double> x);

enum class Binarizer {
  kSign,              // production forward
  kFourierSurrogate,  // smooth stand-in for gradient checks
};

// Per-layer forward state. `codes` holds b in {-1,+1} for kSign and the
// smooth surrogate values otherwise; q = alpha * codes row-wise.
struct LayerState {
  Matrix hidden;
  Matrix codes;
  std::vector<double> alpha;

  Matrix mixed() const;
};

struct LayerEmbeddings {
  std::vector<LayerState> layers;  // l = 0..L

  std::size_t depth() const { return layers.size() - 1; }
  std::size_t num_nodes() const { return layers.front().hidden.rows(); }
  std::size_t dim() const { return layers.front().hidden.cols(); }
};

// Concatenation q^(0) || ... || q^(L) per node.
struct FinalEmbedding {
  Matrix values;  // N x (L+1)d
  std::size_t dim = 0;
  std::size_t depth = 0;
  std::size_t num_sources = 0;

  std::size_t num_segments() const { return depth + 1; }
  std::span<const double> segment(std::size_t node, std::size_t l) const {
    return values.row(node).subspan(l * dim, dim);
  }
  std::span<double> segment(std::size_t node, std::size_t l) {
    return values.row(node).subspan(l * dim, dim);
  }
};

// x^(l+1) = A q^(l).
Matrix graph_convolve(const NormalizedAdjacency& adj, const Matrix& mixed);

struct ForwardResult {
  LayerEmbeddings state;
  FinalEmbedding final;
};

// Throws DivergenceError on a non-finite rescaling factor.
ForwardResult forward(const EmbeddingTable& table,
                      const NormalizedAdjacency& adj, const ModelConfig& cfg,
                      std::size_t num_sources,
                      Binarizer binarizer = Binarizer::kSign);

FinalEmbedding concatenate(const LayerEmbeddings& state,
                           std::size_t num_sources);

enum class Scenario { kNone, kSources, kDestinations, kBoth };

Scenario parse_scenario(const std::string& name);

// Replaces alpha by 1 (keeping only the sign) on the chosen node set and
// layers. Throws std::invalid_argument for an empty or out-of-range layer set.
FinalEmbedding binarize_scenario(const FinalEmbedding& final, Scenario scenario,
                                 std::span<const std::size_t> layers);

// Keeps only the listed segments, in order, as a shallower embedding.
FinalEmbedding select_segments(const FinalEmbedding& final,
                               std::span<const std::size_t> layers);

}  // namespace sgbh

#endif  // SGBH_MODEL_HPP_
