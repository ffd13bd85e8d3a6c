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

#include "sgbh/model.hpp"

#include <algorithm>
#include <cmath>

#include "sgbh/fourier.hpp"
#include "sgbh/random.hpp"

namespace sgbh {
namespace {

// Hashes every row of `hidden` into `codes` and `alpha`.
void hash_rows(const Matrix& hidden, Binarizer binarizer, const ModelConfig& cfg,
               Matrix& codes, std::vector<double>& alpha) {
  const std::size_t d = hidden.cols();
  codes = Matrix(hidden.rows(), d);
  alpha.assign(hidden.rows(), 0.0);
  for (std::size_t r = 0; r < hidden.rows(); ++r) {
    auto x = hidden.row(r);
    auto b = codes.row(r);
    double l1 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      l1 += std::abs(x[i]);
      b[i] = binarizer == Binarizer::kSign
                 ? (x[i] >= 0.0 ? 1.0 : -1.0)
                 : fourier_sign_surrogate(x[i], cfg.fourier_h, cfg.fourier_terms);
    }
    alpha[r] = l1 / static_cast<double>(d);
    if (!std::isfinite(alpha[r])) {
      throw DivergenceError("non-finite hidden state at node " + std::to_string(r));
    }
  }
}

}  // namespace

void ModelConfig::validate() const {
  if (dim == 0 || dim % 8 != 0) {
    throw std::invalid_argument("dim must be a positive multiple of 8");
  }
  if (layers < 1) throw std::invalid_argument("layers must be >= 1");
  if (!layer_weights.empty()) {
    if (layer_weights.size() != layers) {
      throw std::invalid_argument("layer_weights needs one weight per layer");
    }
    for (double w : layer_weights) {
      if (!(w > 0.0)) throw std::invalid_argument("layer weights must be > 0");
    }
  }
  if (!(fourier_h > 0.0)) throw std::invalid_argument("fourier_h must be > 0");
  if (fourier_terms < 1) throw std::invalid_argument("fourier_terms must be >= 1");
}

double ModelConfig::layer_weight(std::size_t l) const {
  if (l == 0 || l > layers) throw std::out_of_range("layer weight index");
  if (layer_weights.empty()) return 1.0 / static_cast<double>(layers);
  return layer_weights[l - 1];
}

double xavier_bound(std::size_t dim) {
  return std::sqrt(6.0 / (2.0 * static_cast<double>(dim)));
}

EmbeddingTable init_embeddings(const ModelConfig& cfg, std::size_t num_nodes) {
  if (num_nodes == 0) throw std::invalid_argument("num_nodes must be >= 1");
  const double bound = xavier_bound(cfg.dim);
  Rng rng = make_rng(cfg.seed, "init");
  std::uniform_real_distribution<double> dist(-bound, bound);
  EmbeddingTable table{Matrix(num_nodes, cfg.dim)};
  for (double& v : table.values.flat()) v = dist(rng);
  return table;
}

HashCode adaptive_hash(std::span<const double> x) {
  HashCode h;
  h.code.resize(x.size());
  double l1 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    l1 += std::abs(x[i]);
    h.code[i] = x[i] >= 0.0 ? 1.0 : -1.0;
  }
  h.alpha = x.empty() ? 0.0 : l1 / static_cast<double>(x.size());
  return h;
}

Matrix LayerState::mixed() const {
  Matrix q = codes;
  for (std::size_t r = 0; r < q.rows(); ++r) {
    for (double& v : q.row(r)) v *= alpha[r];
  }
  return q;
}

Matrix graph_convolve(const NormalizedAdjacency& adj, const Matrix& mixed) {
  return adj.multiply(mixed);
}

FinalEmbedding concatenate(const LayerEmbeddings& state,
                           std::size_t num_sources) {
  const std::size_t n = state.num_nodes();
  const std::size_t d = state.dim();
  FinalEmbedding final{Matrix(n, (state.depth() + 1) * d), d, state.depth(),
                       num_sources};
  for (std::size_t l = 0; l <= state.depth(); ++l) {
    const LayerState& layer = state.layers[l];
    for (std::size_t r = 0; r < n; ++r) {
      auto src = layer.codes.row(r);
      auto dst = final.segment(r, l);
      for (std::size_t i = 0; i < d; ++i) dst[i] = layer.alpha[r] * src[i];
    }
  }
  return final;
}

ForwardResult forward(const EmbeddingTable& table,
                      const NormalizedAdjacency& adj, const ModelConfig& cfg,
                      std::size_t num_sources, Binarizer binarizer) {
  if (table.values.cols() != cfg.dim) {
    throw std::invalid_argument("embedding table width does not match dim");
  }
  if (table.values.rows() != adj.num_nodes()) {
    throw std::invalid_argument("embedding table rows do not match graph");
  }
  ForwardResult result;
  auto& layers = result.state.layers;
  layers.resize(cfg.layers + 1);
  layers[0].hidden = table.values;
  for (std::size_t l = 0; l <= cfg.layers; ++l) {
    LayerState& layer = layers[l];
    hash_rows(layer.hidden, binarizer, cfg, layer.codes, layer.alpha);
    if (l < cfg.layers) layers[l + 1].hidden = graph_convolve(adj, layer.mixed());
  }
  result.final = concatenate(result.state, num_sources);
  return result;
}

Scenario parse_scenario(const std::string& name) {
  if (name == "none") return Scenario::kNone;
  if (name == "B_U") return Scenario::kSources;
  if (name == "B_V") return Scenario::kDestinations;
  if (name == "B_UV") return Scenario::kBoth;
  throw std::invalid_argument("unknown binarization scenario: " + name);
}

FinalEmbedding binarize_scenario(const FinalEmbedding& final, Scenario scenario,
                                 std::span<const std::size_t> layers) {
  if (layers.empty()) throw std::invalid_argument("layer subset is empty");
  for (std::size_t l : layers) {
    if (l > final.depth) throw std::invalid_argument("layer out of range");
  }
  FinalEmbedding out = final;
  if (scenario == Scenario::kNone) return out;
  const std::size_t n = final.values.rows();
  std::size_t begin = 0, end = n;
  if (scenario == Scenario::kSources) end = final.num_sources;
  if (scenario == Scenario::kDestinations) begin = final.num_sources;
  for (std::size_t r = begin; r < end; ++r) {
    for (std::size_t l : layers) {
      for (double& v : out.segment(r, l)) v = v >= 0.0 ? 1.0 : -1.0;
    }
  }
  return out;
}

FinalEmbedding select_segments(const FinalEmbedding& final,
                               std::span<const std::size_t> layers) {
  if (layers.empty()) throw std::invalid_argument("layer subset is empty");
  const std::size_t n = final.values.rows();
  FinalEmbedding out{Matrix(n, layers.size() * final.dim), final.dim,
                     layers.size() - 1, final.num_sources};
  for (std::size_t k = 0; k < layers.size(); ++k) {
    if (layers[k] > final.depth) throw std::invalid_argument("layer out of range");
    for (std::size_t r = 0; r < n; ++r) {
      auto src = final.segment(r, layers[k]);
      std::copy(src.begin(), src.end(), out.segment(r, k).begin());
    }
  }
  return out;
}

}  // namespace sgbh
