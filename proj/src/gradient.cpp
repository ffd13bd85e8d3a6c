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

#include "sgbh/gradient.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sgbh {
namespace {

void hash_backward_into(std::span<const double> x, std::span<const double> codes,
                        std::span<const double> grad_q, double h, int n,
                        std::span<double> out) {
  const std::size_t d = x.size();
  double alpha = 0.0;
  double code_dot_grad = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    alpha += std::abs(x[i]);
    code_dot_grad += codes[i] * grad_q[i];
  }
  alpha /= static_cast<double>(d);
  const double rank_one = code_dot_grad / static_cast<double>(d);
  for (std::size_t j = 0; j < d; ++j) {
    const double abs_grad = x[j] >= 0.0 ? 1.0 : -1.0;
    out[j] = alpha * fourier_sign_grad(x[j], h, n) * grad_q[j] + abs_grad * rank_one;
  }
}

}  // namespace

std::vector<double> adaptive_hash_backward(std::span<const double> x,
                                           std::span<const double> codes,
                                           std::span<const double> grad_q,
                                           double fourier_h, int fourier_terms) {
  if (codes.size() != x.size() || grad_q.size() != x.size()) {
    throw std::invalid_argument("adaptive_hash_backward: length mismatch");
  }
  std::vector<double> out(x.size());
  if (x.empty()) return out;
  hash_backward_into(x, codes, grad_q, fourier_h, fourier_terms, out);
  return out;
}

std::vector<double> adaptive_hash_backward(std::span<const double> x,
                                           std::span<const double> grad_q,
                                           double fourier_h, int fourier_terms) {
  std::vector<double> codes(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) codes[i] = x[i] >= 0.0 ? 1.0 : -1.0;
  return adaptive_hash_backward(x, codes, grad_q, fourier_h, fourier_terms);
}

Matrix convolve_backward(const NormalizedAdjacency& adj, const Matrix& grad_next) {
  return adj.multiply(grad_next);
}

GradientBuffer model_backward(const LayerEmbeddings& state,
                              const NormalizedAdjacency& adj,
                              std::span<const Matrix> loss_grads,
                              const ModelConfig& cfg) {
  if (state.layers.empty() || loss_grads.size() != state.layers.size()) {
    throw std::invalid_argument("model_backward: one gradient per layer required");
  }
  for (std::size_t l = 0; l < loss_grads.size(); ++l) {
    if (!loss_grads[l].same_shape(state.layers[l].hidden)) {
      throw std::invalid_argument("model_backward: gradient shape mismatch at layer " +
                                  std::to_string(l));
    }
  }
  const std::size_t depth = state.depth();
  GradientBuffer buffer;
  buffer.hidden.resize(depth + 1);
  Matrix carry;  // dLoss/dq^(l) arriving from layer l+1
  for (std::size_t step = 0; step <= depth; ++step) {
    const std::size_t l = depth - step;
    const LayerState& layer = state.layers[l];
    Matrix grad_q = loss_grads[l];
    if (!carry.empty()) grad_q += carry;
    Matrix& grad_x = buffer.hidden[l];
    grad_x = Matrix(grad_q.rows(), grad_q.cols());
    for (std::size_t r = 0; r < grad_q.rows(); ++r) {
      auto g = grad_q.row(r);
      if (std::all_of(g.begin(), g.end(), [](double v) { return v == 0.0; })) continue;
      hash_backward_into(layer.hidden.row(r), layer.codes.row(r), grad_q.row(r),
                         cfg.fourier_h, cfg.fourier_terms, grad_x.row(r));
    }
    if (l > 0) carry = convolve_backward(adj, grad_x);
  }
  buffer.table = buffer.hidden[0];
  return buffer;
}

ForwardResult surrogate_forward(const EmbeddingTable& table,
                                const NormalizedAdjacency& adj,
                                const ModelConfig& cfg, std::size_t num_sources) {
  return forward(table, adj, cfg, num_sources, Binarizer::kFourierSurrogate);
}

}  // namespace sgbh
