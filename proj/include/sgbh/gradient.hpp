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

#ifndef SGBH_GRADIENT_HPP_
#define SGBH_GRADIENT_HPP_

#include <span>
#include <vector>

#include "sgbh/fourier.hpp"
#include "sgbh/graph.hpp"
#include "sgbh/matrix.hpp"
#include "sgbh/model.hpp"

namespace sgbh {

struct GradientBuffer {
  std::vector<Matrix> hidden;  // dLoss/dx^(l), l = 0..L
  Matrix table;                // dLoss/dx^(0), same shape as EmbeddingTable
};

// Vector-Jacobian product of q = alpha(x) * b(x) with
//   dq_i/dx_j = alpha * s'(x_i) [i == j] + b_i * sign(x_j) / d,
// where s' is the Fourier estimate of the sign derivative. `codes` is the b
// used in the forward pass (sign codes, or surrogate values).
std::vector<double> adaptive_hash_backward(std::span<const double> x,
                                           std::span<const double> codes,
                                           std::span<const double> grad_q,
                                           double fourier_h, int fourier_terms);

// Same, with b = sign(x).
std::vector<double> adaptive_hash_backward(std::span<const double> x,
                                           std::span<const double> grad_q,
                                           double fourier_h, int fourier_terms);

// A^T g; A is symmetric so this is A g.
Matrix convolve_backward(const NormalizedAdjacency& adj, const Matrix& grad_next);

// Reverse sweep over the layers. `loss_grads[l]` is dLoss/dq^(l) for every
// node. Throws std::invalid_argument on a shape mismatch.
GradientBuffer model_backward(const LayerEmbeddings& state,
                              const NormalizedAdjacency& adj,
                              std::span<const Matrix> loss_grads,
                              const ModelConfig& cfg);

// forward() with sign replaced by its truncated Fourier series, whose exact
// derivative is fourier_sign_grad. Test oracle only.
ForwardResult surrogate_forward(const EmbeddingTable& table,
                                const NormalizedAdjacency& adj,
                                const ModelConfig& cfg, std::size_t num_sources);

}  // namespace sgbh

#endif  // SGBH_GRADIENT_HPP_
