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

#ifndef SGBH_LOSSES_HPP_
#define SGBH_LOSSES_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "sgbh/graph.hpp"
#include "sgbh/matrix.hpp"
#include "sgbh/model.hpp"

namespace sgbh {

struct Triple {
  NodeIndex source = 0;
  NodeIndex positive = 0;
  NodeIndex negative = 0;
};

using Batch = std::vector<Triple>;

struct BprResult {
  double loss = 0.0;              // mean of -log sigmoid(s+ - s-)
  std::vector<double> grad_pos;   // d loss / d s+
  std::vector<double> grad_neg;   // d loss / d s-
};

BprResult bpr_loss(std::span<const double> scores_pos,
                   std::span<const double> scores_neg);

struct BprTerms {
  double main = 0.0;     // all segments
  double shallow = 0.0;  // segment 0
  double conv = 0.0;     // segments 1..L
};

struct BprWeights {
  double main = 1.0;
  double shallow = 0.0;
  double conv = 0.0;
};

// Evaluates the three BPR terms on `batch` and adds weight * d term / d q^(l)
// into layer_grads[l] (N x d each). A term with weight 0 is skipped and
// reported as 0, except the main term which is always evaluated.
BprTerms bpr_terms(const FinalEmbedding& final, const Batch& batch,
                   const BprWeights& weights, std::vector<Matrix>& layer_grads);

struct ContrastiveResult {
  double loss = 0.0;
  Matrix grad_anchor;
  Matrix grad_positive;
};

// Mean over rows i of -log softmax_j(cos(a_i, p_j) / tau)[i]. Norms are
// floored at 1e-12.
ContrastiveResult info_nce(const Matrix& anchors, const Matrix& positives,
                           double tau);

// InfoNCE of the last layer against itself; the returned anchor gradient is
// the total gradient and grad_positive is empty.
ContrastiveResult contrastive_loss_last(const Matrix& last, double tau);

// InfoNCE with anchor q^(L)_i and positive e*_i = sum_l w_l q^(l)_i.
ContrastiveResult contrastive_loss_deep(const Matrix& last,
                                        const Matrix& deep_sum, double tau);

struct LossTerms {
  double main = 0.0;
  double contrastive = 0.0;
  double shallow = 0.0;
  double conv = 0.0;
  double l2 = 0.0;  // sum of squared table entries over touched rows / |batch|
};

struct LossWeights {
  double gamma = 0.0;
  double beta0 = 0.0;
  double beta1 = 0.0;
  double lambda = 0.0;
};

// main + gamma * cl + beta0 * bpr0 + beta1 * conv + lambda * l2.
double total_loss(const LossTerms& terms, const LossWeights& weights);

}  // namespace sgbh

#endif  // SGBH_LOSSES_HPP_
