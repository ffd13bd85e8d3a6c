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

#include "sgbh/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sgbh {
namespace {

// log(1 + exp(x)) without overflow.
double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double segment_score(const FinalEmbedding& final, std::size_t a, std::size_t b,
                     std::size_t first, std::size_t last) {
  double s = 0.0;
  for (std::size_t l = first; l <= last; ++l) {
    s += dot(final.segment(a, l), final.segment(b, l));
  }
  return s;
}

// Returns the term value and accumulates its weighted gradient.
double bpr_on_segments(const FinalEmbedding& final, const Batch& batch,
                       std::size_t first, std::size_t last, double weight,
                       std::vector<Matrix>& layer_grads) {
  const std::size_t nu = final.num_sources;
  std::vector<double> pos(batch.size()), neg(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Triple& t = batch[i];
    pos[i] = segment_score(final, t.source, nu + t.positive, first, last);
    neg[i] = segment_score(final, t.source, nu + t.negative, first, last);
  }
  BprResult r = bpr_loss(pos, neg);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Triple& t = batch[i];
    const double gp = weight * r.grad_pos[i];
    const double gn = weight * r.grad_neg[i];
    for (std::size_t l = first; l <= last; ++l) {
      auto qu = final.segment(t.source, l);
      auto qp = final.segment(nu + t.positive, l);
      auto qn = final.segment(nu + t.negative, l);
      Matrix& g = layer_grads[l];
      axpy(gp, qp, g.row(t.source));
      axpy(gn, qn, g.row(t.source));
      axpy(gp, qu, g.row(nu + t.positive));
      axpy(gn, qu, g.row(nu + t.negative));
    }
  }
  return r.loss;
}

}  // namespace

BprResult bpr_loss(std::span<const double> scores_pos,
                   std::span<const double> scores_neg) {
  if (scores_pos.size() != scores_neg.size()) {
    throw std::invalid_argument("bpr_loss: score vectors differ in length");
  }
  const std::size_t n = scores_pos.size();
  BprResult r;
  r.grad_pos.resize(n);
  r.grad_neg.resize(n);
  if (n == 0) return r;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double margin = scores_pos[i] - scores_neg[i];
    r.loss += softplus(-margin);
    const double g = sigmoid(-margin) * inv_n;
    r.grad_pos[i] = -g;
    r.grad_neg[i] = g;
  }
  r.loss *= inv_n;
  return r;
}

BprTerms bpr_terms(const FinalEmbedding& final, const Batch& batch,
                   const BprWeights& weights, std::vector<Matrix>& layer_grads) {
  if (layer_grads.size() != final.num_segments()) {
    throw std::invalid_argument("bpr_terms: one gradient matrix per layer required");
  }
  BprTerms terms;
  terms.main = bpr_on_segments(final, batch, 0, final.depth, weights.main, layer_grads);
  if (weights.shallow != 0.0) {
    terms.shallow = bpr_on_segments(final, batch, 0, 0, weights.shallow, layer_grads);
  }
  if (weights.conv != 0.0 && final.depth >= 1) {
    terms.conv = bpr_on_segments(final, batch, 1, final.depth, weights.conv, layer_grads);
  }
  return terms;
}

ContrastiveResult info_nce(const Matrix& anchors, const Matrix& positives,
                           double tau) {
  if (!anchors.same_shape(positives)) {
    throw std::invalid_argument("info_nce: anchor/positive shape mismatch");
  }
  if (!(tau > 0.0)) throw std::invalid_argument("info_nce: tau must be > 0");
  constexpr double kNormFloor = 1e-12;
  const std::size_t m = anchors.rows();
  const std::size_t d = anchors.cols();
  ContrastiveResult out{0.0, Matrix(m, d), Matrix(m, d)};
  if (m == 0) return out;

  auto normalize = [&](const Matrix& x, std::vector<double>& norms) {
    Matrix unit(m, d);
    norms.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      norms[i] = std::max(std::sqrt(dot(x.row(i), x.row(i))), kNormFloor);
      for (std::size_t k = 0; k < d; ++k) unit(i, k) = x(i, k) / norms[i];
    }
    return unit;
  };
  std::vector<double> anchor_norm, positive_norm;
  const Matrix a = normalize(anchors, anchor_norm);
  const Matrix p = normalize(positives, positive_norm);

  Matrix sim(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) sim(i, j) = dot(a.row(i), p.row(j));
  }

  // coef(i, j) = d loss / d sim(i, j)
  Matrix coef(m, m);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) {
    double max_logit = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) max_logit = std::max(max_logit, sim(i, j) / tau);
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      coef(i, j) = std::exp(sim(i, j) / tau - max_logit);
      total += coef(i, j);
    }
    out.loss += max_logit + std::log(total) - sim(i, i) / tau;
    for (std::size_t j = 0; j < m; ++j) {
      coef(i, j) = (coef(i, j) / total - (i == j ? 1.0 : 0.0)) * inv_m / tau;
    }
  }
  out.loss *= inv_m;

  // d cos(a, p) / d a = (p_hat - cos * a_hat) / |a|
  for (std::size_t i = 0; i < m; ++i) {
    auto ga = out.grad_anchor.row(i);
    for (std::size_t j = 0; j < m; ++j) {
      const double c = coef(i, j);
      if (c == 0.0) continue;
      for (std::size_t k = 0; k < d; ++k) {
        ga[k] += c * (p(j, k) - sim(i, j) * a(i, k)) / anchor_norm[i];
        out.grad_positive(j, k) += c * (a(i, k) - sim(i, j) * p(j, k)) / positive_norm[j];
      }
    }
  }
  return out;
}

ContrastiveResult contrastive_loss_last(const Matrix& last, double tau) {
  ContrastiveResult r = info_nce(last, last, tau);
  r.grad_anchor += r.grad_positive;
  r.grad_positive = Matrix();
  return r;
}

ContrastiveResult contrastive_loss_deep(const Matrix& last,
                                        const Matrix& deep_sum, double tau) {
  return info_nce(last, deep_sum, tau);
}

double total_loss(const LossTerms& terms, const LossWeights& weights) {
  return terms.main + weights.gamma * terms.contrastive +
         weights.beta0 * terms.shallow + weights.beta1 * terms.conv +
         weights.lambda * terms.l2;
}

}  // namespace sgbh
