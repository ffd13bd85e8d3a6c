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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "sgbh/fourier.hpp"
#include "sgbh/gradient.hpp"

namespace sgbh {
namespace {

using testing::relative_error;

constexpr double kH = 3.0;
constexpr int kTerms = 11;

long double grad_oracle(long double phi, long double h, int n) {
  const long double pi = 3.141592653589793238462643383279502884L;
  long double s = 0.0L;
  for (int i = 1; i <= n; i += 2) s += std::cos(pi * i * phi / h);
  return 4.0L / h * s;
}

TEST(FourierSignGrad, AtZeroCountsSixOddTerms) {
  EXPECT_EQ(fourier_sign_grad(0.0, 3.0, 11), 8.0);
}

TEST(FourierSignGrad, AtHalfPeriodFlipsSign) {
  EXPECT_NEAR(fourier_sign_grad(kH, kH, kTerms), -8.0, 1e-12);
  EXPECT_NEAR(fourier_sign_grad(2.0, 2.0, 5), -(4.0 / 2.0) * 3.0, 1e-12);
}

TEST(FourierSignGrad, MatchesExtendedPrecisionSum) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> phi(-kH, kH);
  for (int trial = 0; trial < 1000; ++trial) {
    const double p = phi(rng);
    EXPECT_NEAR(fourier_sign_grad(p, kH, kTerms),
                static_cast<double>(grad_oracle(p, kH, kTerms)), 1e-12);
  }
}

TEST(FourierSurrogate, ApproachesSignAwayFromZero) {
  for (double frac = 0.3; frac <= 0.9 + 1e-12; frac += 0.01) {
    const double p = frac * kH;
    EXPECT_LT(std::abs(fourier_sign_surrogate(p, kH, 101) - 1.0), 0.05) << p;
    EXPECT_LT(std::abs(fourier_sign_surrogate(-p, kH, 101) + 1.0), 0.05) << -p;
  }
}

TEST(FourierSurrogate, DerivativeIsTheGradientEstimate) {
  // Stencil truncation is at most h^4 / 30 * max|s'''''| ~ 1.3e-9 here.
  const double h = 1e-3;
  for (double p = -2.9; p <= 2.9; p += 0.137) {
    auto s = [&](double x) { return fourier_sign_surrogate(x, kH, kTerms); };
    const double five_point =
        (-s(p + 2 * h) + 8 * s(p + h) - 8 * s(p - h) + s(p - 2 * h)) / (12 * h);
    EXPECT_NEAR(five_point, fourier_sign_grad(p, kH, kTerms), 2e-9) << p;
  }
}

// q(x) = alpha(x) * s(x) with s the smooth surrogate, as a vector function.
std::vector<double> surrogate_hash(const std::vector<double>& x) {
  double l1 = 0.0;
  for (double v : x) l1 += std::abs(v);
  const double alpha = l1 / static_cast<double>(x.size());
  std::vector<double> q(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) q[i] = alpha * fourier_sign_surrogate(x[i], kH, kTerms);
  return q;
}

std::vector<double> surrogate_codes(const std::vector<double>& x) {
  std::vector<double> s(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) s[i] = fourier_sign_surrogate(x[i], kH, kTerms);
  return s;
}

TEST(AdaptiveHashBackward, ZeroUpstreamGivesZero) {
  const std::vector<double> x{0.3, -0.1, 0.7, -0.9, 0.2, 0.4, -0.5, 0.8};
  for (double g : adaptive_hash_backward(x, std::vector<double>(8, 0.0), kH, kTerms)) {
    EXPECT_EQ(g, 0.0);
  }
}

TEST(AdaptiveHashBackward, OneDimensionalClosedForm) {
  for (double t : {0.37, -0.81, 1.4, -2.2}) {
    const double g = 1.7;
    const double want = (std::abs(t) * fourier_sign_grad(t, kH, kTerms) + 1.0) * g;
    const auto got = adaptive_hash_backward(std::vector<double>{t}, std::vector<double>{g}, kH, kTerms);
    EXPECT_NEAR(got[0], want, 1e-12) << t;
  }
}

TEST(AdaptiveHashBackward, EqualsExplicitJacobianProduct) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(-1.5, 1.5);
  for (std::size_t d : {1u, 3u, 8u, 16u}) {
    std::vector<double> x(d), g(d);
    for (auto& v : x) v = dist(rng);
    for (auto& v : g) v = dist(rng);
    double l1 = 0.0;
    for (double v : x) l1 += std::abs(v);
    const double alpha = l1 / static_cast<double>(d);
    // J_ij = alpha f'(x_i) [i == j] + b_i sign(x_j) / d.
    std::vector<double> want(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      const double bi = x[i] >= 0 ? 1.0 : -1.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double sj = x[j] >= 0 ? 1.0 : -1.0;
        double jij = bi * sj / static_cast<double>(d);
        if (i == j) jij += alpha * fourier_sign_grad(x[i], kH, kTerms);
        want[j] += jij * g[i];
      }
    }
    const auto got = adaptive_hash_backward(x, g, kH, kTerms);
    for (std::size_t j = 0; j < d; ++j) EXPECT_NEAR(got[j], want[j], 1e-10);
  }
}

TEST(AdaptiveHashBackward, MatchesSurrogateFiniteDifferences) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(8), g(8);
    for (auto& v : x) v = dist(rng);
    for (auto& v : g) v = dist(rng);
    const auto analytic = adaptive_hash_backward(x, surrogate_codes(x), g, kH, kTerms);
    const double eps = 1e-5;
    for (std::size_t j = 0; j < 8; ++j) {
      auto xp = x, xm = x;
      xp[j] += eps;
      xm[j] -= eps;
      const auto qp = surrogate_hash(xp), qm = surrogate_hash(xm);
      double numeric = 0.0;
      for (std::size_t i = 0; i < 8; ++i) numeric += g[i] * (qp[i] - qm[i]) / (2 * eps);
      EXPECT_LT(relative_error(analytic[j], numeric, 1e-6), 1e-4) << trial << ':' << j;
    }
  }
}

TEST(ConvolveBackward, SingleEdgeRoutesWithUnitCoefficient) {
  const auto adj = build_normalized_adjacency(BipartiteGraph::from_edges(1, 1, {{0, 0}}));
  Matrix g(2, 1);
  g(1, 0) = 3.0;
  const auto out = convolve_backward(adj, g);
  EXPECT_DOUBLE_EQ(out(0, 0), 3.0);
  EXPECT_DOUBLE_EQ(out(1, 0), 0.0);
  EXPECT_EQ(convolve_backward(adj, Matrix(2, 1)), Matrix(2, 1));
}

TEST(ConvolveBackward, MatchesDenseTransposeOracle) {
  const auto g = testing::random_graph(8, 11, 0.3, 6);
  const auto adj = build_normalized_adjacency(g);
  const auto dense = testing::dense_normalized_adjacency(g);
  const auto up = testing::random_matrix(19, 4, -1, 1, 8);
  const auto got = convolve_backward(adj, up);
  for (std::size_t j = 0; j < 19; ++j) {
    for (std::size_t c = 0; c < 4; ++c) {
      double want = 0.0;
      for (std::size_t i = 0; i < 19; ++i) want += dense[i][j] * up(i, c);
      EXPECT_NEAR(got(j, c), want, 1e-6);
    }
  }
}

// Six-node fixture: three sources, three destinations, L = 2, d = 8.
struct SixNodeModel {
  DatasetSplit split;
  NormalizedAdjacency adj;
  ModelConfig cfg;
  EmbeddingTable table;
  std::vector<Matrix> upstream;  // dLoss/dq^(l) for a linear loss

  explicit SixNodeModel(std::uint64_t seed) {
    split = testing::train_only(
        BipartiteGraph::from_edges(3, 3, {{0, 0}, {0, 1}, {1, 1}, {1, 2}, {2, 0}, {2, 2}}));
    adj = build_normalized_adjacency(split);
    cfg.dim = 8;
    cfg.layers = 2;
    cfg.seed = seed;
    table = init_embeddings(cfg, 6);
    for (std::size_t l = 0; l <= 2; ++l) {
      upstream.push_back(testing::random_matrix(6, 8, -1, 1, seed * 10 + l));
    }
  }

  // sum_l <G_l, q^(l)> through the surrogate pipeline.
  double loss(const EmbeddingTable& t) const {
    const auto fwd = surrogate_forward(t, adj, cfg, 3);
    double s = 0.0;
    for (std::size_t l = 0; l <= 2; ++l) {
      for (std::size_t r = 0; r < 6; ++r) s += dot(upstream[l].row(r), fwd.final.segment(r, l));
    }
    return s;
  }
};

TEST(ModelBackward, ZeroUpstreamGivesZeroBuffer) {
  SixNodeModel m(1);
  const auto fwd = forward(m.table, m.adj, m.cfg, 3);
  std::vector<Matrix> zeros(3, Matrix(6, 8));
  const auto buf = model_backward(fwd.state, m.adj, zeros, m.cfg);
  for (double v : buf.table.flat()) EXPECT_EQ(v, 0.0);
}

TEST(ModelBackward, ZeroDepthReducesToHashBackward) {
  SixNodeModel m(2);
  auto cfg = m.cfg;
  cfg.layers = 0;
  const auto fwd = forward(m.table, m.adj, cfg, 3);
  const std::vector<Matrix> up{m.upstream[0]};
  const auto buf = model_backward(fwd.state, m.adj, up, cfg);
  for (std::size_t r = 0; r < 6; ++r) {
    const auto want = adaptive_hash_backward(m.table.values.row(r), up[0].row(r), kH, kTerms);
    for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(buf.table(r, i), want[i]);
  }
}

TEST(ModelBackward, MatchesSurrogateFiniteDifferencesOnEveryParameter) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    SixNodeModel m(seed);
    const auto fwd = surrogate_forward(m.table, m.adj, m.cfg, 3);
    const auto buf = model_backward(fwd.state, m.adj, m.upstream, m.cfg);
    const double eps = 1e-4;
    double worst = 0.0;
    for (std::size_t k = 0; k < m.table.values.size(); ++k) {
      auto plus = m.table, minus = m.table;
      plus.values.flat()[k] += eps;
      minus.values.flat()[k] -= eps;
      const double numeric = (m.loss(plus) - m.loss(minus)) / (2 * eps);
      worst = std::max(worst, relative_error(buf.table.flat()[k], numeric, 1e-6));
    }
    EXPECT_LT(worst, 1e-3) << "seed " << seed;
  }
}

TEST(ModelBackward, HiddenGradientsHaveForwardShapes) {
  SixNodeModel m(4);
  const auto fwd = forward(m.table, m.adj, m.cfg, 3);
  const auto buf = model_backward(fwd.state, m.adj, m.upstream, m.cfg);
  ASSERT_EQ(buf.hidden.size(), 3u);
  for (const auto& h : buf.hidden) EXPECT_TRUE(h.same_shape(m.table.values));
  EXPECT_EQ(buf.hidden[0], buf.table);
  for (double v : buf.table.flat()) EXPECT_TRUE(std::isfinite(v));
}

TEST(ModelBackward, IsDeterministic) {
  SixNodeModel m(5);
  const auto fwd = forward(m.table, m.adj, m.cfg, 3);
  EXPECT_EQ(model_backward(fwd.state, m.adj, m.upstream, m.cfg).table,
            model_backward(fwd.state, m.adj, m.upstream, m.cfg).table);
}

TEST(ModelBackward, RejectsShapeMismatch) {
  SixNodeModel m(6);
  const auto fwd = forward(m.table, m.adj, m.cfg, 3);
  std::vector<Matrix> too_few(2, Matrix(6, 8));
  EXPECT_THROW(model_backward(fwd.state, m.adj, too_few, m.cfg), std::invalid_argument);
  std::vector<Matrix> wrong(3, Matrix(6, 4));
  EXPECT_THROW(model_backward(fwd.state, m.adj, wrong, m.cfg), std::invalid_argument);
}

}  // namespace
}  // namespace sgbh
