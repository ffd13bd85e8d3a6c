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

#include "sgbh/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <stdexcept>
#include <unordered_map>

#include "sgbh/evaluation.hpp"
#include "sgbh/gradient.hpp"
#include "sgbh/random.hpp"

namespace sgbh {
namespace {

struct StepTerms {
  LossTerms terms;
  double total = 0.0;
};

class Trainer {
 public:
  Trainer(const DatasetSplit& split, const ModelConfig& model_cfg,
          const TrainConfig& train_cfg)
      : split_(split),
        model_cfg_(model_cfg),
        cfg_(train_cfg),
        weights_(train_cfg.loss_weights()),
        sampler_(train_cfg.effective_sampler()),
        adj_(build_normalized_adjacency(split)),
        shuffle_rng_(make_rng(train_cfg.seed, "shuffle")),
        negative_rng_(make_rng(train_cfg.seed, "negatives")) {
    result_.table = init_embeddings(model_cfg, split.train.num_nodes());
    adam_.first_moment = Matrix(result_.table.values.rows(), model_cfg.dim);
    adam_.second_moment = adam_.first_moment;
    edges_.assign(split.train.edges().begin(), split.train.edges().end());
  }

  TrainResult run(const EpochCallback& on_epoch) {
    double best_recall = -1.0;
    std::size_t stale = 0;
    EmbeddingTable best_table;
    for (std::size_t epoch = 1; epoch <= cfg_.epochs; ++epoch) {
      EpochLog entry = run_epoch(epoch);
      if (cfg_.eval_every > 0 && epoch % cfg_.eval_every == 0) {
        const MetricsReport report =
            evaluate(encode(result_.table, split_, model_cfg_), split_);
        entry.recall20 = report.recall_at(20);
        entry.ndcg20 = report.ndcg_at(20);
        if (*entry.recall20 > best_recall) {
          best_recall = *entry.recall20;
          best_table = result_.table;
          result_.best_epoch = epoch;
          stale = 0;
        } else {
          ++stale;
        }
      }
      result_.log.push_back(entry);
      if (on_epoch) on_epoch(entry);
      if (cfg_.eval_every > 0 && stale >= cfg_.patience) break;
    }
    if (cfg_.eval_every > 0 && result_.best_epoch > 0) {
      result_.table = std::move(best_table);
    } else {
      result_.best_epoch = result_.log.size();
    }
    return std::move(result_);
  }

 private:
  EpochLog run_epoch(std::size_t epoch) {
    const auto start = std::chrono::steady_clock::now();
    if (sampler_ == SamplerKind::kSignGuided) {
      const ForwardResult state =
          forward(result_.table, adj_, model_cfg_, split_.num_sources());
      const std::size_t k = std::min(cfg_.centers, split_.num_destinations());
      result_.centers = refresh_centers(state.state, split_.num_sources(), k,
                                        cfg_.kmeans_iters, cfg_.seed, epoch);
    }
    std::shuffle(edges_.begin(), edges_.end(), shuffle_rng_);

    EpochLog entry;
    entry.epoch = epoch;
    for (std::size_t begin = 0; begin < edges_.size(); begin += cfg_.batch_size) {
      const std::size_t end = std::min(begin + cfg_.batch_size, edges_.size());
      StepTerms step;
      try {
        step = run_step(std::span<const Edge>(edges_).subspan(begin, end - begin));
      } catch (const DivergenceError& e) {
        throw DivergenceError("epoch " + std::to_string(epoch) + ", batch " +
                              std::to_string(entry.steps + 1) + ": " + e.what());
      }
      entry.terms.main += step.terms.main;
      entry.terms.contrastive += step.terms.contrastive;
      entry.terms.shallow += step.terms.shallow;
      entry.terms.conv += step.terms.conv;
      entry.terms.l2 += step.terms.l2;
      entry.total += step.total;
      ++entry.steps;
    }
    if (entry.steps > 0) {
      const double n = static_cast<double>(entry.steps);
      entry.terms.main /= n;
      entry.terms.contrastive /= n;
      entry.terms.shallow /= n;
      entry.terms.conv /= n;
      entry.terms.l2 /= n;
      entry.total /= n;
    }
    entry.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    return entry;
  }

  NodeIndex draw_negative(NodeIndex u) {
    auto neighbors = split_.train.source_neighbors(u);
    if (sampler_ == SamplerKind::kSignGuided) {
      const HashCode shallow = adaptive_hash(result_.table.values.row(u));
      std::vector<double> query(shallow.code.size());
      for (std::size_t i = 0; i < query.size(); ++i) query[i] = shallow.alpha * shallow.code[i];
      const auto probs = center_selection_probs(query, result_.centers->centers);
      return sample_negative(probs, *result_.centers, neighbors,
                             split_.num_destinations(), negative_rng_,
                             &result_.sampler_stats);
    }
    ++result_.sampler_stats.draws;
    return sample_negative_uniform(split_.num_destinations(), neighbors, negative_rng_);
  }

  StepTerms run_step(std::span<const Edge> edges) {
    Batch batch;
    batch.reserve(edges.size());
    for (const Edge& e : edges) {
      batch.push_back({e.source, e.destination, draw_negative(e.source)});
    }

    const std::size_t nu = split_.num_sources();
    const std::size_t depth = model_cfg_.layers;
    const ForwardResult fwd = forward(result_.table, adj_, model_cfg_, nu);
    std::vector<Matrix> layer_grads(depth + 1, Matrix(fwd.final.values.rows(), model_cfg_.dim));

    StepTerms step;
    const BprTerms bpr = bpr_terms(fwd.final, batch,
                                   {1.0, weights_.beta0, weights_.beta1}, layer_grads);
    step.terms.main = bpr.main;
    step.terms.shallow = bpr.shallow;
    step.terms.conv = bpr.conv;

    if (weights_.gamma != 0.0) {
      step.terms.contrastive = add_contrastive(fwd.final, batch, layer_grads);
    }

    GradientBuffer grads = model_backward(fwd.state, adj_, layer_grads, model_cfg_);

    // L2 over the rows this batch touches, scaled like the mean BPR term.
    std::vector<NodeIndex> touched;
    touched.reserve(batch.size() * 3);
    for (const Triple& t : batch) {
      touched.push_back(t.source);
      touched.push_back(static_cast<NodeIndex>(nu + t.positive));
      touched.push_back(static_cast<NodeIndex>(nu + t.negative));
    }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    for (NodeIndex r : touched) {
      auto x = result_.table.values.row(r);
      step.terms.l2 += dot(x, x) * inv_batch;
      if (weights_.lambda != 0.0) axpy(2.0 * weights_.lambda * inv_batch, x, grads.table.row(r));
    }

    step.total = total_loss(step.terms, weights_);
    if (!std::isfinite(step.total)) throw DivergenceError("non-finite loss");
    adam_step(result_.table.values, grads.table, adam_, cfg_.learning_rate);
    ++result_.optimizer_steps;
    return step;
  }

  double add_contrastive(const FinalEmbedding& final, const Batch& batch,
                         std::vector<Matrix>& layer_grads) {
    std::vector<NodeIndex> sources;
    std::unordered_map<NodeIndex, std::size_t> seen;
    for (const Triple& t : batch) {
      if (seen.try_emplace(t.source, sources.size()).second) sources.push_back(t.source);
    }
    const std::size_t depth = final.depth;
    const std::size_t d = final.dim;
    Matrix last(sources.size(), d), deep(sources.size(), d);
    for (std::size_t i = 0; i < sources.size(); ++i) {
      auto q_last = final.segment(sources[i], depth);
      std::copy(q_last.begin(), q_last.end(), last.row(i).begin());
      for (std::size_t l = 1; l <= depth; ++l) {
        axpy(model_cfg_.layer_weight(l), final.segment(sources[i], l), deep.row(i));
      }
    }
    const ContrastiveResult cl = contrastive_loss_deep(last, deep, cfg_.tau);
    for (std::size_t i = 0; i < sources.size(); ++i) {
      axpy(weights_.gamma, cl.grad_anchor.row(i), layer_grads[depth].row(sources[i]));
      for (std::size_t l = 1; l <= depth; ++l) {
        axpy(weights_.gamma * model_cfg_.layer_weight(l), cl.grad_positive.row(i),
             layer_grads[l].row(sources[i]));
      }
    }
    return cl.loss;
  }

  const DatasetSplit& split_;
  const ModelConfig& model_cfg_;
  const TrainConfig& cfg_;
  const LossWeights weights_;
  const SamplerKind sampler_;
  const NormalizedAdjacency adj_;
  Rng shuffle_rng_;
  Rng negative_rng_;
  AdamState adam_;
  std::vector<Edge> edges_;
  TrainResult result_;
};

}  // namespace

TrainMode parse_train_mode(const std::string& name) {
  if (name == "lightgch") return TrainMode::kLightGCH;
  if (name == "sgbgh") return TrainMode::kSGBGH;
  throw std::invalid_argument("unknown mode '" + name + "' (expected lightgch or sgbgh)");
}

std::string to_string(TrainMode mode) {
  return mode == TrainMode::kLightGCH ? "lightgch" : "sgbgh";
}

SamplerKind parse_sampler_kind(const std::string& name) {
  if (name == "auto") return SamplerKind::kAuto;
  if (name == "uniform") return SamplerKind::kUniform;
  if (name == "sign") return SamplerKind::kSignGuided;
  throw std::invalid_argument("unknown sampler '" + name + "' (expected auto, uniform or sign)");
}

std::string to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::kAuto: return "auto";
    case SamplerKind::kUniform: return "uniform";
    case SamplerKind::kSignGuided: return "sign";
  }
  return "auto";
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
  if (gamma < 0.0 || beta0 < 0.0 || beta1 < 0.0 || lambda < 0.0) {
    throw std::invalid_argument("loss weights must be >= 0");
  }
  if (centers < 1) throw std::invalid_argument("centers must be >= 1");
}

LossWeights TrainConfig::loss_weights() const {
  if (mode == TrainMode::kLightGCH) return {0.0, 0.0, 0.0, lambda};
  return {gamma, beta0, beta1, lambda};
}

SamplerKind TrainConfig::effective_sampler() const {
  if (sampler != SamplerKind::kAuto) return sampler;
  return mode == TrainMode::kSGBGH ? SamplerKind::kSignGuided : SamplerKind::kUniform;
}

void adam_step(Matrix& params, const Matrix& grads, AdamState& state, double lr) {
  if (!params.same_shape(grads)) throw std::invalid_argument("adam_step: shape mismatch");
  if (!state.first_moment.same_shape(params)) {
    state.first_moment = Matrix(params.rows(), params.cols());
    state.second_moment = state.first_moment;
  }
  for (double g : grads.flat()) {
    if (!std::isfinite(g)) throw DivergenceError("non-finite gradient");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  auto x = params.flat();
  auto g = grads.flat();
  auto m = state.first_moment.flat();
  auto v = state.second_moment.flat();
  for (std::size_t i = 0; i < x.size(); ++i) {
    m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
    v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
    const double m_hat = m[i] / correction1;
    const double v_hat = v[i] / correction2;
    x[i] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

TrainResult train(const DatasetSplit& split, const ModelConfig& model_cfg,
                  const TrainConfig& train_cfg, const EpochCallback& on_epoch) {
  model_cfg.validate();
  train_cfg.validate();
  if (split.train.num_edges() == 0) throw std::invalid_argument("no training edges");
  return Trainer(split, model_cfg, train_cfg).run(on_epoch);
}

PackedCodebook encode(const EmbeddingTable& table, const DatasetSplit& split,
                      const ModelConfig& cfg) {
  const NormalizedAdjacency adj = build_normalized_adjacency(split);
  const ForwardResult fwd = forward(table, adj, cfg, split.num_sources());
  return PackedCodebook::from_layers(fwd.state, split.num_sources());
}

TrainingLogWriter::TrainingLogWriter(const std::filesystem::path& path) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  out_.open(path, std::ios::app);
  if (!out_) throw std::runtime_error("cannot open training log " + path.string());
  if (fresh) {
    out_ << "epoch,total,main,cl,bpr0,conv,l2,wall_ms,recall20,ndcg20\n";
  }
}

void TrainingLogWriter::append(const EpochLog& e) {
  out_ << std::setprecision(10) << e.epoch << ',' << e.total << ',' << e.terms.main
       << ',' << e.terms.contrastive << ',' << e.terms.shallow << ','
       << e.terms.conv << ',' << e.terms.l2 << ',' << std::setprecision(6)
       << e.wall_ms << ',';
  out_ << std::setprecision(10);
  if (e.recall20) out_ << *e.recall20;
  out_ << ',';
  if (e.ndcg20) out_ << *e.ndcg20;
  out_ << '\n';
  out_.flush();
}

}  // namespace sgbh
