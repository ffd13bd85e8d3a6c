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

#ifndef SGBH_TRAINING_HPP_
#define SGBH_TRAINING_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sgbh/graph.hpp"
#include "sgbh/losses.hpp"
#include "sgbh/matrix.hpp"
#include "sgbh/model.hpp"
#include "sgbh/retrieval.hpp"
#include "sgbh/sampler.hpp"

namespace sgbh {

enum class TrainMode { kLightGCH, kSGBGH };
enum class SamplerKind { kAuto, kUniform, kSignGuided };

TrainMode parse_train_mode(const std::string& name);
std::string to_string(TrainMode mode);
SamplerKind parse_sampler_kind(const std::string& name);
std::string to_string(SamplerKind kind);

struct TrainConfig {
  TrainMode mode = TrainMode::kSGBGH;
  // kAuto: sign-guided for kSGBGH, uniform for kLightGCH.
  SamplerKind sampler = SamplerKind::kAuto;
  std::size_t batch_size = 4096;
  double learning_rate = 0.001;
  std::size_t epochs = 200;  // hard cap
  double tau = 0.2;
  double gamma = 0.5;
  double beta0 = 1.0;
  double beta1 = 1.0;
  double lambda = 0.001;
  std::size_t centers = 64;
  std::size_t kmeans_iters = 20;
  // Early stopping on test Recall@20; 0 disables evaluation during training.
  std::size_t eval_every = 0;
  std::size_t patience = 10;
  std::uint64_t seed = 2026;

  void validate() const;
  // LightGCH trains the main BPR term only.
  LossWeights loss_weights() const;
  SamplerKind effective_sampler() const;
};

struct AdamState {
  Matrix first_moment;
  Matrix second_moment;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// One bias-corrected Adam update of `params` in place. Throws
// DivergenceError on a non-finite gradient.
void adam_step(Matrix& params, const Matrix& grads, AdamState& state, double lr);

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  LossTerms terms;        // batch means
  double total = 0.0;
  double wall_ms = 0.0;
  std::size_t steps = 0;
  std::optional<double> recall20;
  std::optional<double> ndcg20;
};

struct TrainResult {
  EmbeddingTable table;
  std::vector<EpochLog> log;
  std::size_t optimizer_steps = 0;
  std::size_t best_epoch = 0;
  std::optional<HashCenterSet> centers;  // last refresh, sign-guided only
  SamplerStats sampler_stats;
};

using EpochCallback = std::function<void(const EpochLog&)>;

// Epoch loop: refresh hash centers (sign-guided sampling), then for each
// shuffled batch of training edges draw one negative per edge, run the
// forward pass, the losses, model_backward and an Adam step. Throws
// DivergenceError with epoch/batch context on a non-finite loss.
TrainResult train(const DatasetSplit& split, const ModelConfig& model_cfg,
                  const TrainConfig& train_cfg, const EpochCallback& on_epoch = {});

// Forward pass + packing.
PackedCodebook encode(const EmbeddingTable& table, const DatasetSplit& split,
                      const ModelConfig& cfg);

// Appends one CSV row per epoch, writing the header when the file is new.
class TrainingLogWriter {
 public:
  explicit TrainingLogWriter(const std::filesystem::path& path);
  void append(const EpochLog& entry);

 private:
  std::ofstream out_;
};

}  // namespace sgbh

#endif  // SGBH_TRAINING_HPP_
