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

#ifndef SGBH_RETRIEVAL_HPP_
#define SGBH_RETRIEVAL_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "sgbh/graph.hpp"
#include "sgbh/matrix.hpp"
#include "sgbh/model.hpp"

namespace sgbh {

// One node's (L+1) packed segments.
struct PackedEmbeddingView {
  std::span<const float> alpha;        // L+1 rescaling factors
  std::span<const std::uint64_t> words;  // (L+1) * words_per_segment
  std::size_t dim = 0;
  std::size_t words_per_segment = 0;
};

// Mixed-precision embeddings of all nodes: per node and layer a float32
// rescaling factor and d sign bits (bit i set <=> code +1 on dimension i).
// Bits past d in the last word are always zero.
class PackedCodebook {
 public:
  PackedCodebook() = default;
  PackedCodebook(std::size_t num_nodes, std::size_t num_sources,
                 std::size_t depth, std::size_t dim);

  static PackedCodebook from_layers(const LayerEmbeddings& state,
                                    std::size_t num_sources);
  // alpha = mean |segment|, b = sign(segment).
  static PackedCodebook from_final(const FinalEmbedding& final);

  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_sources() const { return num_sources_; }
  std::size_t num_destinations() const { return num_nodes_ - num_sources_; }
  std::size_t depth() const { return depth_; }
  std::size_t num_segments() const { return depth_ + 1; }
  std::size_t dim() const { return dim_; }
  std::size_t words_per_segment() const { return words_per_segment_; }

  void set_segment(std::size_t node, std::size_t layer, float alpha,
                   std::span<const double> code);

  float alpha(std::size_t node, std::size_t layer) const {
    return alphas_[node * num_segments() + layer];
  }
  void set_alpha(std::size_t node, std::size_t layer, float value) {
    alphas_[node * num_segments() + layer] = value;
  }
  std::span<const std::uint64_t> bits(std::size_t node, std::size_t layer) const {
    return {words_.data() + (node * num_segments() + layer) * words_per_segment_,
            words_per_segment_};
  }
  PackedEmbeddingView view(std::size_t node) const;

  // Sign codes of one segment as +/-1 doubles.
  std::vector<double> unpack_code(std::size_t node, std::size_t layer) const;
  // alpha * b for every segment, N x (L+1)d.
  Matrix unpack() const;

  std::span<const float> alphas() const { return alphas_; }
  std::span<const std::uint64_t> words() const { return words_; }

  friend bool operator==(const PackedCodebook&, const PackedCodebook&) = default;

 private:
  std::size_t num_nodes_ = 0;
  std::size_t num_sources_ = 0;
  std::size_t depth_ = 0;
  std::size_t dim_ = 0;
  std::size_t words_per_segment_ = 0;
  std::vector<float> alphas_;
  std::vector<std::uint64_t> words_;
};

void pack_code(std::span<const double> code, std::span<std::uint64_t> out);

// d - popcount(a XOR b), ignoring padding bits.
std::size_t same_sign_count(std::span<const std::uint64_t> a,
                            std::span<const std::uint64_t> b, std::size_t dim);

double hamming_similarity(std::span<const std::uint64_t> a,
                          std::span<const std::uint64_t> b, std::size_t dim);

struct OpCounter {
  std::uint64_t flops = 0;
  std::uint64_t bops = 0;
};

// sum_l alpha_u alpha_v (2 * same_sign_count - d). Charges one FLOP per
// segment and d BOPs per segment to `counter`.
double mixed_dot(const PackedEmbeddingView& u, const PackedEmbeddingView& v,
                 OpCounter* counter = nullptr);

struct ScoredDestination {
  NodeIndex destination = 0;
  double score = 0.0;
  friend bool operator==(const ScoredDestination&, const ScoredDestination&) = default;
};

struct SearchResult {
  std::vector<ScoredDestination> items;  // best first
  bool truncated = false;  // fewer than K candidates were available
};

// Higher score first, then lower destination index.
inline bool ranks_before(const ScoredDestination& a, const ScoredDestination& b) {
  return a.score > b.score || (a.score == b.score && a.destination < b.destination);
}

// Exact scan over every destination not in `exclude` (sorted), keeping the K
// best in a bounded heap. Throws std::invalid_argument if K == 0 or the query
// is not a source.
SearchResult topk_search(const PackedCodebook& codebook, NodeIndex query,
                         std::size_t k, std::span<const NodeIndex> exclude = {},
                         OpCounter* counter = nullptr);

// (|U|+|V|)(L+1)(d+32).
std::uint64_t storage_bits(std::uint64_t num_sources,
                           std::uint64_t num_destinations, std::uint64_t depth,
                           std::uint64_t dim);

class CodebookError : public std::runtime_error {
 public:
  enum class Kind { kIo, kBadMagic, kBadVersion, kTruncated, kTrailingData };
  CodebookError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline constexpr char kCodebookMagic[4] = {'S', 'G', 'B', 'H'};
inline constexpr std::uint16_t kCodebookVersion = 1;
inline constexpr std::size_t kCodebookHeaderBytes = 4 + 2 + 4 * 4;

// Little-endian layout: magic, u16 version, u32 num_nodes, num_sources, L, d,
// then per node and layer an f32 alpha followed by ceil(d/8) code bytes.
void save_codebook(const PackedCodebook& codebook,
                   const std::filesystem::path& path);
PackedCodebook load_codebook(const std::filesystem::path& path);

std::vector<std::uint8_t> serialize_codebook(const PackedCodebook& codebook);
PackedCodebook deserialize_codebook(std::span<const std::uint8_t> bytes);

}  // namespace sgbh

#endif  // SGBH_RETRIEVAL_HPP_
