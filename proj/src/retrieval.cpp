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

#include "sgbh/retrieval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>

namespace sgbh {
namespace {

std::size_t words_for(std::size_t dim) { return (dim + 63) / 64; }
std::size_t bytes_for(std::size_t dim) { return (dim + 7) / 8; }

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[at + i]) << (8 * i);
  return v;
}

std::uint32_t checked_u32(std::size_t v, const char* field) {
  if (v > 0xffffffffULL) {
    throw CodebookError(CodebookError::Kind::kIo,
                        std::string(field) + " does not fit the file format");
  }
  return static_cast<std::uint32_t>(v);
}

}  // namespace

PackedCodebook::PackedCodebook(std::size_t num_nodes, std::size_t num_sources,
                               std::size_t depth, std::size_t dim)
    : num_nodes_(num_nodes),
      num_sources_(num_sources),
      depth_(depth),
      dim_(dim),
      words_per_segment_(words_for(dim)),
      alphas_(num_nodes * (depth + 1), 0.0f),
      words_(num_nodes * (depth + 1) * words_for(dim), 0) {
  if (num_sources > num_nodes) {
    throw std::invalid_argument("num_sources exceeds num_nodes");
  }
}

PackedCodebook PackedCodebook::from_layers(const LayerEmbeddings& state,
                                           std::size_t num_sources) {
  PackedCodebook cb(state.num_nodes(), num_sources, state.depth(), state.dim());
  for (std::size_t l = 0; l <= state.depth(); ++l) {
    const LayerState& layer = state.layers[l];
    for (std::size_t r = 0; r < cb.num_nodes(); ++r) {
      cb.set_segment(r, l, static_cast<float>(layer.alpha[r]), layer.codes.row(r));
    }
  }
  return cb;
}

PackedCodebook PackedCodebook::from_final(const FinalEmbedding& final) {
  const std::size_t n = final.values.rows();
  PackedCodebook cb(n, final.num_sources, final.depth, final.dim);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t l = 0; l <= final.depth; ++l) {
      auto seg = final.segment(r, l);
      double l1 = 0.0;
      for (double v : seg) l1 += std::abs(v);
      cb.set_segment(r, l, static_cast<float>(l1 / static_cast<double>(final.dim)), seg);
    }
  }
  return cb;
}

void pack_code(std::span<const double> code, std::span<std::uint64_t> out) {
  std::fill(out.begin(), out.end(), 0);
  for (std::size_t i = 0; i < code.size(); ++i) {
    if (code[i] >= 0.0) out[i / 64] |= std::uint64_t{1} << (i % 64);
  }
}

void PackedCodebook::set_segment(std::size_t node, std::size_t layer,
                                 float alpha, std::span<const double> code) {
  if (code.size() != dim_) throw std::invalid_argument("code length != dim");
  set_alpha(node, layer, alpha);
  pack_code(code, std::span<std::uint64_t>(
                      words_.data() + (node * num_segments() + layer) * words_per_segment_,
                      words_per_segment_));
}

PackedEmbeddingView PackedCodebook::view(std::size_t node) const {
  return {std::span<const float>(alphas_.data() + node * num_segments(), num_segments()),
          std::span<const std::uint64_t>(
              words_.data() + node * num_segments() * words_per_segment_,
              num_segments() * words_per_segment_),
          dim_, words_per_segment_};
}

std::vector<double> PackedCodebook::unpack_code(std::size_t node,
                                                std::size_t layer) const {
  auto w = bits(node, layer);
  std::vector<double> code(dim_);
  for (std::size_t i = 0; i < dim_; ++i) {
    code[i] = (w[i / 64] >> (i % 64)) & 1U ? 1.0 : -1.0;
  }
  return code;
}

Matrix PackedCodebook::unpack() const {
  Matrix out(num_nodes_, num_segments() * dim_);
  for (std::size_t r = 0; r < num_nodes_; ++r) {
    for (std::size_t l = 0; l < num_segments(); ++l) {
      const double a = alpha(r, l);
      auto code = unpack_code(r, l);
      for (std::size_t i = 0; i < dim_; ++i) out(r, l * dim_ + i) = a * code[i];
    }
  }
  return out;
}

std::size_t same_sign_count(std::span<const std::uint64_t> a,
                            std::span<const std::uint64_t> b, std::size_t dim) {
  std::size_t differ = 0;
  const std::size_t full = dim / 64;
  for (std::size_t w = 0; w < full; ++w) differ += std::popcount(a[w] ^ b[w]);
  if (const std::size_t tail = dim % 64; tail != 0) {
    const std::uint64_t mask = (std::uint64_t{1} << tail) - 1;
    differ += std::popcount((a[full] ^ b[full]) & mask);
  }
  return dim - differ;
}

double hamming_similarity(std::span<const std::uint64_t> a,
                          std::span<const std::uint64_t> b, std::size_t dim) {
  return static_cast<double>(same_sign_count(a, b, dim)) / static_cast<double>(dim);
}

double mixed_dot(const PackedEmbeddingView& u, const PackedEmbeddingView& v,
                 OpCounter* counter) {
  const std::size_t segments = u.alpha.size();
  const auto dim = static_cast<double>(u.dim);
  double score = 0.0;
  for (std::size_t l = 0; l < segments; ++l) {
    const std::size_t offset = l * u.words_per_segment;
    const auto same = static_cast<double>(
        same_sign_count(u.words.subspan(offset, u.words_per_segment),
                        v.words.subspan(offset, v.words_per_segment), u.dim));
    score += static_cast<double>(u.alpha[l]) * static_cast<double>(v.alpha[l]) *
             (2.0 * same - dim);
  }
  if (counter) {
    counter->flops += segments;
    counter->bops += segments * u.dim;
  }
  return score;
}

SearchResult topk_search(const PackedCodebook& codebook, NodeIndex query,
                         std::size_t k, std::span<const NodeIndex> exclude,
                         OpCounter* counter) {
  if (k == 0) throw std::invalid_argument("K must be >= 1");
  if (query >= codebook.num_sources()) {
    throw std::invalid_argument("query " + std::to_string(query) +
                                " is not a source index");
  }
  const PackedEmbeddingView q = codebook.view(query);
  const std::size_t nu = codebook.num_sources();
  std::vector<ScoredDestination> heap;
  heap.reserve(k + 1);
  std::size_t skip = 0;
  std::size_t candidates = 0;
  for (NodeIndex v = 0; v < codebook.num_destinations(); ++v) {
    while (skip < exclude.size() && exclude[skip] < v) ++skip;
    if (skip < exclude.size() && exclude[skip] == v) continue;
    ++candidates;
    ScoredDestination cand{v, mixed_dot(q, codebook.view(nu + v), counter)};
    if (heap.size() < k) {
      heap.push_back(cand);
      std::push_heap(heap.begin(), heap.end(), ranks_before);
    } else if (ranks_before(cand, heap.front())) {
      std::pop_heap(heap.begin(), heap.end(), ranks_before);
      heap.back() = cand;
      std::push_heap(heap.begin(), heap.end(), ranks_before);
    }
  }
  std::sort_heap(heap.begin(), heap.end(), ranks_before);
  return {std::move(heap), candidates < k};
}

std::uint64_t storage_bits(std::uint64_t num_sources,
                           std::uint64_t num_destinations, std::uint64_t depth,
                           std::uint64_t dim) {
  return (num_sources + num_destinations) * (depth + 1) * (dim + 32);
}

std::vector<std::uint8_t> serialize_codebook(const PackedCodebook& codebook) {
  const std::size_t code_bytes = bytes_for(codebook.dim());
  std::vector<std::uint8_t> out;
  out.reserve(kCodebookHeaderBytes +
              codebook.num_nodes() * codebook.num_segments() * (4 + code_bytes));
  out.insert(out.end(), std::begin(kCodebookMagic), std::end(kCodebookMagic));
  put_u16(out, kCodebookVersion);
  put_u32(out, checked_u32(codebook.num_nodes(), "num_nodes"));
  put_u32(out, checked_u32(codebook.num_sources(), "num_sources"));
  put_u32(out, checked_u32(codebook.depth(), "L"));
  put_u32(out, checked_u32(codebook.dim(), "d"));
  for (std::size_t r = 0; r < codebook.num_nodes(); ++r) {
    for (std::size_t l = 0; l < codebook.num_segments(); ++l) {
      put_u32(out, std::bit_cast<std::uint32_t>(codebook.alpha(r, l)));
      auto w = codebook.bits(r, l);
      for (std::size_t byte = 0; byte < code_bytes; ++byte) {
        out.push_back(static_cast<std::uint8_t>(w[byte / 8] >> (8 * (byte % 8))));
      }
    }
  }
  return out;
}

PackedCodebook deserialize_codebook(std::span<const std::uint8_t> bytes) {
  using Kind = CodebookError::Kind;
  if (bytes.size() < 4 ||
      !std::equal(std::begin(kCodebookMagic), std::end(kCodebookMagic), bytes.begin())) {
    throw CodebookError(Kind::kBadMagic, "not a codebook file (bad magic)");
  }
  if (bytes.size() < 6) throw CodebookError(Kind::kTruncated, "codebook header truncated");
  const auto version = static_cast<std::uint16_t>(bytes[4] | (bytes[5] << 8));
  if (version != kCodebookVersion) {
    throw CodebookError(Kind::kBadVersion,
                        "unsupported codebook version " + std::to_string(version));
  }
  if (bytes.size() < kCodebookHeaderBytes) {
    throw CodebookError(Kind::kTruncated, "codebook header truncated");
  }
  const std::size_t num_nodes = get_u32(bytes, 6);
  const std::size_t num_sources = get_u32(bytes, 10);
  const std::size_t depth = get_u32(bytes, 14);
  const std::size_t dim = get_u32(bytes, 18);
  if (num_sources > num_nodes || dim == 0) {
    throw CodebookError(Kind::kIo, "inconsistent codebook header");
  }
  const std::size_t code_bytes = bytes_for(dim);
  const std::size_t expected =
      kCodebookHeaderBytes + num_nodes * (depth + 1) * (4 + code_bytes);
  if (bytes.size() < expected) {
    throw CodebookError(Kind::kTruncated,
                        "codebook payload truncated: expected " +
                            std::to_string(expected) + " bytes, got " +
                            std::to_string(bytes.size()));
  }
  if (bytes.size() > expected) {
    throw CodebookError(Kind::kTrailingData, "unexpected bytes after codebook payload");
  }
  PackedCodebook cb(num_nodes, num_sources, depth, dim);
  std::vector<double> code(dim);
  std::size_t at = kCodebookHeaderBytes;
  for (std::size_t r = 0; r < num_nodes; ++r) {
    for (std::size_t l = 0; l <= depth; ++l) {
      const float alpha = std::bit_cast<float>(get_u32(bytes, at));
      at += 4;
      for (std::size_t i = 0; i < dim; ++i) {
        code[i] = (bytes[at + i / 8] >> (i % 8)) & 1U ? 1.0 : -1.0;
      }
      at += code_bytes;
      cb.set_segment(r, l, alpha, code);
    }
  }
  return cb;
}

void save_codebook(const PackedCodebook& codebook,
                   const std::filesystem::path& path) {
  const auto bytes = serialize_codebook(codebook);
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw CodebookError(CodebookError::Kind::kIo, "cannot write " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CodebookError(CodebookError::Kind::kIo, "write failed: " + path.string());
}

PackedCodebook load_codebook(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw CodebookError(CodebookError::Kind::kIo, "cannot open codebook " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize_codebook(bytes);
}

}  // namespace sgbh
