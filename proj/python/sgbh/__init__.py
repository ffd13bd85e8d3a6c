# Copyright 2026 The sgbh Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Mixed-precision bipartite graph hashing with Hamming-space Top-K search."""

from ._sgbh import (
    BipartiteGraph,
    DatasetSplit,
    ModelConfig,
    PackedCodebook,
    TrainConfig,
    adaptive_hash,
    encode,
    evaluate,
    forward,
    fourier_sign_grad,
    hamming_similarity,
    hit_edge_set,
    init_embeddings,
    layer_hamming_stats,
    load_codebook,
    load_edge_list,
    mixed_dot,
    planted_block_graph,
    save_codebook,
    split_dataset,
    storage_bits,
    topk_search,
    train,
    write_edge_list,
)

__all__ = [
    "BipartiteGraph",
    "DatasetSplit",
    "ModelConfig",
    "PackedCodebook",
    "TrainConfig",
    "adaptive_hash",
    "encode",
    "evaluate",
    "forward",
    "fourier_sign_grad",
    "hamming_similarity",
    "hit_edge_set",
    "init_embeddings",
    "layer_hamming_stats",
    "load_codebook",
    "load_edge_list",
    "mixed_dot",
    "planted_block_graph",
    "save_codebook",
    "split_dataset",
    "storage_bits",
    "topk_search",
    "train",
    "write_edge_list",
]
