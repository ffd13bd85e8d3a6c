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

import math

import numpy as np
import pytest

import sgbh


@pytest.fixture(scope="module")
def split():
    graph = sgbh.planted_block_graph(blocks=8, sources=40, destinations=60,
                                     p_in=0.6, p_out=0.02, seed=7)
    return sgbh.split_dataset(graph, 0.8, 7)


@pytest.fixture(scope="module")
def configs():
    model = sgbh.ModelConfig()
    model.dim = 16
    model.layers = 2
    train = sgbh.TrainConfig()
    train.mode = "sgbgh"
    train.epochs = 5
    train.batch_size = 128
    train.learning_rate = 0.01
    train.centers = 8
    return model, train


@pytest.fixture(scope="module")
def trained(split, configs):
    model, train = configs
    table, log = sgbh.train(split, model, train)
    return table, log, sgbh.encode(table, split, model)


def test_graph_round_trip(tmp_path):
    edges = np.array([[0, 1], [1, 0], [2, 2]])
    graph = sgbh.BipartiteGraph.from_edges(3, 4, edges)
    assert graph.num_sources == 3
    assert graph.num_destinations == 4
    assert graph.num_edges == 3
    path = tmp_path / "g.tsv"
    sgbh.write_edge_list(graph, str(path))
    assert sgbh.load_edge_list(str(path)) == graph


def test_split_partitions_edges(split):
    assert split.train.num_edges + split.test.num_edges > 0
    train = {tuple(e) for e in split.train.edges().tolist()}
    test = {tuple(e) for e in split.test.edges().tolist()}
    assert not train & test


def test_train_logs_each_epoch(trained, configs):
    table, log, _ = trained
    model, train = configs
    assert table.shape == (100, model.dim)
    assert [entry["epoch"] for entry in log] == list(range(1, train.epochs + 1))
    assert all(math.isfinite(entry["total"]) for entry in log)


def test_encode_matches_forward(trained, split, configs):
    table, _, codebook = trained
    model, _ = configs
    fwd = sgbh.forward(table, split, model)
    assert codebook.depth == model.layers
    assert codebook.dim == model.dim
    for layer in range(model.layers + 1):
        np.testing.assert_array_equal(codebook.code(5, layer), fwd["codes"][layer][5])
        assert codebook.alpha(5, layer) == pytest.approx(fwd["alpha"][layer][5], rel=1e-6)


def test_evaluate_and_search(trained, split):
    _, _, codebook = trained
    report = sgbh.evaluate(codebook, split, [20, 40], True)
    assert 0.0 <= report["recall@20"] <= report["recall@40"] <= 1.0
    assert report["num_evaluated"] > 0
    result = sgbh.topk_search(codebook, 0, k=10)
    assert len(result["items"]) == 10
    scores = [score for _, score in result["items"]]
    assert scores == sorted(scores, reverse=True)
    assert result["bops"] == 60 * 3 * 16
    dest, score = result["items"][0]
    assert sgbh.mixed_dot(codebook, 0, 40 + dest) == pytest.approx(score)


def test_codebook_file_round_trip(trained, tmp_path):
    _, _, codebook = trained
    path = tmp_path / "cb.sgbh"
    sgbh.save_codebook(codebook, str(path))
    assert sgbh.load_codebook(str(path)) == codebook
    assert (path.stat().st_size - 22) * 8 == sgbh.storage_bits(40, 60, 2, 16)


def test_numeric_anchors():
    assert sgbh.fourier_sign_grad(0.0, 3.0, 11) == 8.0
    assert sgbh.storage_bits(29858, 40981, 2, 64) == 20401632
    alpha, code = sgbh.adaptive_hash(np.array([0.5, -1.0, 0.0, 2.5]))
    assert alpha == pytest.approx(1.0)
    np.testing.assert_array_equal(code, [1, -1, 1, 1])
