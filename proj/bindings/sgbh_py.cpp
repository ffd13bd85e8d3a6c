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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "sgbh/sgbh.hpp"

namespace py = pybind11;

namespace {

py::array_t<double> to_numpy(const sgbh::Matrix& m) {
  py::array_t<double> out({m.rows(), m.cols()});
  std::copy(m.data(), m.data() + m.size(), out.mutable_data());
  return out;
}

sgbh::Matrix from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
  sgbh::Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), m.data());
  return m;
}

py::array_t<std::uint32_t> edges_to_numpy(std::span<const sgbh::Edge> edges) {
  py::array_t<std::uint32_t> out({edges.size(), std::size_t{2}});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < edges.size(); ++i) {
    view(i, 0) = edges[i].source;
    view(i, 1) = edges[i].destination;
  }
  return out;
}

std::vector<sgbh::Edge> edges_from_numpy(
    const py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2 || a.shape(1) != 2) throw std::invalid_argument("expected an (E, 2) array");
  auto view = a.unchecked<2>();
  std::vector<sgbh::Edge> edges;
  edges.reserve(static_cast<std::size_t>(a.shape(0)));
  for (py::ssize_t i = 0; i < a.shape(0); ++i) {
    if (view(i, 0) < 0 || view(i, 1) < 0) throw std::invalid_argument("negative node index");
    edges.push_back({static_cast<sgbh::NodeIndex>(view(i, 0)),
                     static_cast<sgbh::NodeIndex>(view(i, 1))});
  }
  return edges;
}

py::dict epoch_to_dict(const sgbh::EpochLog& e) {
  py::dict d;
  d["epoch"] = e.epoch;
  d["total"] = e.total;
  d["main"] = e.terms.main;
  d["cl"] = e.terms.contrastive;
  d["bpr0"] = e.terms.shallow;
  d["conv"] = e.terms.conv;
  d["l2"] = e.terms.l2;
  d["steps"] = e.steps;
  d["wall_ms"] = e.wall_ms;
  d["recall20"] = e.recall20 ? py::cast(*e.recall20) : py::none();
  d["ndcg20"] = e.ndcg20 ? py::cast(*e.ndcg20) : py::none();
  return d;
}

}  // namespace

PYBIND11_MODULE(_sgbh, m) {
  m.doc() = "Mixed-precision bipartite graph hashing";

  py::class_<sgbh::BipartiteGraph>(m, "BipartiteGraph")
      .def_static(
          "from_edges",
          [](std::size_t nu, std::size_t nv, const py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>& edges) {
            return sgbh::BipartiteGraph::from_edges(nu, nv, edges_from_numpy(edges));
          },
          py::arg("num_sources"), py::arg("num_destinations"), py::arg("edges"))
      .def_property_readonly("num_sources", &sgbh::BipartiteGraph::num_sources)
      .def_property_readonly("num_destinations", &sgbh::BipartiteGraph::num_destinations)
      .def_property_readonly("num_edges", &sgbh::BipartiteGraph::num_edges)
      .def("edges", [](const sgbh::BipartiteGraph& g) { return edges_to_numpy(g.edges()); })
      .def("source_neighbors", [](const sgbh::BipartiteGraph& g, sgbh::NodeIndex u) {
        auto n = g.source_neighbors(u);
        return std::vector<sgbh::NodeIndex>(n.begin(), n.end());
      })
      .def("__eq__", [](const sgbh::BipartiteGraph& a, const sgbh::BipartiteGraph& b) { return a == b; });

  py::class_<sgbh::DatasetSplit>(m, "DatasetSplit")
      .def_readonly("train", &sgbh::DatasetSplit::train)
      .def_readonly("test", &sgbh::DatasetSplit::test);

  m.def("load_edge_list", &sgbh::load_edge_list, py::arg("path"));
  m.def("write_edge_list", &sgbh::write_edge_list, py::arg("graph"), py::arg("path"));
  m.def("split_dataset", &sgbh::split_dataset, py::arg("graph"), py::arg("ratio") = 0.8,
        py::arg("seed") = 2026);
  m.def(
      "planted_block_graph",
      [](std::size_t blocks, std::size_t sources, std::size_t destinations, double p_in,
         double p_out, std::uint64_t seed) {
        return sgbh::planted_block_graph({blocks, sources, destinations, p_in, p_out, seed});
      },
      py::arg("blocks") = 8, py::arg("sources") = 40, py::arg("destinations") = 60,
      py::arg("p_in") = 0.6, py::arg("p_out") = 0.02, py::arg("seed") = 2026);

  py::class_<sgbh::ModelConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def_readwrite("dim", &sgbh::ModelConfig::dim)
      .def_readwrite("layers", &sgbh::ModelConfig::layers)
      .def_readwrite("layer_weights", &sgbh::ModelConfig::layer_weights)
      .def_readwrite("fourier_h", &sgbh::ModelConfig::fourier_h)
      .def_readwrite("fourier_terms", &sgbh::ModelConfig::fourier_terms)
      .def_readwrite("seed", &sgbh::ModelConfig::seed)
      .def("validate", &sgbh::ModelConfig::validate);

  py::class_<sgbh::TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_property(
          "mode", [](const sgbh::TrainConfig& c) { return sgbh::to_string(c.mode); },
          [](sgbh::TrainConfig& c, const std::string& s) { c.mode = sgbh::parse_train_mode(s); })
      .def_property(
          "sampler", [](const sgbh::TrainConfig& c) { return sgbh::to_string(c.sampler); },
          [](sgbh::TrainConfig& c, const std::string& s) { c.sampler = sgbh::parse_sampler_kind(s); })
      .def_readwrite("batch_size", &sgbh::TrainConfig::batch_size)
      .def_readwrite("learning_rate", &sgbh::TrainConfig::learning_rate)
      .def_readwrite("epochs", &sgbh::TrainConfig::epochs)
      .def_readwrite("tau", &sgbh::TrainConfig::tau)
      .def_readwrite("gamma", &sgbh::TrainConfig::gamma)
      .def_readwrite("beta0", &sgbh::TrainConfig::beta0)
      .def_readwrite("beta1", &sgbh::TrainConfig::beta1)
      .def_readwrite("lambda_", &sgbh::TrainConfig::lambda)
      .def_readwrite("centers", &sgbh::TrainConfig::centers)
      .def_readwrite("kmeans_iters", &sgbh::TrainConfig::kmeans_iters)
      .def_readwrite("eval_every", &sgbh::TrainConfig::eval_every)
      .def_readwrite("patience", &sgbh::TrainConfig::patience)
      .def_readwrite("seed", &sgbh::TrainConfig::seed);

  py::class_<sgbh::PackedCodebook>(m, "PackedCodebook")
      .def_property_readonly("num_nodes", &sgbh::PackedCodebook::num_nodes)
      .def_property_readonly("num_sources", &sgbh::PackedCodebook::num_sources)
      .def_property_readonly("num_destinations", &sgbh::PackedCodebook::num_destinations)
      .def_property_readonly("depth", &sgbh::PackedCodebook::depth)
      .def_property_readonly("dim", &sgbh::PackedCodebook::dim)
      .def("alpha", &sgbh::PackedCodebook::alpha, py::arg("node"), py::arg("layer"))
      .def("code", &sgbh::PackedCodebook::unpack_code, py::arg("node"), py::arg("layer"))
      .def("unpack", [](const sgbh::PackedCodebook& c) { return to_numpy(c.unpack()); })
      .def("__eq__", [](const sgbh::PackedCodebook& a, const sgbh::PackedCodebook& b) { return a == b; });

  m.def("save_codebook", &sgbh::save_codebook, py::arg("codebook"), py::arg("path"));
  m.def("load_codebook", &sgbh::load_codebook, py::arg("path"));
  m.def("storage_bits", &sgbh::storage_bits, py::arg("num_sources"),
        py::arg("num_destinations"), py::arg("layers"), py::arg("dim"));

  m.def("fourier_sign_grad", &sgbh::fourier_sign_grad, py::arg("phi"), py::arg("h") = 3.0,
        py::arg("n") = 11);
  m.def(
      "adaptive_hash",
      [](const std::vector<double>& x) {
        auto h = sgbh::adaptive_hash(x);
        return py::make_tuple(h.alpha, h.code);
      },
      py::arg("x"));
  m.def(
      "init_embeddings",
      [](const sgbh::ModelConfig& cfg, std::size_t n) {
        return to_numpy(sgbh::init_embeddings(cfg, n).values);
      },
      py::arg("config"), py::arg("num_nodes"));
  m.def(
      "forward",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& table,
         const sgbh::DatasetSplit& split, const sgbh::ModelConfig& cfg) {
        const auto adj = sgbh::build_normalized_adjacency(split);
        const auto fwd = sgbh::forward({from_numpy(table)}, adj, cfg, split.num_sources());
        py::list alphas, codes;
        for (const auto& layer : fwd.state.layers) {
          alphas.append(layer.alpha);
          codes.append(to_numpy(layer.codes));
        }
        py::dict out;
        out["final"] = to_numpy(fwd.final.values);
        out["alpha"] = alphas;
        out["codes"] = codes;
        return out;
      },
      py::arg("table"), py::arg("split"), py::arg("config"));

  m.def(
      "train",
      [](const sgbh::DatasetSplit& split, const sgbh::ModelConfig& model,
         const sgbh::TrainConfig& cfg) {
        sgbh::TrainResult result;
        {
          py::gil_scoped_release release;
          result = sgbh::train(split, model, cfg);
        }
        py::list log;
        for (const auto& e : result.log) log.append(epoch_to_dict(e));
        return py::make_tuple(to_numpy(result.table.values), log);
      },
      py::arg("split"), py::arg("model_config"), py::arg("train_config"));

  m.def(
      "encode",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& table,
         const sgbh::DatasetSplit& split, const sgbh::ModelConfig& cfg) {
        return sgbh::encode({from_numpy(table)}, split, cfg);
      },
      py::arg("table"), py::arg("split"), py::arg("config"));

  m.def(
      "topk_search",
      [](const sgbh::PackedCodebook& cb, sgbh::NodeIndex query, std::size_t k,
         std::vector<sgbh::NodeIndex> exclude) {
        std::sort(exclude.begin(), exclude.end());
        sgbh::OpCounter counter;
        auto result = sgbh::topk_search(cb, query, k, exclude, &counter);
        py::list items;
        for (const auto& it : result.items) items.append(py::make_tuple(it.destination, it.score));
        py::dict out;
        out["items"] = items;
        out["truncated"] = result.truncated;
        out["flops"] = counter.flops;
        out["bops"] = counter.bops;
        return out;
      },
      py::arg("codebook"), py::arg("query"), py::arg("k") = 100,
      py::arg("exclude") = std::vector<sgbh::NodeIndex>{});

  m.def(
      "mixed_dot",
      [](const sgbh::PackedCodebook& cb, std::size_t a, std::size_t b) {
        if (a >= cb.num_nodes() || b >= cb.num_nodes()) throw py::index_error("node out of range");
        return sgbh::mixed_dot(cb.view(a), cb.view(b));
      },
      py::arg("codebook"), py::arg("node_a"), py::arg("node_b"));

  m.def(
      "hamming_similarity",
      [](const sgbh::PackedCodebook& cb, std::size_t a, std::size_t b, std::size_t layer) {
        if (a >= cb.num_nodes() || b >= cb.num_nodes() || layer > cb.depth()) {
          throw py::index_error("node or layer out of range");
        }
        return sgbh::hamming_similarity(cb.bits(a, layer), cb.bits(b, layer), cb.dim());
      },
      py::arg("codebook"), py::arg("node_a"), py::arg("node_b"), py::arg("layer"));

  m.def(
      "evaluate",
      [](const sgbh::PackedCodebook& cb, const sgbh::DatasetSplit& split,
         const std::vector<std::size_t>& ks, bool exclude_train) {
        auto report = sgbh::evaluate(cb, split, ks, exclude_train);
        py::dict out;
        for (std::size_t i = 0; i < report.ks.size(); ++i) {
          out[py::str("recall@" + std::to_string(report.ks[i]))] = report.recall[i];
          out[py::str("ndcg@" + std::to_string(report.ks[i]))] = report.ndcg[i];
        }
        out["num_evaluated"] = report.num_evaluated;
        return out;
      },
      py::arg("codebook"), py::arg("split"),
      py::arg("ks") = std::vector<std::size_t>{20, 40, 60, 80, 100},
      py::arg("exclude_train") = true);

  m.def(
      "hit_edge_set",
      [](const sgbh::PackedCodebook& cb, const sgbh::DatasetSplit& split, std::size_t k) {
        return edges_to_numpy(sgbh::hit_edge_set(cb, split, k));
      },
      py::arg("codebook"), py::arg("split"), py::arg("k") = 100);

  m.def(
      "layer_hamming_stats",
      [](const sgbh::PackedCodebook& cb, const sgbh::DatasetSplit& split, std::size_t k,
         std::size_t groups, std::size_t samples, std::uint64_t seed) {
        const auto hits = sgbh::hit_edge_set(cb, split, k);
        const auto stats = sgbh::layer_hamming_stats(cb, hits, split, {groups, samples, seed});
        py::list rows;
        for (const auto& s : stats) {
          py::dict row;
          row["layer"] = s.layer;
          row["group"] = s.group + 1;
          row["kind"] = s.kind == sgbh::PairKind::kNeighbor ? "neighbor" : "non-neighbor";
          row["mean"] = s.mean ? py::cast(*s.mean) : py::none();
          row["count"] = s.count;
          rows.append(row);
        }
        return rows;
      },
      py::arg("codebook"), py::arg("split"), py::arg("k") = 100, py::arg("groups") = 8,
      py::arg("non_neighbor_samples") = 2000, py::arg("seed") = 2026);
}
