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

// Command-line front end: synth, train, eval, diagnose, search.

#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sgbh/sgbh.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Bad input detected before any work starts.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GraphOptions {
  std::string edges;
  double split_ratio = 0.8;
  bool remap = false;
};

struct TrainOptions {
  GraphOptions graph;
  std::string out;
  std::string mode = "sgbgh";
  std::string sampler = "auto";
  sgbh::ModelConfig model;
  sgbh::TrainConfig train;
  std::vector<double> layer_weights;
  std::uint64_t seed = 2026;
};

struct EvalOptions {
  GraphOptions graph;
  std::string codebook;
  std::string out;
  std::uint64_t seed = 2026;
  bool exclude_train = true;
  std::vector<std::size_t> ks{20, 40, 60, 80, 100};
};

struct DiagnoseOptions {
  EvalOptions eval;
  std::size_t groups = 8;
  std::size_t non_neighbor_samples = 2000;
  std::size_t topk = 100;
};

struct SearchOptions {
  std::string codebook;
  std::string out;
  std::vector<std::string> queries;
  std::size_t random_queries = 0;
  std::size_t k = 100;
  GraphOptions graph;  // optional: excludes training neighbors when set
  std::uint64_t seed = 2026;
};

struct SynthOptions {
  sgbh::PlantedBlockSpec spec;
  std::string out;
};

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw UsageError(std::string("missing --") + what);
  if (!fs::is_regular_file(path)) {
    throw UsageError(std::string(what) + " file not found: " + path);
  }
}

fs::path prepare_out_dir(const std::string& out) {
  if (out.empty()) throw UsageError("missing --out");
  fs::create_directories(out);
  return fs::path(out);
}

sgbh::BipartiteGraph load_graph(const GraphOptions& opts, const fs::path* out_dir) {
  require_file(opts.edges, "edges");
  if (!opts.remap) return sgbh::load_edge_list(opts.edges);
  auto remapped = sgbh::load_edge_list_remapped(opts.edges);
  if (out_dir) sgbh::write_id_mapping(remapped.mapping, *out_dir / "ids");
  return std::move(remapped.graph);
}

// Every option of `cmd` with its effective value, for the resolved config.
sgbh::ConfigEntries resolved_entries(const CLI::App& cmd) {
  sgbh::ConfigEntries entries;
  for (const CLI::Option* opt : cmd.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string name = opt->get_lnames().front();
    if (name == "help" || name == "config") continue;
    std::string value;
    if (opt->count() > 0) {
      const auto& results = opt->results();
      if (opt->get_expected_max() > 1) {
        for (std::size_t i = 0; i < results.size(); ++i) {
          value += (i ? "," : "") + results[i];
        }
      } else {
        value = results.back();
      }
    } else {
      value = opt->get_default_str();
      // Vector defaults render as "[a,b]" or "{}".
      if (value.size() >= 2 && (value.front() == '[' || value.front() == '{')) {
        value = value.substr(1, value.size() - 2);
      }
    }
    entries.emplace_back(name, value);
  }
  return entries;
}

void write_resolved(const CLI::App& cmd, const fs::path& out_dir, bool echo) {
  const auto entries = resolved_entries(cmd);
  sgbh::write_config_file(entries, out_dir / (cmd.get_name() + ".config"));
  if (echo) {
    for (const auto& [key, value] : entries) std::cout << key << " = " << value << '\n';
  }
}

void add_graph_options(CLI::App* cmd, GraphOptions& g, bool required) {
  auto* edges = cmd->add_option("--edges", g.edges, "Edge list (<u> <v> per line)");
  if (required) edges->required();
  cmd->add_option("--split-ratio", g.split_ratio, "Per-source train fraction");
  cmd->add_option("--remap", g.remap, "Treat IDs as raw tokens and densify them");
}

int cmd_train(const CLI::App& cmd, TrainOptions& o) {
  o.model.layer_weights = o.layer_weights;
  o.model.seed = o.seed;
  o.train.seed = o.seed;
  o.train.mode = sgbh::parse_train_mode(o.mode);
  o.train.sampler = sgbh::parse_sampler_kind(o.sampler);
  try {
    o.model.validate();
    o.train.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  require_file(o.graph.edges, "edges");
  const fs::path out = prepare_out_dir(o.out);
  write_resolved(cmd, out, true);

  const auto graph = load_graph(o.graph, &out);
  const auto split = sgbh::split_dataset(graph, o.graph.split_ratio, o.seed);
  std::cout << "graph: |U|=" << graph.num_sources() << " |V|=" << graph.num_destinations()
            << " |E|=" << graph.num_edges() << " train=" << split.train.num_edges()
            << " test=" << split.test.num_edges() << '\n';

  fs::remove(out / "train_log.csv");
  sgbh::TrainingLogWriter log(out / "train_log.csv");
  const auto result = sgbh::train(split, o.model, o.train, [&](const sgbh::EpochLog& e) {
    log.append(e);
    std::cout << "epoch " << e.epoch << " loss=" << e.total << " main=" << e.terms.main;
    if (e.recall20) std::cout << " recall@20=" << *e.recall20;
    std::cout << '\n';
  });

  const auto codebook = sgbh::encode(result.table, split, o.model);
  sgbh::save_codebook(codebook, out / "codebook.sgbh");
  if (split.test.num_edges() > 0) {
    const auto report = sgbh::evaluate(codebook, split);
    sgbh::write_metrics_csv(report, out / "metrics.csv");
    std::cout << "recall@20=" << report.recall_at(20) << " ndcg@20=" << report.ndcg_at(20)
              << '\n';
  }
  std::cout << "codebook: " << (out / "codebook.sgbh").string() << '\n';
  return kExitOk;
}

sgbh::PackedCodebook load_codebook_checked(const std::string& path) {
  require_file(path, "codebook");
  return sgbh::load_codebook(path);
}

sgbh::DatasetSplit load_split_for(const sgbh::PackedCodebook& codebook,
                                  const GraphOptions& g, std::uint64_t seed) {
  const auto graph = load_graph(g, nullptr);
  if (graph.num_sources() != codebook.num_sources() ||
      graph.num_destinations() != codebook.num_destinations()) {
    throw std::runtime_error(
        "size mismatch: codebook has " + std::to_string(codebook.num_sources()) +
        " sources and " + std::to_string(codebook.num_destinations()) +
        " destinations, edge list has " + std::to_string(graph.num_sources()) +
        " sources and " + std::to_string(graph.num_destinations()) + " destinations");
  }
  return sgbh::split_dataset(graph, g.split_ratio, seed);
}

int cmd_eval(const CLI::App& cmd, EvalOptions& o) {
  require_file(o.graph.edges, "edges");
  const auto codebook = load_codebook_checked(o.codebook);
  const fs::path out = prepare_out_dir(o.out);
  write_resolved(cmd, out, false);
  const auto split = load_split_for(codebook, o.graph, o.seed);
  const auto report = sgbh::evaluate(codebook, split, o.ks, o.exclude_train);
  sgbh::write_metrics_csv(report, out / "metrics.csv");
  for (std::size_t i = 0; i < report.ks.size(); ++i) {
    std::cout << "recall@" << report.ks[i] << '=' << report.recall[i] << " ndcg@"
              << report.ks[i] << '=' << report.ndcg[i] << '\n';
  }
  return kExitOk;
}

int cmd_diagnose(const CLI::App& cmd, DiagnoseOptions& o) {
  require_file(o.eval.graph.edges, "edges");
  const auto codebook = load_codebook_checked(o.eval.codebook);
  const fs::path out = prepare_out_dir(o.eval.out);
  write_resolved(cmd, out, false);
  const auto split = load_split_for(codebook, o.eval.graph, o.eval.seed);
  const auto hits = sgbh::hit_edge_set(codebook, split, o.topk, o.eval.exclude_train);
  sgbh::HammingStatsOptions stats_opts{o.groups, o.non_neighbor_samples, o.eval.seed};
  const auto stats = sgbh::layer_hamming_stats(codebook, hits, split, stats_opts);
  sgbh::write_similarity_csv(stats, out / "similarity.csv");
  std::cout << "hit edges: " << hits.size() << " of " << split.test.num_edges() << '\n';
  for (std::size_t l = 0; l < codebook.num_segments(); ++l) {
    auto show = [](std::optional<double> v) {
      return v ? std::to_string(*v) : std::string("NA");
    };
    std::cout << "layer " << l << " neighbor="
              << show(sgbh::mean_over_groups(stats, l, sgbh::PairKind::kNeighbor))
              << " non-neighbor="
              << show(sgbh::mean_over_groups(stats, l, sgbh::PairKind::kNonNeighbor))
              << '\n';
  }
  return kExitOk;
}

int cmd_search(const CLI::App& cmd, SearchOptions& o) {
  const auto codebook = load_codebook_checked(o.codebook);
  std::optional<sgbh::DatasetSplit> split;
  if (!o.graph.edges.empty()) split = load_split_for(codebook, o.graph, o.seed);

  std::vector<std::string> queries = o.queries;
  if (o.random_queries > 0) {
    if (codebook.num_sources() == 0) throw UsageError("codebook has no sources");
    sgbh::Rng rng = sgbh::make_rng(o.seed, "queries");
    std::uniform_int_distribution<std::size_t> pick(0, codebook.num_sources() - 1);
    for (std::size_t i = 0; i < o.random_queries; ++i) queries.push_back(std::to_string(pick(rng)));
  }
  if (queries.empty()) throw UsageError("no queries (use --query or --random-queries)");

  std::ofstream file;
  std::ostream* sink = &std::cout;
  if (!o.out.empty()) {
    const fs::path out = prepare_out_dir(o.out);
    write_resolved(cmd, out, false);
    file.open(out / "search.tsv");
    if (!file) throw std::runtime_error("cannot write " + (out / "search.tsv").string());
    sink = &file;
  }
  *sink << std::setprecision(9);

  sgbh::OpCounter total;
  double total_ms = 0.0;
  for (const std::string& q : queries) {
    std::uint32_t id = 0;
    auto [ptr, ec] = std::from_chars(q.data(), q.data() + q.size(), id);
    if (ec != std::errc() || ptr != q.data() + q.size() || id >= codebook.num_sources()) {
      *sink << q << "\terror\tinvalid source id\n";
      continue;
    }
    auto exclude = split ? split->train.source_neighbors(id) : std::span<const std::uint32_t>{};
    sgbh::OpCounter counter;
    const auto start = std::chrono::steady_clock::now();
    const auto result = sgbh::topk_search(codebook, id, o.k, exclude, &counter);
    total_ms += std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - start).count();
    total.flops += counter.flops;
    total.bops += counter.bops;
    for (std::size_t r = 0; r < result.items.size(); ++r) {
      *sink << id << '\t' << r + 1 << '\t' << result.items[r].destination << '\t'
            << result.items[r].score << '\n';
    }
  }
  std::ostringstream summary;
  summary << "flops=" << total.flops << " bops=" << total.bops << " ms=" << std::fixed
          << std::setprecision(3) << total_ms;
  *sink << summary.str() << '\n';
  if (sink != &std::cout) std::cout << summary.str() << '\n';
  return kExitOk;
}

int cmd_synth(const CLI::App& cmd, SynthOptions& o) {
  const fs::path out = prepare_out_dir(o.out);
  sgbh::BipartiteGraph graph;
  try {
    graph = sgbh::planted_block_graph(o.spec);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  write_resolved(cmd, out, false);
  sgbh::write_edge_list(graph, out / "edges.tsv");
  std::cout << "edges: " << graph.num_edges() << " -> " << (out / "edges.tsv").string()
            << '\n';
  return kExitOk;
}

// Expands `--config FILE` into `--key value` pairs placed before the user's
// own arguments, so explicit flags take precedence.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::vector<std::string> rest;
  std::string config_path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (config_path.empty()) return args;
  if (!fs::is_regular_file(config_path)) {
    throw UsageError("config file not found: " + config_path);
  }
  std::vector<std::string> out{args[0]};
  if (!rest.empty()) out.push_back(rest.front());
  for (const auto& [key, value] : sgbh::read_config_file(config_path)) {
    if (value.empty()) continue;  // an empty list keeps the built-in default
    out.push_back("--" + key);
    // Multi-valued options are written comma-separated.
    out.push_back(value);
  }
  out.insert(out.end(), rest.begin() + (rest.empty() ? 0 : 1), rest.end());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bipartite graph hashing: train, evaluate and search mixed-precision codes"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.option_defaults()->always_capture_default();

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write its codebook");
  add_graph_options(train_cmd, train.graph, true);
  train_cmd->add_option("--out", train.out, "Output directory")->required();
  train_cmd->add_option("--mode", train.mode, "lightgch or sgbgh");
  train_cmd->add_option("--sampler", train.sampler, "auto, uniform or sign");
  train_cmd->add_option("--dim", train.model.dim, "Bits per layer (multiple of 8)");
  train_cmd->add_option("--layers", train.model.layers, "Graph convolution layers");
  train_cmd->add_option("--layer-weights", train.layer_weights,
                        "Deep-layer weights w_1..w_L (default 1/L)")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  train_cmd->add_option("--fourier-h", train.model.fourier_h, "Fourier estimator half-period");
  train_cmd->add_option("--fourier-terms", train.model.fourier_terms, "Fourier odd-term cutoff");
  train_cmd->add_option("--batch-size", train.train.batch_size, "Edges per batch");
  train_cmd->add_option("--lr", train.train.learning_rate, "Adam learning rate");
  train_cmd->add_option("--epochs", train.train.epochs, "Epoch cap");
  train_cmd->add_option("--tau", train.train.tau, "Contrastive temperature");
  train_cmd->add_option("--gamma", train.train.gamma, "Contrastive loss weight");
  train_cmd->add_option("--beta0", train.train.beta0, "Layer-0 BPR weight");
  train_cmd->add_option("--beta1", train.train.beta1, "Deep-layer BPR weight");
  train_cmd->add_option("--lambda", train.train.lambda, "L2 coefficient");
  train_cmd->add_option("--centers", train.train.centers, "Hash centers |C|");
  train_cmd->add_option("--kmeans-iters", train.train.kmeans_iters, "Lloyd iteration cap");
  train_cmd->add_option("--eval-every", train.train.eval_every,
                        "Evaluate every N epochs for early stopping (0 = off)");
  train_cmd->add_option("--patience", train.train.patience, "Early-stopping patience");
  train_cmd->add_option("--seed", train.seed, "Seed for every random stream");

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Recall/NDCG of a codebook on the test split");
  add_graph_options(eval_cmd, eval.graph, true);
  eval_cmd->add_option("--codebook", eval.codebook, "Codebook file")->required();
  eval_cmd->add_option("--out", eval.out, "Output directory")->required();
  eval_cmd->add_option("--seed", eval.seed, "Split seed");
  eval_cmd->add_option("--exclude-train", eval.exclude_train,
                       "Skip training neighbors when ranking");
  eval_cmd->add_option("--ks", eval.ks, "Cutoffs")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

  DiagnoseOptions diag;
  auto* diag_cmd = app.add_subcommand("diagnose", "Layer-wise Hamming similarity statistics");
  add_graph_options(diag_cmd, diag.eval.graph, true);
  diag_cmd->add_option("--codebook", diag.eval.codebook, "Codebook file")->required();
  diag_cmd->add_option("--out", diag.eval.out, "Output directory")->required();
  diag_cmd->add_option("--seed", diag.eval.seed, "Split and sampling seed");
  diag_cmd->add_option("--exclude-train", diag.eval.exclude_train,
                       "Skip training neighbors when ranking");
  diag_cmd->add_option("--groups", diag.groups, "Source groups");
  diag_cmd->add_option("--neg-samples", diag.non_neighbor_samples,
                       "Non-neighbors sampled per source");
  diag_cmd->add_option("--topk", diag.topk, "Retrieval depth for hit edges");

  SearchOptions search;
  auto* search_cmd = app.add_subcommand("search", "Top-K Hamming-space search");
  search_cmd->add_option("--codebook", search.codebook, "Codebook file")->required();
  search_cmd->add_option("--out", search.out, "Output directory (default: stdout)");
  search_cmd->add_option("--query", search.queries, "Source index to query")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  search_cmd->add_option("--random-queries", search.random_queries,
                         "Add N uniformly random source queries");
  search_cmd->add_option("-k,--k", search.k, "Results per query");
  add_graph_options(search_cmd, search.graph, false);
  search_cmd->add_option("--seed", search.seed, "Split and query seed");

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a planted block-bipartite graph");
  synth_cmd->add_option("--blocks", synth.spec.blocks, "Number of planted blocks");
  synth_cmd->add_option("--sources", synth.spec.sources, "|U|");
  synth_cmd->add_option("--destinations", synth.spec.destinations, "|V|");
  synth_cmd->add_option("--p-in", synth.spec.p_in, "Within-block edge probability");
  synth_cmd->add_option("--p-out", synth.spec.p_out, "Cross-block edge probability");
  synth_cmd->add_option("--seed", synth.spec.seed, "Seed");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();

  std::vector<std::string> args;
  try {
    args = expand_config(argc, argv);
    std::vector<char*> cargs;
    for (auto& a : args) cargs.push_back(a.data());
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(*train_cmd, train);
    if (*eval_cmd) return cmd_eval(*eval_cmd, eval);
    if (*diag_cmd) return cmd_diagnose(*diag_cmd, diag);
    if (*search_cmd) return cmd_search(*search_cmd, search);
    if (*synth_cmd) return cmd_synth(*synth_cmd, synth);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
