#include "spacetime/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <optional>
#include <thread>

#include "spacetime/text_format.hpp"

namespace spacetime {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

// JSON has no infinities; thresholds at +-inf are written as strings.
nlohmann::json json_number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

double best_nll(const std::vector<ToyRun>& runs, std::size_t* index) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < runs.size(); ++i) {
    if (runs[i].nll < runs[best].nll) best = i;
  }
  if (index) *index = best;
  return runs[best].nll;
}

std::vector<double> nlls(const std::vector<ToyRun>& runs) {
  std::vector<double> out;
  for (const auto& r : runs) out.push_back(r.nll);
  return out;
}

nlohmann::json separation_json(const ToyRun& run) {
  double min_pos = 1.0, max_neg = 0.0;
  std::vector<double> negatives;
  for (const auto& e : run.pairs) {
    if (e.positive) {
      min_pos = std::min(min_pos, e.probability);
    } else {
      max_neg = std::max(max_neg, e.probability);
      negatives.push_back(e.probability);
    }
  }
  return {{"min_positive_probability", min_pos},
          {"max_negative_probability", max_neg},
          {"median_negative_probability", median(negatives)}};
}

}  // namespace

DirectedGraph build_graph(const DataConfig& data) {
  if (data.source == DataSource::kEdgeList) {
    return load_edge_list(data.edge_list).graph;
  }
  switch (data.generator) {
    case GeneratorKind::kDupDiv:
      return generate_duplication_divergence(data.dupdiv);
    case GeneratorKind::kChain:
      return generate_chain(data.n);
    case GeneratorKind::kCycle:
      return generate_cycle(data.n);
    case GeneratorKind::kTransitiveChain:
      return generate_transitive_chain(data.n);
    case GeneratorKind::kCommonNeighbors:
      return generate_common_neighbors(data.n_pred, data.n_succ);
  }
  throw ConfigError("unhandled generator");
}

Likelihood resolved_likelihood(const ExperimentConfig& config) {
  ModelSetup setup;
  setup.spec = config.manifold;
  setup.likelihood = config.likelihood;
  setup.auto_k = config.auto_k;
  return resolve_likelihood(setup);
}

PipelineResult run_pipeline(const ExperimentConfig& config) {
  config.validate();
  DirectedGraph graph = build_graph(config.data);
  SplitDataset data =
      make_dataset(graph, config.data.train_frac, config.data.valid_frac,
                   config.train.neg_ratio, config.data.split_seed);
  const Likelihood likelihood = resolved_likelihood(config);
  TrainResult trained = train(data.train_pos, graph.num_nodes(),
                              config.manifold, likelihood, config.train);
  Metrics metrics = evaluate(trained.table, likelihood, data);
  return {std::move(graph), std::move(data), likelihood, std::move(trained),
          std::move(metrics)};
}

Metrics evaluate_checkpoint(const ExperimentConfig& config,
                            const EmbeddingTable& table) {
  config.validate();
  const DirectedGraph graph = build_graph(config.data);
  if (table.num_nodes() != graph.num_nodes()) {
    throw EvalError("checkpoint has " + std::to_string(table.num_nodes()) +
                    " nodes but the graph has " +
                    std::to_string(graph.num_nodes()));
  }
  if (!(table.spec() == config.manifold)) {
    throw EvalError("checkpoint manifold does not match the config");
  }
  const SplitDataset data =
      make_dataset(graph, config.data.train_frac, config.data.valid_frac,
                   config.train.neg_ratio, config.data.split_seed);
  return evaluate(table, resolved_likelihood(config), data);
}

void write_loss_csv(const std::vector<EpochStats>& trace,
                    const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "epoch,lr,mean_nll\n";
  for (const auto& s : trace) {
    out << s.epoch << ',' << format_double(s.lr) << ','
        << format_double(s.mean_nll) << '\n';
  }
  finish(out, path);
}

nlohmann::json metrics_json(const Metrics& m, const Likelihood& likelihood) {
  std::size_t positives = 0;
  for (const auto& e : m.per_edge) positives += e.positive;
  return {{"average_precision", m.average_precision},
          {"f1", m.f1},
          {"f1_threshold", json_number(m.f1_threshold)},
          {"in_sample_threshold", m.in_sample_threshold},
          {"test_nll", json_number(m.test_nll)},
          {"test_positives", positives},
          {"test_negatives", m.per_edge.size() - positives},
          {"likelihood", std::string(to_string(likelihood.kind))},
          {"k", likelihood.tfd.k}};
}

void write_json(const nlohmann::json& doc, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
  finish(out, path);
}

void write_predictions_csv(const std::vector<ScoredEdge>& edges,
                           const DirectedGraph& graph,
                           const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "source,target,positive,probability\n";
  for (const auto& e : edges) {
    out << graph.node_label(e.source) << ',' << graph.node_label(e.target)
        << ',' << (e.positive ? 1 : 0) << ',' << format_double(e.probability)
        << '\n';
  }
  finish(out, path);
}

void write_train_outputs(const ExperimentConfig& config,
                         const PipelineResult& result) {
  const auto& dir = config.output_dir;
  std::filesystem::create_directories(dir);
  save_checkpoint(result.trained.table, dir / "checkpoint.tsv");
  write_loss_csv(result.trained.trace, dir / "loss.csv");
  nlohmann::json doc = metrics_json(result.metrics, result.likelihood);
  doc["nodes"] = result.graph.num_nodes();
  doc["edges"] = result.graph.num_edges();
  doc["train_edges"] = result.data.train_pos.size();
  doc["epochs"] = result.trained.trace.size();
  if (!result.trained.trace.empty()) {
    doc["final_train_nll"] = result.trained.trace.back().mean_nll;
  }
  write_json(doc, dir / "metrics.json");
  write_predictions_csv(result.metrics.per_edge, result.graph,
                        dir / "predictions.csv");
  write_config(config, dir / "effective_config.ini");
}

ExperimentConfig trial_config(const ExperimentConfig& config, int trial) {
  ExperimentConfig c = config;
  const auto t = static_cast<std::uint64_t>(trial);
  c.train.seed += t;
  c.data.split_seed += t;
  c.data.dupdiv.seed += t;
  return c;
}

std::vector<SweepRow> run_sweep(
    const std::vector<SweepPoint>& points, int trials, int workers,
    const std::function<void(const std::string&)>& log) {
  if (points.empty()) throw ConfigError("empty sweep grid");
  if (trials < 1) throw ConfigError("sweep needs at least one trial");
  if (workers < 1) throw ConfigError("sweep needs at least one worker");

  struct Outcome {
    std::optional<double> value;
    bool dag = false;
    std::string error;
  };
  const std::size_t jobs = points.size() * static_cast<std::size_t>(trials);
  std::vector<Outcome> outcomes(jobs);
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;

  auto worker = [&] {
    for (std::size_t j = next++; j < jobs; j = next++) {
      const std::size_t p = j / static_cast<std::size_t>(trials);
      const int t = static_cast<int>(j % static_cast<std::size_t>(trials));
      Outcome& o = outcomes[j];
      try {
        const PipelineResult r = run_pipeline(trial_config(points[p].config, t));
        o.dag = is_dag(r.graph);
        o.value = o.dag ? r.metrics.f1 : r.metrics.average_precision;
      } catch (const std::exception& e) {
        o.error = e.what();
      }
      if (log) {
        std::lock_guard lock(log_mutex);
        log("point " + std::to_string(p + 1) + "/" +
            std::to_string(points.size()) + " trial " + std::to_string(t) +
            (o.value ? ": " + format_double(*o.value) : ": failed: " + o.error));
      }
    }
  };
  const int n_threads = std::min<int>(workers, static_cast<int>(jobs));
  std::vector<std::thread> pool;
  for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::vector<SweepRow> rows;
  for (std::size_t p = 0; p < points.size(); ++p) {
    SweepRow row;
    row.assignment = points[p].assignment;
    bool dag = false;
    for (int t = 0; t < trials; ++t) {
      const Outcome& o = outcomes[p * static_cast<std::size_t>(trials) + t];
      if (o.value) {
        row.values.push_back(*o.value);
        dag = dag || o.dag;
      } else {
        ++row.failures;
      }
    }
    row.metric = dag ? "f1" : "ap";
    row.median = row.values.empty() ? std::nan("") : median(row.values);
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.values.empty() != b.values.empty()) return b.values.empty();
    return a.median > b.median;
  });
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows,
                     const std::filesystem::path& path) {
  auto out = open_out(path);
  if (!rows.empty()) {
    for (const auto& [key, value] : rows.front().assignment) out << key << ',';
  }
  out << "metric,median,successes,failures\n";
  for (const auto& row : rows) {
    for (const auto& [key, value] : row.assignment) out << value << ',';
    out << row.metric << ','
        << (row.values.empty() ? std::string("nan") : format_double(row.median))
        << ',' << row.values.size() << ',' << row.failures << '\n';
  }
  finish(out, path);
}

std::vector<std::string> toy_names() {
  return {"cycle5", "chain10", "transitive10", "tripartite"};
}

int default_toy_seeds(const std::string& name) {
  return name == "cycle5" ? 20 : 10;
}

ToyReport run_toy(const std::string& name, int seeds, std::uint64_t base_seed) {
  if (seeds < 1) throw ConfigError("toy needs at least one seed");
  ToyReport report;
  report.name = name;
  std::vector<std::pair<std::string, ModelSetup>> models;
  if (name == "cycle5") {
    report.graph = generate_cycle(5);
    for (auto& m : cycle_toy_models()) models.emplace_back(m.name, m);
  } else if (name == "chain10" || name == "transitive10") {
    report.graph = name == "chain10" ? generate_chain(10)
                                     : generate_transitive_chain(10);
    for (double alpha : {0.001, 0.075}) {
      models.emplace_back("alpha=" + format_double(alpha),
                          transitivity_toy_model(alpha));
    }
  } else if (name == "tripartite") {
    report.graph =
        generate_common_neighbors(kTripartiteGroupSize, kTripartiteGroupSize);
    for (auto& m : tripartite_models()) models.emplace_back(m.name, m);
  } else {
    throw ConfigError("unknown toy '" + name + "' (expected cycle5, chain10, "
                      "transitive10 or tripartite)");
  }

  nlohmann::json groups = nlohmann::json::array();
  for (const auto& [label, setup] : models) {
    ToyGroup group;
    group.label = label;
    for (int s = 0; s < seeds; ++s) {
      group.runs.push_back(train_toy(report.graph, setup,
                                     base_seed + static_cast<std::uint64_t>(s)));
    }
    std::size_t best = 0;
    nlohmann::json g = {{"label", label},
                        {"manifold", std::string(to_string(setup.spec.kind()))},
                        {"likelihood", std::string(to_string(setup.likelihood.kind))},
                        {"median_nll", median(nlls(group.runs))},
                        {"best_nll", best_nll(group.runs, &best)}};
    g["best_seed"] = group.runs[best].seed;
    if (name == "cycle5") g["best_run"] = separation_json(group.runs[best]);
    if (name == "tripartite") {
      std::vector<double> focal;
      for (const auto& r : group.runs) focal.push_back(focal_pair_probability(r));
      g["median_focal_probability"] = median(focal);
    }
    groups.push_back(std::move(g));
    report.groups.push_back(std::move(group));
  }
  report.summary = {{"toy", name},
                    {"nodes", report.graph.num_nodes()},
                    {"edges", report.graph.num_edges()},
                    {"seeds", seeds},
                    {"base_seed", base_seed},
                    {"groups", std::move(groups)}};
  return report;
}

void write_toy_outputs(const ToyReport& report,
                       const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_json(report.summary, dir / (report.name + ".json"));

  const auto pairs_path = dir / (report.name + "_pairs.csv");
  auto pairs = open_out(pairs_path);
  pairs << "group,seed,source,target,positive,probability\n";
  for (const auto& g : report.groups) {
    for (const auto& run : g.runs) {
      for (const auto& e : run.pairs) {
        pairs << g.label << ',' << run.seed << ',' << e.source << ','
              << e.target << ',' << (e.positive ? 1 : 0) << ','
              << format_double(e.probability) << '\n';
      }
    }
  }
  finish(pairs, pairs_path);

  std::size_t width = 0;
  for (const auto& g : report.groups) {
    for (const auto& run : g.runs) width = std::max(width, run.table.dim());
  }
  const auto coords_path = dir / (report.name + "_coords.csv");
  auto coords = open_out(coords_path);
  coords << "group,seed,node";
  for (std::size_t i = 0; i < width; ++i) coords << ",x" << i;
  coords << '\n';
  for (const auto& g : report.groups) {
    for (const auto& run : g.runs) {
      for (int v = 0; v < run.table.num_nodes(); ++v) {
        coords << g.label << ',' << run.seed << ',' << v;
        const auto x = run.table.point(v);
        for (std::size_t i = 0; i < width; ++i) {
          coords << ',';
          if (i < x.size()) coords << format_double(x[i]);
        }
        coords << '\n';
      }
    }
  }
  finish(coords, coords_path);
}

}  // namespace spacetime
