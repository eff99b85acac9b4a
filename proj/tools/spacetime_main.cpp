// Command-line front end: generate | train | eval | sweep | toy | heatmap.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "spacetime/config.hpp"
#include "spacetime/pipeline.hpp"
#include "spacetime/text_format.hpp"

namespace st = spacetime;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool quiet = false;
  std::vector<std::string> overrides;
};

st::RawConfig load_raw(const Common& c) {
  st::RawConfig raw;
  if (!c.config_path.empty()) raw = st::read_raw_config(c.config_path);
  for (const auto& o : c.overrides) st::apply_override(raw, o);
  // One seed drives the graph generator, the split and training.
  if (c.seed) {
    const std::string s = std::to_string(*c.seed);
    raw["train.seed"] = s;
    raw["data.split_seed"] = s;
    raw["data.generator_seed"] = s;
  }
  if (!c.out.empty()) raw["output.dir"] = c.out;
  return raw;
}

void say(const Common& c, const std::string& line) {
  if (!c.quiet) std::cout << line << '\n';
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", x);
  return buf;
}

int cmd_generate(const Common& c, const std::string& output) {
  const st::ExperimentConfig cfg = st::parse_config(load_raw(c));
  const st::DirectedGraph g = st::build_graph(cfg.data);
  const std::filesystem::path path =
      output.empty() ? cfg.output_dir / "graph.tsv" : std::filesystem::path(output);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  st::save_edge_list(g, path);
  std::filesystem::create_directories(cfg.output_dir);
  st::write_config(cfg, cfg.output_dir / "effective_config.ini");
  say(c, "nodes " + std::to_string(g.num_nodes()) + " edges " +
             std::to_string(g.num_edges()) + " dag " +
             (st::is_dag(g) ? "true" : "false") + " -> " + path.string());
  return 0;
}

int cmd_train(const Common& c) {
  const st::ExperimentConfig cfg = st::parse_config(load_raw(c));
  const st::PipelineResult r = st::run_pipeline(cfg);
  st::write_train_outputs(cfg, r);
  say(c, "AP " + fmt(r.metrics.average_precision) + "  F1 " + fmt(r.metrics.f1) +
             "  test NLL " + fmt(r.metrics.test_nll) + "  -> " +
             cfg.output_dir.string());
  return 0;
}

int cmd_eval(const Common& c, const std::string& checkpoint) {
  const st::ExperimentConfig cfg = st::parse_config(load_raw(c));
  const st::EmbeddingTable table = st::load_checkpoint(checkpoint);
  const st::Metrics m = st::evaluate_checkpoint(cfg, table);
  std::filesystem::create_directories(cfg.output_dir);
  const st::Likelihood lik = st::resolved_likelihood(cfg);
  st::write_json(st::metrics_json(m, lik), cfg.output_dir / "eval_metrics.json");
  st::write_predictions_csv(m.per_edge, st::build_graph(cfg.data),
                            cfg.output_dir / "eval_predictions.csv");
  st::write_config(cfg, cfg.output_dir / "effective_config.ini");
  say(c, "AP " + fmt(m.average_precision) + "  F1 " + fmt(m.f1) + "  test NLL " +
             fmt(m.test_nll));
  return 0;
}

int cmd_sweep(const Common& c, std::optional<int> trials,
              std::optional<int> workers) {
  const st::RawConfig raw = load_raw(c);
  const auto points = st::expand_sweep(raw);
  const st::ExperimentConfig& first = points.front().config;
  const int n_trials = trials.value_or(first.sweep_trials);
  const int n_workers = workers.value_or(first.sweep_workers);
  say(c, std::to_string(points.size()) + " grid points x " +
             std::to_string(n_trials) + " trials");
  const auto rows = st::run_sweep(points, n_trials, n_workers,
                                  [&](const std::string& line) { say(c, "  " + line); });
  std::filesystem::create_directories(first.output_dir);
  st::write_sweep_csv(rows, first.output_dir / "sweep.csv");
  for (const auto& row : rows) {
    std::string line;
    for (const auto& [key, value] : row.assignment) line += key + "=" + value + " ";
    line += "median " + row.metric + " " +
            (row.values.empty() ? std::string("n/a") : fmt(row.median));
    if (row.failures) line += " (" + std::to_string(row.failures) + " failed)";
    say(c, line);
  }
  return 0;
}

int cmd_toy(const Common& c, const std::string& name, std::optional<int> seeds) {
  const int n = seeds.value_or(st::default_toy_seeds(name));
  const st::ToyReport report = st::run_toy(name, n, c.seed.value_or(0));
  const std::filesystem::path dir = c.out.empty() ? "out" : c.out;
  st::write_toy_outputs(report, dir);
  for (const auto& g : report.summary["groups"]) {
    std::string line = g["label"].get<std::string>() + ": median NLL " +
                       fmt(g["median_nll"].get<double>()) + ", best NLL " +
                       fmt(g["best_nll"].get<double>());
    if (g.contains("median_focal_probability")) {
      line += ", median focal-pair probability " +
              fmt(g["median_focal_probability"].get<double>());
    }
    say(c, line);
  }
  return 0;
}

struct HeatmapOptions {
  std::vector<double> alphas;
  std::vector<double> bounds{-1.0, 1.0, -1.0, 1.0};
  int resolution = 101;
  bool f1_only = false;
  std::string space = "minkowski";
  std::string output;
};

int cmd_heatmap(const Common& c, const HeatmapOptions& h) {
  const st::ExperimentConfig cfg = st::parse_config(load_raw(c));
  const st::ManifoldSpec spec =
      h.space == "euclidean" ? st::ManifoldSpec(st::ManifoldKind::kEuclidean, 2)
                             : st::ManifoldSpec(st::ManifoldKind::kMinkowski, 1);
  st::Likelihood base = cfg.likelihood;
  // No time circle in the plotted plane, so the wrapped sum is one term.
  if (base.kind == st::LikelihoodKind::kWrappedTfd) base.kind = st::LikelihoodKind::kTfd;
  if (cfg.auto_k) base.tfd.k = 1.0;
  if (h.f1_only) {
    st::FdParams fd;
    fd.tau = base.tfd.tau1;
    fd.r = base.tfd.r;
    fd.alpha = 1.0;
    base = st::Likelihood::make_fd(fd);
  }
  const st::HeatmapBounds bounds{h.bounds[0], h.bounds[1], h.bounds[2], h.bounds[3]};

  std::vector<std::optional<double>> alphas;
  for (double a : h.alphas) alphas.emplace_back(a);
  if (alphas.empty()) alphas.emplace_back();
  if (h.f1_only && !h.alphas.empty()) {
    throw std::invalid_argument("--alpha has no effect with --f1-only");
  }
  if (alphas.size() > 1 && !h.output.empty()) {
    throw std::invalid_argument("--output takes a single grid; drop it to write one CSV per alpha");
  }
  for (const auto& a : alphas) {
    st::Likelihood lik = base;
    if (a) lik.tfd.alpha = *a;
    lik.validate();
    std::filesystem::path path;
    if (!h.output.empty()) {
      path = h.output;
    } else {
      path = cfg.output_dir /
             (a ? "heatmap_alpha_" + st::format_double(*a) + ".csv" : "heatmap.csv");
    }
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    st::write_heatmap_csv(st::heatmap(lik, spec, bounds, h.resolution), path);
    say(c, "wrote " + path.string());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Directed graph embeddings in spacetime manifolds"};
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  std::uint64_t seed = 0;
  app.add_option("--config", common.config_path, "INI config file")
      ->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed,
                                  "seed for generator, split and training");
  app.add_option("--out", common.out, "output directory");
  app.add_flag("--quiet", common.quiet, "no progress output");
  app.add_option("--set", common.overrides, "override a key, section.key=value");

  auto* generate = app.add_subcommand("generate", "write the configured graph as an edge list");
  std::string gen_output;
  generate->add_option("--output", gen_output, "edge-list path (default <out>/graph.tsv)");

  auto* train = app.add_subcommand("train", "split, train and evaluate");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on the configured split");
  std::string checkpoint;
  eval->add_option("--checkpoint", checkpoint, "checkpoint.tsv from train")
      ->required()
      ->check(CLI::ExistingFile);

  auto* sweep = app.add_subcommand("sweep", "grid search over comma-separated config values");
  std::optional<int> sweep_trials, sweep_workers;
  sweep->add_option("--trials", sweep_trials, "seeds per grid point");
  sweep->add_option("--workers", sweep_workers, "worker threads");

  auto* toy = app.add_subcommand("toy", "canned toy experiments");
  std::string toy_name;
  std::optional<int> toy_seeds;
  toy->add_option("name", toy_name, "cycle5 | chain10 | transitive10 | tripartite")
      ->required();
  toy->add_option("--trials", toy_seeds, "number of seeds");

  auto* heat = app.add_subcommand("heatmap", "edge probability from the origin over a grid");
  HeatmapOptions hm;
  heat->add_option("--alpha", hm.alphas, "one CSV per alpha value");
  heat->add_option("--bounds", hm.bounds, "x0_min x0_max x1_min x1_max")
      ->expected(4);
  heat->add_option("--resolution", hm.resolution, "grid points per axis");
  heat->add_flag("--f1-only", hm.f1_only, "plot only the distance factor");
  heat->add_option("--space", hm.space, "minkowski or euclidean")
      ->check(CLI::IsMember({"minkowski", "euclidean"}));
  heat->add_option("--output", hm.output, "CSV path (default <out>/heatmap.csv)");

  CLI11_PARSE(app, argc, argv);
  if (seed_opt->count()) common.seed = seed;

  try {
    if (*generate) return cmd_generate(common, gen_output);
    if (*train) return cmd_train(common);
    if (*eval) return cmd_eval(common, checkpoint);
    if (*sweep) return cmd_sweep(common, sweep_trials, sweep_workers);
    if (*toy) return cmd_toy(common, toy_name, toy_seeds);
    if (*heat) return cmd_heatmap(common, hm);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
