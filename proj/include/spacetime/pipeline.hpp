#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spacetime/config.hpp"
#include "spacetime/eval.hpp"
#include "spacetime/experiments.hpp"

namespace spacetime {

DirectedGraph build_graph(const DataConfig& data);

struct PipelineResult {
  DirectedGraph graph;
  SplitDataset data;
  Likelihood likelihood;  // k resolved
  TrainResult trained;
  Metrics metrics;
};

/// load/generate -> split -> calibrate k -> train -> evaluate.
PipelineResult run_pipeline(const ExperimentConfig& config);

/// The likelihood the config trains with, k calibrated when requested.
Likelihood resolved_likelihood(const ExperimentConfig& config);

/// Rebuilds the config's dataset and scores a stored embedding on it.
Metrics evaluate_checkpoint(const ExperimentConfig& config,
                            const EmbeddingTable& table);

void write_loss_csv(const std::vector<EpochStats>& trace,
                    const std::filesystem::path& path);
nlohmann::json metrics_json(const Metrics& metrics, const Likelihood& likelihood);
void write_json(const nlohmann::json& doc, const std::filesystem::path& path);
void write_predictions_csv(const std::vector<ScoredEdge>& edges,
                           const DirectedGraph& graph,
                           const std::filesystem::path& path);

/// Writes checkpoint.tsv, loss.csv, metrics.json, predictions.csv and
/// effective_config.ini under config.output_dir.
void write_train_outputs(const ExperimentConfig& config,
                         const PipelineResult& result);

struct SweepRow {
  std::vector<std::pair<std::string, std::string>> assignment;
  std::string metric;  // "ap", or "f1" when the graph is a DAG
  std::vector<double> values;  // one per successful trial
  int failures = 0;
  double median = 0.0;
};

/// Trial t of a point runs with train, split and generator seeds offset by t.
ExperimentConfig trial_config(const ExperimentConfig& config, int trial);

/// Runs every point `trials` times on `workers` threads. Rows come back
/// sorted by median, best first; points with no successful trial go last.
std::vector<SweepRow> run_sweep(
    const std::vector<SweepPoint>& points, int trials, int workers,
    const std::function<void(const std::string&)>& log = {});
void write_sweep_csv(const std::vector<SweepRow>& rows,
                     const std::filesystem::path& path);

struct ToyGroup {
  std::string label;
  std::vector<ToyRun> runs;
};

struct ToyReport {
  std::string name;
  DirectedGraph graph;
  std::vector<ToyGroup> groups;
  nlohmann::json summary;
};

/// One of cycle5, chain10, transitive10, tripartite, run over `seeds`
/// seeds starting at `base_seed`.
ToyReport run_toy(const std::string& name, int seeds, std::uint64_t base_seed);
std::vector<std::string> toy_names();
int default_toy_seeds(const std::string& name);

/// Writes <name>.json, <name>_pairs.csv and <name>_coords.csv.
void write_toy_outputs(const ToyReport& report,
                       const std::filesystem::path& dir);

}  // namespace spacetime
