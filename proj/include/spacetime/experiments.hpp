#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spacetime/eval.hpp"
#include "spacetime/graph.hpp"
#include "spacetime/likelihood.hpp"
#include "spacetime/manifold.hpp"
#include "spacetime/optimizer.hpp"

namespace spacetime {

/// Everything needed to train one model.
struct ModelSetup {
  std::string name;
  ManifoldSpec spec{ManifoldKind::kMinkowski, 1};
  Likelihood likelihood;
  bool auto_k = true;  // calibrate k for wrapped likelihoods
  TrainConfig train;
};

/// The likelihood with k resolved (calibrated when auto_k is set and the
/// likelihood is wrapped).
Likelihood resolve_likelihood(const ModelSetup& setup);

/// Tuned duplication-divergence setups at embedding dimension d (total
/// stored coordinates).
ModelSetup dupdiv_setup(ManifoldKind kind, int embedding_dim);
std::vector<ManifoldKind> dupdiv_kinds();

struct LinkPredictionResult {
  Metrics metrics;  // after the final epoch
  std::vector<EpochStats> trace;
  std::vector<double> epoch_test_ap;  // filled when tracked
  int best_epoch = -1;
  double best_epoch_ap = 0.0;
  EmbeddingTable table{ManifoldSpec(ManifoldKind::kEuclidean, 1), 0};
};

LinkPredictionResult run_link_prediction(const SplitDataset& data,
                                         int num_nodes,
                                         const ModelSetup& setup,
                                         bool track_epoch_ap);

/// AP of untrained embeddings drawn at the setup's init scale.
Metrics random_baseline(const SplitDataset& data, int num_nodes,
                        const ModelSetup& setup);

// Toy experiments. Toys train on every edge and score every ordered pair.

struct ToyRun {
  std::string model;
  Likelihood likelihood;
  double nll = 0.0;  // summed over all ordered pairs
  std::vector<ScoredEdge> pairs;
  EmbeddingTable table{ManifoldSpec(ManifoldKind::kEuclidean, 1), 0};
  std::uint64_t seed = 0;
};

std::vector<ScoredEdge> score_all_pairs(const EmbeddingTable& table,
                                        const Likelihood& likelihood,
                                        const DirectedGraph& graph);
double summed_nll(const std::vector<ScoredEdge>& pairs);

ToyRun train_toy(const DirectedGraph& graph, const ModelSetup& setup,
                 std::uint64_t seed);

/// Euclidean, hyperboloid, Minkowski, cylindrical Minkowski and anti-de
/// Sitter models on two-dimensional manifolds.
std::vector<ModelSetup> cycle_toy_models();
/// Minkowski TFD on a 2D manifold with the given time-decay alpha.
ModelSetup transitivity_toy_model(double alpha);
/// Minkowski TFD and Euclidean FD.
std::vector<ModelSetup> tripartite_models();

constexpr int kTripartiteGroupSize = 8;
constexpr int kTripartiteEpochs = 1000;
constexpr int kCycleToyEpochs = 3000;
/// Mean of the two directed probabilities between the focal nodes 0 and 1.
double focal_pair_probability(const ToyRun& run);

double median(std::vector<double> values);

}  // namespace spacetime
