#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "spacetime/graph.hpp"
#include "spacetime/likelihood.hpp"
#include "spacetime/manifold.hpp"

namespace spacetime {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class LossReduction { kMean, kSum };

struct TrainConfig {
  double lr = 0.02;
  int epochs = 200;
  int burnin_epochs = 10;
  double burnin_factor = 0.01;
  int batch_size = 2;  // positive edges per batch, each with neg_ratio negatives
  int neg_ratio = 4;
  double lr_final_fraction = 0.25;
  double init_scale = 1e-3;
  LossReduction reduction = LossReduction::kMean;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One point per node, stored contiguously.
class EmbeddingTable {
 public:
  EmbeddingTable(ManifoldSpec spec, int num_nodes);

  static EmbeddingTable random(const ManifoldSpec& spec, int num_nodes,
                               double scale, std::mt19937_64& rng);

  const ManifoldSpec& spec() const { return spec_; }
  int num_nodes() const { return num_nodes_; }
  std::size_t dim() const { return dim_; }

  ConstCoords point(int node) const {
    return {coords_.data() + static_cast<std::size_t>(node) * dim_, dim_};
  }
  Coords point(int node) {
    return {coords_.data() + static_cast<std::size_t>(node) * dim_, dim_};
  }
  const Vector& coords() const { return coords_; }

  /// Largest |<x,x>_L + 1| over all nodes (0 on flat manifolds).
  double max_quadric_residual() const;

  bool operator==(const EmbeddingTable&) const = default;

 private:
  ManifoldSpec spec_;
  int num_nodes_;
  std::size_t dim_;
  Vector coords_;
};

struct EpochStats {
  int epoch = 0;
  double lr = 0.0;
  double mean_nll = 0.0;
};

struct TrainResult {
  EmbeddingTable table;
  std::vector<EpochStats> trace;
};

/// Called after every epoch with the updated table.
using EpochCallback = std::function<void(int epoch, const EmbeddingTable&)>;

/// Learning rate for epoch `epoch_index`: burn-in rate first, then a linear
/// decay from lr to lr * lr_final_fraction at the last epoch.
double epoch_lr(const TrainConfig& cfg, int epoch_index);

/// Pseudo-Riemannian SGD on the NLL of `train_edges` plus fresh negatives
/// every epoch.
TrainResult train(const std::vector<Edge>& train_edges, int num_nodes,
                  const ManifoldSpec& spec, const Likelihood& likelihood,
                  const TrainConfig& cfg, const EpochCallback& on_epoch = {});

/// Continues training from an existing table.
TrainResult train_from(EmbeddingTable table,
                       const std::vector<Edge>& train_edges,
                       const Likelihood& likelihood, const TrainConfig& cfg,
                       const EpochCallback& on_epoch = {});

double edge_probability(const EmbeddingTable& table,
                        const Likelihood& likelihood, int source, int target);
double edge_probability(const ManifoldSpec& spec, const Likelihood& likelihood,
                        ConstCoords p, ConstCoords q);

/// NLL of the edge p -> q; adds scale * dNLL/dp and scale * dNLL/dq into
/// the gradient buffers.
double edge_loss_gradient(const ManifoldSpec& spec,
                          const Likelihood& likelihood, ConstCoords p,
                          ConstCoords q, EdgeLabel label, double scale,
                          Coords grad_p, Coords grad_q);

/// Max relative error between the analytic NLL differential and central
/// finite differences (step 1e-5) along constraint-respecting directions
/// at p and q.
double grad_check(const ManifoldSpec& spec, const Likelihood& likelihood,
                  ConstCoords p, ConstCoords q, EdgeLabel label);

void save_checkpoint(const EmbeddingTable& table,
                     const std::filesystem::path& path);
EmbeddingTable load_checkpoint(const std::filesystem::path& path);

}  // namespace spacetime
