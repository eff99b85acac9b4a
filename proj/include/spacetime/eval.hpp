#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "spacetime/graph.hpp"
#include "spacetime/likelihood.hpp"
#include "spacetime/manifold.hpp"
#include "spacetime/optimizer.hpp"

namespace spacetime {

class EvalError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Scored {
  double score = 0.0;
  bool positive = false;
};

struct ScoredEdge {
  int source = 0;
  int target = 0;
  bool positive = false;
  double probability = 0.0;
};

struct Metrics {
  double average_precision = 0.0;
  double f1 = 0.0;
  double f1_threshold = 0.0;
  double test_nll = 0.0;  // mean over the test pool
  /// True when no validation edges existed and the threshold was tuned on
  /// the test pool itself.
  bool in_sample_threshold = false;
  std::vector<ScoredEdge> per_edge;
};

/// Step-interpolated AP over the score-descending ranking. Equal scores
/// keep their input order.
double average_precision(std::span<const Scored> scored);

struct F1Choice {
  double threshold = 0.0;
  double f1 = 0.0;
};

/// Items with score > threshold are predicted positive. Candidates are the
/// midpoints between consecutive distinct scores plus -inf and +inf; ties in
/// F1 go to the lowest threshold.
F1Choice best_f1_threshold(std::span<const Scored> scored);
double f1_at(std::span<const Scored> scored, double threshold);

Metrics evaluate(const EmbeddingTable& table, const Likelihood& likelihood,
                 const SplitDataset& dataset);

/// Scores a list of edges with labels, in order.
std::vector<ScoredEdge> score_edges(const EmbeddingTable& table,
                                    const Likelihood& likelihood,
                                    const std::vector<Edge>& edges,
                                    bool positive);

struct HeatmapBounds {
  double x0_min = -1.0;
  double x0_max = 1.0;
  double x1_min = -1.0;
  double x1_max = 1.0;
};

struct HeatmapCell {
  double x0 = 0.0;
  double x1 = 0.0;
  double prob = 0.0;
};

/// Edge probability from the origin to every q on a resolution x resolution
/// grid. x0 is the time coordinate and varies slowest.
std::vector<HeatmapCell> heatmap(const Likelihood& likelihood,
                                 const ManifoldSpec& spec,
                                 const HeatmapBounds& bounds, int resolution);
void write_heatmap_csv(const std::vector<HeatmapCell>& cells,
                       const std::filesystem::path& path);

struct DiskCheckResult {
  int samples = 0;
  int boundary_skipped = 0;
  int violations = 0;
  int containment_samples = 0;
  int containment_violations = 0;
};

/// Compares F(p,q) >= 1/2 for the flat-Minkowski TFD (alpha = r = 0, k = 1)
/// against the closed-form disk condition
///   D^2 <= tau1 * log((3 - e^{-T/tau2}) / (1 + e^{-T/tau2})) + T^2
/// on (D, T) drawn from [0,5] x [-5,5], then checks that every pair with
/// 0 <= D <= T has F >= 1/2.
DiskCheckResult disk_boundary_check(double tau1, double tau2, int num_samples,
                                    std::uint64_t seed);

}  // namespace spacetime
