#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace spacetime {

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Edge {
  int source = 0;
  int target = 0;

  auto operator<=>(const Edge&) const = default;
};

/// Directed graph without self-loops or duplicate edges. Edges keep their
/// insertion order, which makes every downstream sampler deterministic.
class DirectedGraph {
 public:
  DirectedGraph() = default;
  explicit DirectedGraph(int num_nodes);
  DirectedGraph(int num_nodes, const std::vector<Edge>& edges);

  int num_nodes() const { return num_nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t num_edges() const { return edges_.size(); }

  /// Returns false if the edge was already present.
  bool add_edge(int source, int target);
  bool has_edge(int source, int target) const;
  int add_node();

  const std::vector<int>& out_neighbors(int node) const { return out_[node]; }
  const std::vector<int>& in_neighbors(int node) const { return in_[node]; }

  /// Optional display names, one per node (used by edge-list IO).
  const std::vector<std::string>& node_names() const { return names_; }
  void set_node_names(std::vector<std::string> names);
  std::string node_label(int node) const;

 private:
  static std::uint64_t key(int source, int target) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(source))
            << 32) |
           static_cast<std::uint32_t>(target);
  }
  void check_node(int node) const;

  int num_nodes_ = 0;
  std::vector<Edge> edges_;
  std::unordered_set<std::uint64_t> edge_keys_;
  std::vector<std::vector<int>> out_;
  std::vector<std::vector<int>> in_;
  std::vector<std::string> names_;
};

struct DupDivParams {
  int n_initial = 3;
  int n_final = 100;
  double p_inherit = 0.7;   // p1
  double p_link = 0.7;      // p2
  bool dag_seed = false;    // transitive tournament instead of all pairs
  std::uint64_t seed = 0;

  void validate() const;
};

DirectedGraph generate_duplication_divergence(const DupDivParams& params);
DirectedGraph generate_chain(int n);
DirectedGraph generate_cycle(int n);
DirectedGraph generate_transitive_chain(int n);
/// Focal nodes are 0 and 1; predecessors follow, then successors.
DirectedGraph generate_common_neighbors(int n_pred, int n_succ);

bool is_dag(const DirectedGraph& graph);

struct EdgeListLoad {
  DirectedGraph graph;
  std::size_t duplicate_count = 0;
};

/// Reads `source<TAB>target` lines; '#' lines and blank lines are skipped.
/// Node ids follow first appearance.
EdgeListLoad load_edge_list(const std::filesystem::path& path);
void save_edge_list(const DirectedGraph& graph,
                    const std::filesystem::path& path);

struct SplitDataset {
  std::vector<Edge> train_pos;
  std::vector<Edge> valid_pos;
  std::vector<Edge> test_pos;
  std::vector<Edge> valid_neg;
  std::vector<Edge> test_neg;
  std::uint64_t split_seed = 0;
};

/// Uniform random partition of the edges; test gets what train and valid
/// leave over.
SplitDataset split(const DirectedGraph& graph, double train_frac,
                   double valid_frac, std::uint64_t seed);

/// For each anchor (u, v) draws `ratio` pairs (u, w) with w uniform, w != u
/// and (u, w) not an edge of `graph`. Without `allow_repeats` the drawn
/// pairs are distinct across the call until a source runs out of
/// non-targets; after that its pairs may repeat.
std::vector<Edge> sample_negatives(const DirectedGraph& graph,
                                   const std::vector<Edge>& anchors, int ratio,
                                   std::mt19937_64& rng,
                                   bool allow_repeats = false);
std::vector<Edge> sample_negatives(const DirectedGraph& graph,
                                   const std::vector<Edge>& anchors, int ratio,
                                   std::uint64_t seed);

/// split() followed by fixed valid/test negatives at `neg_ratio`, drawn
/// against the full graph.
SplitDataset make_dataset(const DirectedGraph& graph, double train_frac,
                          double valid_frac, int neg_ratio,
                          std::uint64_t seed);

}  // namespace spacetime
