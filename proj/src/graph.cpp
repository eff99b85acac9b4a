#include "spacetime/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>
#include <sstream>
#include <unordered_map>

namespace spacetime {

namespace {

constexpr int kMaxRejections = 1000;
// Marks a node that has no edges in an edge-list file.
constexpr std::string_view kNodeDirective = "# node\t";

}  // namespace

DirectedGraph::DirectedGraph(int num_nodes) {
  if (num_nodes < 0) throw GraphError("negative node count");
  num_nodes_ = num_nodes;
  out_.resize(static_cast<std::size_t>(num_nodes));
  in_.resize(static_cast<std::size_t>(num_nodes));
}

DirectedGraph::DirectedGraph(int num_nodes, const std::vector<Edge>& edges)
    : DirectedGraph(num_nodes) {
  for (const Edge& e : edges) add_edge(e.source, e.target);
}

void DirectedGraph::check_node(int node) const {
  if (node < 0 || node >= num_nodes_) {
    throw GraphError("node id " + std::to_string(node) + " out of range");
  }
}

bool DirectedGraph::add_edge(int source, int target) {
  check_node(source);
  check_node(target);
  if (source == target) {
    throw GraphError("self-loop on node " + std::to_string(source));
  }
  if (!edge_keys_.insert(key(source, target)).second) return false;
  edges_.push_back({source, target});
  out_[static_cast<std::size_t>(source)].push_back(target);
  in_[static_cast<std::size_t>(target)].push_back(source);
  return true;
}

bool DirectedGraph::has_edge(int source, int target) const {
  return edge_keys_.contains(key(source, target));
}

int DirectedGraph::add_node() {
  out_.emplace_back();
  in_.emplace_back();
  if (!names_.empty()) names_.push_back(std::to_string(num_nodes_));
  return num_nodes_++;
}

void DirectedGraph::set_node_names(std::vector<std::string> names) {
  if (static_cast<int>(names.size()) != num_nodes_) {
    throw GraphError("node name count does not match node count");
  }
  names_ = std::move(names);
}

std::string DirectedGraph::node_label(int node) const {
  check_node(node);
  if (names_.empty()) return std::to_string(node);
  return names_[static_cast<std::size_t>(node)];
}

void DupDivParams::validate() const {
  if (n_initial < 2 || n_final < n_initial) {
    throw GraphError("duplication-divergence needs 2 <= n_i <= n_f");
  }
  if (!(p_inherit >= 0.0 && p_inherit <= 1.0) ||
      !(p_link >= 0.0 && p_link <= 1.0)) {
    throw GraphError("duplication-divergence probabilities must be in [0,1]");
  }
}

DirectedGraph generate_duplication_divergence(const DupDivParams& params) {
  params.validate();
  DirectedGraph g(params.n_initial);
  for (int i = 0; i < params.n_initial; ++i) {
    for (int j = 0; j < params.n_initial; ++j) {
      if (i == j || (params.dag_seed && j < i)) continue;
      g.add_edge(i, j);
    }
  }
  std::mt19937_64 rng(params.seed);
  std::bernoulli_distribution inherit(params.p_inherit);
  std::bernoulli_distribution link(params.p_link);
  for (int step = params.n_initial; step < params.n_final; ++step) {
    std::uniform_int_distribution<int> pick(0, g.num_nodes() - 1);
    const int original = pick(rng);
    const int copy = g.add_node();
    // Snapshot: the copy's own edges must not feed back into the loop.
    const std::vector<int> outs = g.out_neighbors(original);
    const std::vector<int> ins = g.in_neighbors(original);
    for (int w : outs) {
      if (inherit(rng)) g.add_edge(copy, w);
    }
    for (int w : ins) {
      if (inherit(rng)) g.add_edge(w, copy);
    }
    if (link(rng)) g.add_edge(copy, original);
  }
  return g;
}

DirectedGraph generate_chain(int n) {
  if (n < 2) throw GraphError("chain needs n >= 2");
  DirectedGraph g(n);
  for (int i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1);
  return g;
}

DirectedGraph generate_cycle(int n) {
  DirectedGraph g = generate_chain(n);
  g.add_edge(n - 1, 0);
  return g;
}

DirectedGraph generate_transitive_chain(int n) {
  if (n < 2) throw GraphError("transitive chain needs n >= 2");
  DirectedGraph g(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) g.add_edge(i, j);
  }
  return g;
}

DirectedGraph generate_common_neighbors(int n_pred, int n_succ) {
  if (n_pred < 1 || n_succ < 1) {
    throw GraphError("common-neighbor graph needs predecessors and successors");
  }
  DirectedGraph g(2 + n_pred + n_succ);
  for (int i = 0; i < n_pred; ++i) {
    g.add_edge(2 + i, 0);
    g.add_edge(2 + i, 1);
  }
  for (int i = 0; i < n_succ; ++i) {
    g.add_edge(0, 2 + n_pred + i);
    g.add_edge(1, 2 + n_pred + i);
  }
  return g;
}

bool is_dag(const DirectedGraph& graph) {
  const auto n = static_cast<std::size_t>(graph.num_nodes());
  std::vector<int> indegree(n, 0);
  for (const Edge& e : graph.edges()) {
    ++indegree[static_cast<std::size_t>(e.target)];
  }
  std::queue<int> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.push(static_cast<int>(i));
  }
  std::size_t visited = 0;
  while (!ready.empty()) {
    const int u = ready.front();
    ready.pop();
    ++visited;
    for (int v : graph.out_neighbors(u)) {
      if (--indegree[static_cast<std::size_t>(v)] == 0) ready.push(v);
    }
  }
  return visited == n;
}

EdgeListLoad load_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw GraphError("cannot open edge list " + path.string());

  std::unordered_map<std::string, int> ids;
  std::vector<std::string> names;
  std::vector<Edge> edges;
  auto intern = [&](const std::string& name) {
    auto [it, inserted] = ids.try_emplace(name, static_cast<int>(names.size()));
    if (inserted) names.push_back(name);
    return it->second;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.starts_with(kNodeDirective)) {
      const std::string name = line.substr(kNodeDirective.size());
      if (!name.empty()) intern(name);
      continue;
    }
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size() ||
        line.find('\t', tab + 1) != std::string::npos) {
      throw GraphError(path.string() + ":" + std::to_string(line_no) +
                       ": expected 'source<TAB>target'");
    }
    const std::string source = line.substr(0, tab);
    const std::string target = line.substr(tab + 1);
    if (source == target) {
      throw GraphError(path.string() + ":" + std::to_string(line_no) +
                       ": self-loop on '" + source + "'");
    }
    const int u = intern(source);
    const int v = intern(target);
    edges.push_back({u, v});
  }
  if (edges.empty()) throw GraphError("edge list " + path.string() + " is empty");

  EdgeListLoad result;
  result.graph = DirectedGraph(static_cast<int>(names.size()));
  for (const Edge& e : edges) {
    if (!result.graph.add_edge(e.source, e.target)) ++result.duplicate_count;
  }
  result.graph.set_node_names(std::move(names));
  return result;
}

void save_edge_list(const DirectedGraph& graph,
                    const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw GraphError("cannot write edge list " + path.string());
  for (const Edge& e : graph.edges()) {
    out << graph.node_label(e.source) << '\t' << graph.node_label(e.target)
        << '\n';
  }
  for (int v = 0; v < graph.num_nodes(); ++v) {
    if (graph.out_neighbors(v).empty() && graph.in_neighbors(v).empty()) {
      out << kNodeDirective << graph.node_label(v) << '\n';
    }
  }
  if (!out) throw GraphError("failed writing " + path.string());
}

SplitDataset split(const DirectedGraph& graph, double train_frac,
                   double valid_frac, std::uint64_t seed) {
  if (!(train_frac > 0.0 && train_frac < 1.0) ||
      !(valid_frac >= 0.0 && valid_frac < 1.0) ||
      train_frac + valid_frac > 1.0) {
    throw GraphError("split fractions must satisfy 0 < train, 0 <= valid, "
                     "train + valid <= 1");
  }
  const std::size_t total = graph.num_edges();
  const auto n_train =
      static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(total)));
  const auto n_valid =
      static_cast<std::size_t>(std::llround(valid_frac * static_cast<double>(total)));
  if (n_train == 0 || n_train + n_valid >= total ||
      (valid_frac > 0.0 && n_valid == 0)) {
    throw GraphError("degenerate split: " + std::to_string(total) +
                     " edges cannot fill every part");
  }
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  SplitDataset out;
  out.split_seed = seed;
  for (std::size_t i = 0; i < total; ++i) {
    const Edge& e = graph.edges()[order[i]];
    if (i < n_train) {
      out.train_pos.push_back(e);
    } else if (i < n_train + n_valid) {
      out.valid_pos.push_back(e);
    } else {
      out.test_pos.push_back(e);
    }
  }
  return out;
}

std::vector<Edge> sample_negatives(const DirectedGraph& graph,
                                   const std::vector<Edge>& anchors, int ratio,
                                   std::mt19937_64& rng, bool allow_repeats) {
  if (ratio < 1) throw GraphError("negative sampling ratio must be >= 1");
  const int n = graph.num_nodes();
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::vector<Edge> out;
  out.reserve(anchors.size() * static_cast<std::size_t>(ratio));
  std::unordered_set<std::uint64_t> drawn;
  // Distinct pairs drawn so far per source; once a source has used up all
  // of its non-targets, repeats are the only option left.
  std::unordered_map<int, std::size_t> distinct_per_source;
  for (const Edge& anchor : anchors) {
    const int u = anchor.source;
    const auto free_targets =
        static_cast<std::size_t>(n - 1) - graph.out_neighbors(u).size();
    if (free_targets == 0) {
      throw GraphError("node " + std::to_string(u) +
                       " has no non-neighbor to sample: graph too dense");
    }
    for (int slot = 0; slot < ratio; ++slot) {
      bool found = false;
      for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
        const int w = pick(rng);
        if (w == u || graph.has_edge(u, w)) continue;
        if (!allow_repeats) {
          const std::uint64_t k =
              (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
              static_cast<std::uint32_t>(w);
          std::size_t& used = distinct_per_source[u];
          if (used < free_targets) {
            if (!drawn.insert(k).second) continue;
            ++used;
          }
        }
        out.push_back({u, w});
        found = true;
        break;
      }
      if (!found) {
        throw GraphError("negative sampling failed after " +
                         std::to_string(kMaxRejections) +
                         " attempts: graph too dense");
      }
    }
  }
  return out;
}

std::vector<Edge> sample_negatives(const DirectedGraph& graph,
                                   const std::vector<Edge>& anchors, int ratio,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_negatives(graph, anchors, ratio, rng);
}

SplitDataset make_dataset(const DirectedGraph& graph, double train_frac,
                          double valid_frac, int neg_ratio,
                          std::uint64_t seed) {
  SplitDataset data = split(graph, train_frac, valid_frac, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  data.test_neg = sample_negatives(graph, data.test_pos, neg_ratio, rng);
  if (!data.valid_pos.empty()) {
    data.valid_neg = sample_negatives(graph, data.valid_pos, neg_ratio, rng);
  }
  return data;
}

}  // namespace spacetime
