#include "spacetime/experiments.hpp"

#include <algorithm>
#include <stdexcept>

namespace spacetime {

namespace {

TfdParams tfd_params(double tau1, double tau2, double alpha, double r) {
  TfdParams p;
  p.tau1 = tau1;
  p.tau2 = tau2;
  p.alpha = alpha;
  p.r = r;
  return p;
}

FdParams fd_params(double tau, double r) {
  FdParams p;
  p.tau = tau;
  p.r = r;
  return p;
}

TrainConfig train_config(double lr, int batch_size, int epochs) {
  TrainConfig cfg;
  cfg.lr = lr;
  cfg.batch_size = batch_size;
  cfg.epochs = epochs;
  return cfg;
}

// Intrinsic dimension two on every toy manifold.
ManifoldSpec toy_spec(ManifoldKind kind, std::optional<double> c = {}) {
  switch (kind) {
    case ManifoldKind::kEuclidean:
    case ManifoldKind::kCylindricalEuclidean:
      return ManifoldSpec(kind, 2, c);
    case ManifoldKind::kAntiDeSitter:
      return ManifoldSpec(kind, 1, c);
    default:
      return ManifoldSpec(kind, kind == ManifoldKind::kHyperboloid ? 2 : 1, c);
  }
}

}  // namespace

Likelihood resolve_likelihood(const ModelSetup& setup) {
  Likelihood lik = setup.likelihood;
  if (setup.auto_k && lik.kind == LikelihoodKind::kWrappedTfd) {
    lik.tfd.k = calibrate_k(lik.tfd, setup.spec);
  }
  lik.validate();
  return lik;
}

std::vector<ManifoldKind> dupdiv_kinds() {
  return {ManifoldKind::kEuclidean, ManifoldKind::kHyperboloid,
          ManifoldKind::kMinkowski, ManifoldKind::kCylindricalMinkowski,
          ManifoldKind::kAntiDeSitter};
}

ModelSetup dupdiv_setup(ManifoldKind kind, int embedding_dim) {
  ModelSetup s;
  s.name = std::string(to_string(kind));
  switch (kind) {
    case ManifoldKind::kEuclidean:
      s.spec = ManifoldSpec::from_embedding_dim(kind, embedding_dim);
      s.likelihood = Likelihood::make_fd(fd_params(0.4, 0.0));
      s.train = train_config(0.02, 4, 300);
      break;
    case ManifoldKind::kHyperboloid:
      s.spec = ManifoldSpec::from_embedding_dim(kind, embedding_dim);
      s.likelihood = Likelihood::make_fd(fd_params(0.075, 0.0));
      s.train = train_config(0.001, 4, 300);
      break;
    case ManifoldKind::kMinkowski:
      s.spec = ManifoldSpec::from_embedding_dim(kind, embedding_dim);
      s.likelihood = Likelihood::make_tfd(tfd_params(0.075, 0.03, 0.06, 0.0));
      s.train = train_config(0.02, 2, 200);
      break;
    case ManifoldKind::kCylindricalMinkowski:
      s.spec = ManifoldSpec::from_embedding_dim(kind, embedding_dim, 10.0);
      s.likelihood =
          Likelihood::make_wrapped_tfd(tfd_params(0.4, 0.07, 0.09, 0.0));
      s.train = train_config(0.02, 2, 200);
      break;
    case ManifoldKind::kAntiDeSitter:
      s.spec = ManifoldSpec::from_embedding_dim(kind, embedding_dim);
      s.likelihood =
          Likelihood::make_wrapped_tfd(tfd_params(0.4, 0.15, 0.15, -0.1));
      s.train = train_config(0.016, 2, 150);
      break;
    case ManifoldKind::kCylindricalEuclidean:
      throw std::invalid_argument(
          "no duplication-divergence setup for cylindrical_euclidean");
  }
  return s;
}

LinkPredictionResult run_link_prediction(const SplitDataset& data,
                                         int num_nodes,
                                         const ModelSetup& setup,
                                         bool track_epoch_ap) {
  const Likelihood lik = resolve_likelihood(setup);
  LinkPredictionResult out;
  EpochCallback callback;
  if (track_epoch_ap) {
    callback = [&](int epoch, const EmbeddingTable& table) {
      const Metrics m = evaluate(table, lik, data);
      out.epoch_test_ap.push_back(m.average_precision);
      if (out.best_epoch < 0 || m.average_precision > out.best_epoch_ap) {
        out.best_epoch = epoch;
        out.best_epoch_ap = m.average_precision;
      }
    };
  }
  TrainResult trained =
      train(data.train_pos, num_nodes, setup.spec, lik, setup.train, callback);
  out.metrics = evaluate(trained.table, lik, data);
  out.trace = std::move(trained.trace);
  out.table = std::move(trained.table);
  return out;
}

Metrics random_baseline(const SplitDataset& data, int num_nodes,
                        const ModelSetup& setup) {
  std::mt19937_64 rng(setup.train.seed);
  const EmbeddingTable table = EmbeddingTable::random(
      setup.spec, num_nodes, setup.train.init_scale, rng);
  return evaluate(table, resolve_likelihood(setup), data);
}

std::vector<ScoredEdge> score_all_pairs(const EmbeddingTable& table,
                                        const Likelihood& likelihood,
                                        const DirectedGraph& graph) {
  std::vector<ScoredEdge> out;
  const int n = graph.num_nodes();
  out.reserve(static_cast<std::size_t>(n) * (n - 1));
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      if (u == v) continue;
      out.push_back({u, v, graph.has_edge(u, v),
                     edge_probability(table, likelihood, u, v)});
    }
  }
  return out;
}

double summed_nll(const std::vector<ScoredEdge>& pairs) {
  double total = 0.0;
  for (const auto& e : pairs) {
    total += edge_nll(e.probability,
                      e.positive ? EdgeLabel::kPositive : EdgeLabel::kNegative);
  }
  return total;
}

ToyRun train_toy(const DirectedGraph& graph, const ModelSetup& setup,
                 std::uint64_t seed) {
  ToyRun run;
  run.model = setup.name;
  run.seed = seed;
  run.likelihood = resolve_likelihood(setup);
  TrainConfig cfg = setup.train;
  cfg.seed = seed;
  TrainResult trained = train(graph.edges(), graph.num_nodes(), setup.spec,
                              run.likelihood, cfg);
  run.table = std::move(trained.table);
  run.pairs = score_all_pairs(run.table, run.likelihood, graph);
  run.nll = summed_nll(run.pairs);
  return run;
}

std::vector<ModelSetup> cycle_toy_models() {
  std::vector<ModelSetup> models;
  for (ManifoldKind kind : dupdiv_kinds()) {
    // Tuned link-prediction hyperparameters, on 2D manifolds, run long.
    ModelSetup s = dupdiv_setup(kind, 5);
    s.spec = toy_spec(kind, s.spec.has_circumference()
                                ? std::optional<double>(s.spec.circumference())
                                : std::nullopt);
    s.train.epochs = kCycleToyEpochs;
    models.push_back(std::move(s));
  }
  return models;
}

ModelSetup transitivity_toy_model(double alpha) {
  ModelSetup s;
  s.name = "minkowski";
  s.spec = toy_spec(ManifoldKind::kMinkowski);
  s.likelihood = Likelihood::make_tfd(tfd_params(0.4, 0.07, alpha, 0.0));
  s.train = dupdiv_setup(ManifoldKind::kMinkowski, 2).train;
  return s;
}

std::vector<ModelSetup> tripartite_models() {
  std::vector<ModelSetup> models;
  for (ManifoldKind kind : {ManifoldKind::kMinkowski, ManifoldKind::kEuclidean}) {
    ModelSetup s = dupdiv_setup(kind, 2);
    s.spec = toy_spec(kind);
    s.train.epochs = kTripartiteEpochs;
    models.push_back(std::move(s));
  }
  return models;
}

double focal_pair_probability(const ToyRun& run) {
  return 0.5 * (edge_probability(run.table, run.likelihood, 0, 1) +
                edge_probability(run.table, run.likelihood, 1, 0));
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace spacetime
