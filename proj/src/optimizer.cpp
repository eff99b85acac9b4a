#include "spacetime/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "spacetime/text_format.hpp"

namespace spacetime {

namespace {

constexpr double kDivergenceBound = 1e6;
constexpr double kFiniteDifferenceStep = 1e-5;
// Gradients smaller than this are compared in absolute terms.
constexpr double kGradCheckFloor = 1e-6;

// Scratch buffers for one edge evaluation.
struct EdgeWorkspace {
  std::vector<IntervalImage> images;
  std::vector<ImageWeight> weights;

  void resize(std::size_t count) {
    images.resize(count);
    weights.resize(count);
  }
};

double edge_loss_gradient_impl(const ManifoldSpec& spec,
                               const Likelihood& likelihood, ConstCoords p,
                               ConstCoords q, EdgeLabel label, double scale,
                               Coords grad_p, Coords grad_q,
                               EdgeWorkspace& ws) {
  interval_images(spec, p, q, likelihood.wrap_m(), ws.images);
  const double loss = edge_loss(likelihood, ws.images, label, ws.weights);
  for (auto& w : ws.weights) {
    w.d_s_sq *= scale;
    w.d_dt *= scale;
  }
  pullback_interval(spec, p, q, ws.weights, grad_p, grad_q);
  return loss;
}

double edge_loss_only(const ManifoldSpec& spec, const Likelihood& likelihood,
                      ConstCoords p, ConstCoords q, EdgeLabel label) {
  const auto images = interval_images(spec, p, q, likelihood.wrap_m());
  std::vector<ImageWeight> weights(images.size());
  return edge_loss(likelihood, images, label, weights);
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw TrainingError("learning rate must be > 0");
  if (epochs < 0 || burnin_epochs < 0) {
    throw TrainingError("epoch counts must be >= 0");
  }
  if (!(burnin_factor > 0.0 && burnin_factor <= 1.0)) {
    throw TrainingError("burnin_factor must lie in (0, 1]");
  }
  if (!(lr_final_fraction > 0.0 && lr_final_fraction <= 1.0)) {
    throw TrainingError("lr_final_fraction must lie in (0, 1]");
  }
  if (batch_size < 1) throw TrainingError("batch_size must be >= 1");
  if (neg_ratio < 1) throw TrainingError("neg_ratio must be >= 1");
  if (!(init_scale > 0.0)) throw TrainingError("init_scale must be > 0");
}

EmbeddingTable::EmbeddingTable(ManifoldSpec spec, int num_nodes)
    : spec_(spec),
      num_nodes_(num_nodes),
      dim_(spec.ambient_dim()),
      coords_(static_cast<std::size_t>(num_nodes) * spec.ambient_dim(), 0.0) {
  if (num_nodes < 0) throw TrainingError("negative node count");
}

EmbeddingTable EmbeddingTable::random(const ManifoldSpec& spec, int num_nodes,
                                      double scale, std::mt19937_64& rng) {
  EmbeddingTable table(spec, num_nodes);
  for (int v = 0; v < num_nodes; ++v) {
    const Vector x = random_point(spec, scale, rng);
    std::copy(x.begin(), x.end(), table.point(v).begin());
  }
  return table;
}

double EmbeddingTable::max_quadric_residual() const {
  double worst = 0.0;
  for (int v = 0; v < num_nodes_; ++v) {
    worst = std::max(worst, std::abs(quadric_residual(spec_, point(v))));
  }
  return worst;
}

double epoch_lr(const TrainConfig& cfg, int epoch_index) {
  if (epoch_index < 0 || epoch_index >= cfg.epochs) {
    throw TrainingError("epoch index " + std::to_string(epoch_index) +
                        " out of range");
  }
  if (epoch_index < cfg.burnin_epochs) return cfg.lr * cfg.burnin_factor;
  const int span = cfg.epochs - 1 - cfg.burnin_epochs;
  const double frac =
      span > 0 ? static_cast<double>(epoch_index - cfg.burnin_epochs) / span
               : 1.0;
  return cfg.lr * (1.0 - frac * (1.0 - cfg.lr_final_fraction));
}

double edge_probability(const ManifoldSpec& spec, const Likelihood& likelihood,
                        ConstCoords p, ConstCoords q) {
  const auto images = interval_images(spec, p, q, likelihood.wrap_m());
  return edge_probability(likelihood, images);
}

double edge_probability(const EmbeddingTable& table,
                        const Likelihood& likelihood, int source, int target) {
  if (source < 0 || source >= table.num_nodes() || target < 0 ||
      target >= table.num_nodes()) {
    throw TrainingError("node id out of range for embedding table");
  }
  return edge_probability(table.spec(), likelihood, table.point(source),
                          table.point(target));
}

double edge_loss_gradient(const ManifoldSpec& spec,
                          const Likelihood& likelihood, ConstCoords p,
                          ConstCoords q, EdgeLabel label, double scale,
                          Coords grad_p, Coords grad_q) {
  EdgeWorkspace ws;
  ws.resize(spec.image_count(likelihood.wrap_m()));
  return edge_loss_gradient_impl(spec, likelihood, p, q, label, scale, grad_p,
                                 grad_q, ws);
}

TrainResult train(const std::vector<Edge>& train_edges, int num_nodes,
                  const ManifoldSpec& spec, const Likelihood& likelihood,
                  const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  std::mt19937_64 init_rng(cfg.seed);
  EmbeddingTable table =
      EmbeddingTable::random(spec, num_nodes, cfg.init_scale, init_rng);
  return train_from(std::move(table), train_edges, likelihood, cfg, on_epoch);
}

TrainResult train_from(EmbeddingTable table,
                       const std::vector<Edge>& train_edges,
                       const Likelihood& likelihood, const TrainConfig& cfg,
                       const EpochCallback& on_epoch) {
  cfg.validate();
  likelihood.validate();
  if (train_edges.empty()) throw TrainingError("no training edges");
  const ManifoldSpec spec = table.spec();
  const int num_nodes = table.num_nodes();
  const DirectedGraph train_graph(num_nodes, train_edges);
  const std::size_t dim = table.dim();

  // Separate stream from initialisation so zero-epoch runs match init.
  std::mt19937_64 rng(cfg.seed ^ 0x5851f42d4c957f2dULL);
  EdgeWorkspace ws;
  ws.resize(spec.image_count(likelihood.wrap_m()));

  Vector grad(static_cast<std::size_t>(num_nodes) * dim, 0.0);
  std::vector<char> touched_flag(static_cast<std::size_t>(num_nodes), 0);
  std::vector<int> touched;
  Vector step(dim);

  std::vector<char> saturated(static_cast<std::size_t>(num_nodes), 0);
  for (int v = 0; v < num_nodes; ++v) {
    saturated[static_cast<std::size_t>(v)] =
        static_cast<int>(train_graph.out_neighbors(v).size()) == num_nodes - 1;
  }
  std::vector<Edge> order(train_edges);
  TrainResult result{table, {}};
  EmbeddingTable& emb = result.table;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = epoch_lr(cfg, epoch);
    std::shuffle(order.begin(), order.end(), rng);
    // Sources that already point at every node have nothing to corrupt.
    std::vector<Edge> corruptible;
    corruptible.reserve(order.size());
    for (const Edge& e : order) {
      if (!saturated[static_cast<std::size_t>(e.source)]) corruptible.push_back(e);
    }
    const std::vector<Edge> negatives = sample_negatives(
        train_graph, corruptible, cfg.neg_ratio, rng, /*allow_repeats=*/true);
    std::size_t next_negative = 0;

    double epoch_loss = 0.0;
    std::size_t epoch_examples = 0;
    const std::size_t n_pos = order.size();
    const auto batch = static_cast<std::size_t>(cfg.batch_size);
    const auto ratio = static_cast<std::size_t>(cfg.neg_ratio);
    for (std::size_t start = 0; start < n_pos; start += batch) {
      const std::size_t stop = std::min(n_pos, start + batch);
      std::size_t examples = 0;
      for (std::size_t i = start; i < stop; ++i) {
        examples += saturated[static_cast<std::size_t>(order[i].source)] ? 1 : 1 + ratio;
      }
      const double scale = cfg.reduction == LossReduction::kMean
                               ? 1.0 / static_cast<double>(examples)
                               : 1.0;
      auto touch = [&](int v) {
        if (!touched_flag[static_cast<std::size_t>(v)]) {
          touched_flag[static_cast<std::size_t>(v)] = 1;
          touched.push_back(v);
        }
      };
      auto accumulate = [&](const Edge& e, EdgeLabel label) {
        touch(e.source);
        touch(e.target);
        Coords gp(grad.data() + static_cast<std::size_t>(e.source) * dim, dim);
        Coords gq(grad.data() + static_cast<std::size_t>(e.target) * dim, dim);
        const double loss = edge_loss_gradient_impl(
            spec, likelihood, emb.point(e.source), emb.point(e.target), label,
            scale, gp, gq, ws);
        if (!std::isfinite(loss)) {
          std::ostringstream msg;
          msg << "non-finite loss at epoch " << epoch << ", batch "
              << start / batch;
          throw TrainingError(msg.str());
        }
        epoch_loss += loss;
        ++epoch_examples;
      };
      for (std::size_t i = start; i < stop; ++i) {
        accumulate(order[i], EdgeLabel::kPositive);
        if (saturated[static_cast<std::size_t>(order[i].source)]) continue;
        for (std::size_t j = 0; j < ratio; ++j) {
          accumulate(negatives[next_negative++], EdgeLabel::kNegative);
        }
      }

      std::sort(touched.begin(), touched.end());
      for (int v : touched) {
        const auto off = static_cast<std::size_t>(v) * dim;
        Coords g(grad.data() + off, dim);
        Coords x = emb.point(v);
        Vector tangent = descent_tangent(spec, x, g);
        for (std::size_t i = 0; i < dim; ++i) step[i] = -lr * tangent[i];
        exp_map_inplace(spec, x, step);
        project_point_inplace(spec, x);
        for (std::size_t i = 0; i < dim; ++i) {
          if (!(std::abs(x[i]) <= kDivergenceBound)) {
            std::ostringstream msg;
            msg << "embedding diverged at epoch " << epoch << ", batch "
                << start / batch << " (node " << v << ")";
            throw TrainingError(msg.str());
          }
        }
        std::fill(g.begin(), g.end(), 0.0);
        touched_flag[static_cast<std::size_t>(v)] = 0;
      }
      touched.clear();
    }
    result.trace.push_back(
        {epoch, lr, epoch_loss / static_cast<double>(epoch_examples)});
    if (on_epoch) on_epoch(epoch, emb);
  }
  return result;
}

double grad_check(const ManifoldSpec& spec, const Likelihood& likelihood,
                  ConstCoords p, ConstCoords q, EdgeLabel label) {
  const std::size_t dim = spec.ambient_dim();
  Vector grad_p(dim, 0.0);
  Vector grad_q(dim, 0.0);
  edge_loss_gradient(spec, likelihood, p, q, label, 1.0, grad_p, grad_q);

  const double h = kFiniteDifferenceStep;
  double worst = 0.0;
  auto check_side = [&](bool move_p) {
    ConstCoords base = move_p ? p : q;
    const Vector& grad = move_p ? grad_p : grad_q;
    for (std::size_t i = 0; i < dim; ++i) {
      Vector axis(dim, 0.0);
      axis[i] = 1.0;
      // On quadrics only tangent directions keep the point on the surface.
      const Vector dir =
          spec.is_quadric() ? tangent_projection(spec, base, axis) : axis;
      double analytic = 0.0;
      for (std::size_t j = 0; j < dim; ++j) analytic += grad[j] * dir[j];

      Vector plus_dir(dir);
      Vector minus_dir(dir);
      for (std::size_t j = 0; j < dim; ++j) {
        plus_dir[j] *= h;
        minus_dir[j] *= -h;
      }
      Vector plus(base.begin(), base.end());
      Vector minus(base.begin(), base.end());
      if (spec.is_quadric()) {
        plus = exp_map(spec, base, plus_dir);
        minus = exp_map(spec, base, minus_dir);
      } else {
        for (std::size_t j = 0; j < dim; ++j) {
          plus[j] += plus_dir[j];
          minus[j] += minus_dir[j];
        }
      }
      const double f_plus = move_p ? edge_loss_only(spec, likelihood, plus, q, label)
                                   : edge_loss_only(spec, likelihood, p, plus, label);
      const double f_minus = move_p ? edge_loss_only(spec, likelihood, minus, q, label)
                                    : edge_loss_only(spec, likelihood, p, minus, label);
      const double numeric = (f_plus - f_minus) / (2.0 * h);
      const double denom =
          std::max({std::abs(analytic), std::abs(numeric), kGradCheckFloor});
      worst = std::max(worst, std::abs(analytic - numeric) / denom);
    }
  };
  check_side(true);
  check_side(false);
  return worst;
}

void save_checkpoint(const EmbeddingTable& table,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw TrainingError("cannot write checkpoint " + path.string());
  const ManifoldSpec& spec = table.spec();
  out << "#spacetime-checkpoint v1\n";
  out << "kind\t" << to_string(spec.kind()) << "\n";
  out << "spatial_dim\t" << spec.spatial_dim() << "\n";
  if (spec.has_circumference()) {
    out << "circumference\t" << format_double(spec.circumference()) << "\n";
  }
  out << "nodes\t" << table.num_nodes() << "\n";
  for (int v = 0; v < table.num_nodes(); ++v) {
    const auto x = table.point(v);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (i) out << '\t';
      out << format_double(x[i]);
    }
    out << '\n';
  }
  if (!out) throw TrainingError("failed writing checkpoint " + path.string());
}

EmbeddingTable load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TrainingError("cannot open checkpoint " + path.string());
  auto fail = [&](int line, const std::string& what) -> TrainingError {
    return TrainingError(path.string() + ":" + std::to_string(line) + ": " +
                         what);
  };
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line) || line != "#spacetime-checkpoint v1") {
    throw fail(1, "missing checkpoint header");
  }
  ++line_no;
  std::optional<ManifoldKind> kind;
  std::optional<int> spatial_dim;
  std::optional<double> circumference;
  std::optional<int> nodes;
  while (!nodes && std::getline(in, line)) {
    ++line_no;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw fail(line_no, "expected key<TAB>value");
    const std::string key = line.substr(0, tab);
    const std::string value = line.substr(tab + 1);
    try {
      if (key == "kind") {
        kind = parse_manifold_kind(value);
      } else if (key == "spatial_dim") {
        spatial_dim = std::stoi(value);
      } else if (key == "circumference") {
        circumference = parse_double(value);
      } else if (key == "nodes") {
        nodes = std::stoi(value);
      } else {
        throw fail(line_no, "unknown key '" + key + "'");
      }
    } catch (const TrainingError&) {
      throw;
    } catch (const std::exception& e) {
      throw fail(line_no, e.what());
    }
  }
  if (!kind || !spatial_dim || !nodes) {
    throw fail(line_no, "incomplete checkpoint header");
  }
  EmbeddingTable table(ManifoldSpec(*kind, *spatial_dim, circumference),
                       *nodes);
  for (int v = 0; v < *nodes; ++v) {
    if (!std::getline(in, line)) throw fail(line_no, "truncated checkpoint");
    ++line_no;
    auto x = table.point(v);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto end = line.find('\t', pos);
      const bool last = i + 1 == x.size();
      if (last != (end == std::string::npos)) {
        throw fail(line_no, "expected " + std::to_string(x.size()) +
                                " coordinates");
      }
      try {
        x[i] = parse_double(std::string_view(line).substr(
            pos, last ? std::string::npos : end - pos));
      } catch (const std::invalid_argument& e) {
        throw fail(line_no, e.what());
      }
      pos = end + 1;
    }
  }
  return table;
}

}  // namespace spacetime
