#include "spacetime/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "spacetime/text_format.hpp"

namespace spacetime {

namespace {

constexpr double kBoundaryBand = 1e-9;

double f1_from_counts(std::size_t tp, std::size_t predicted,
                      std::size_t positives) {
  if (tp == 0) return 0.0;
  const double precision = static_cast<double>(tp) / predicted;
  const double recall = static_cast<double>(tp) / positives;
  return 2.0 * precision * recall / (precision + recall);
}

std::vector<Scored> as_scored(const std::vector<ScoredEdge>& edges) {
  std::vector<Scored> out;
  out.reserve(edges.size());
  for (const auto& e : edges) out.push_back({e.probability, e.positive});
  return out;
}

}  // namespace

double average_precision(std::span<const Scored> scored) {
  std::vector<std::size_t> order(scored.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scored[a].score > scored[b].score;
  });
  std::size_t positives = 0;
  for (const auto& s : scored) positives += s.positive ? 1 : 0;
  if (positives == 0) throw EvalError("average precision needs a positive");

  double ap = 0.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (!scored[order[k]].positive) continue;
    ++hits;
    ap += static_cast<double>(hits) / static_cast<double>(k + 1);
  }
  return ap / static_cast<double>(positives);
}

double f1_at(std::span<const Scored> scored, double threshold) {
  std::size_t tp = 0, predicted = 0, positives = 0;
  for (const auto& s : scored) {
    positives += s.positive;
    if (s.score > threshold) {
      ++predicted;
      tp += s.positive;
    }
  }
  return f1_from_counts(tp, predicted, positives);
}

F1Choice best_f1_threshold(std::span<const Scored> scored) {
  std::vector<Scored> sorted(scored.begin(), scored.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const Scored& a, const Scored& b) { return a.score < b.score; });
  const std::size_t n = sorted.size();
  std::size_t positives = 0;
  for (const auto& s : sorted) positives += s.positive;
  if (positives == 0 || positives == n) {
    throw EvalError("F1 threshold search needs both classes");
  }

  // Walking upward, the candidate before index i predicts sorted[i..n) as
  // positive.
  std::size_t tp = positives;
  F1Choice best{-std::numeric_limits<double>::infinity(),
                f1_from_counts(positives, n, positives)};
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && sorted[j].score == sorted[i].score) {
      tp -= sorted[j].positive;
      ++j;
    }
    double threshold;
    if (j == n) {
      threshold = std::numeric_limits<double>::infinity();
    } else {
      const double lo = sorted[i].score;
      const double hi = sorted[j].score;
      threshold = lo + (hi - lo) / 2.0;
      if (!(threshold < hi)) threshold = lo;
    }
    const double f1 = f1_from_counts(tp, n - j, positives);
    if (f1 > best.f1) best = {threshold, f1};
    i = j;
  }
  return best;
}

std::vector<ScoredEdge> score_edges(const EmbeddingTable& table,
                                    const Likelihood& likelihood,
                                    const std::vector<Edge>& edges,
                                    bool positive) {
  std::vector<ScoredEdge> out;
  out.reserve(edges.size());
  for (const auto& e : edges) {
    out.push_back({e.source, e.target, positive,
                   edge_probability(table, likelihood, e.source, e.target)});
  }
  return out;
}

Metrics evaluate(const EmbeddingTable& table, const Likelihood& likelihood,
                 const SplitDataset& dataset) {
  if (dataset.test_pos.empty()) throw EvalError("empty test set");
  Metrics m;
  m.per_edge = score_edges(table, likelihood, dataset.test_pos, true);
  const auto neg = score_edges(table, likelihood, dataset.test_neg, false);
  m.per_edge.insert(m.per_edge.end(), neg.begin(), neg.end());

  const std::vector<Scored> test = as_scored(m.per_edge);
  m.average_precision = average_precision(test);
  double nll = 0.0;
  for (const auto& e : m.per_edge) {
    nll += edge_nll(e.probability,
                    e.positive ? EdgeLabel::kPositive : EdgeLabel::kNegative);
  }
  m.test_nll = nll / static_cast<double>(m.per_edge.size());

  if (!dataset.valid_pos.empty() && !dataset.valid_neg.empty()) {
    auto valid = score_edges(table, likelihood, dataset.valid_pos, true);
    const auto vneg = score_edges(table, likelihood, dataset.valid_neg, false);
    valid.insert(valid.end(), vneg.begin(), vneg.end());
    const auto vs = as_scored(valid);
    m.f1_threshold = best_f1_threshold(vs).threshold;
    m.f1 = f1_at(test, m.f1_threshold);
  } else if (!dataset.test_neg.empty()) {
    const F1Choice choice = best_f1_threshold(test);
    m.f1_threshold = choice.threshold;
    m.f1 = choice.f1;
    m.in_sample_threshold = true;
  } else {
    throw EvalError("evaluation needs negative test edges");
  }
  return m;
}

std::vector<HeatmapCell> heatmap(const Likelihood& likelihood,
                                 const ManifoldSpec& spec,
                                 const HeatmapBounds& bounds, int resolution) {
  if (spec.ambient_dim() != 2 || (spec.kind() != ManifoldKind::kMinkowski &&
                                  spec.kind() != ManifoldKind::kEuclidean)) {
    throw EvalError("heatmap needs a 2-coordinate Minkowski or Euclidean space");
  }
  if (resolution < 1) throw EvalError("heatmap resolution must be >= 1");
  if (!(bounds.x0_min <= bounds.x0_max && bounds.x1_min <= bounds.x1_max)) {
    throw EvalError("heatmap bounds are inverted");
  }
  auto axis = [resolution](double lo, double hi, int i) {
    if (resolution == 1) return (lo + hi) / 2.0;
    return lo + (hi - lo) * i / (resolution - 1);
  };
  const Vector origin(2, 0.0);
  std::vector<HeatmapCell> cells;
  cells.reserve(static_cast<std::size_t>(resolution) * resolution);
  for (int i = 0; i < resolution; ++i) {
    for (int j = 0; j < resolution; ++j) {
      const Vector q{axis(bounds.x0_min, bounds.x0_max, i),
                     axis(bounds.x1_min, bounds.x1_max, j)};
      cells.push_back({q[0], q[1], edge_probability(spec, likelihood, origin, q)});
    }
  }
  return cells;
}

void write_heatmap_csv(const std::vector<HeatmapCell>& cells,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw EvalError("cannot write " + path.string());
  out << "x0,x1,prob\n";
  for (const auto& c : cells) {
    out << format_double(c.x0) << ',' << format_double(c.x1) << ','
        << format_double(c.prob) << '\n';
  }
  if (!out) throw EvalError("failed writing " + path.string());
}

DiskCheckResult disk_boundary_check(double tau1, double tau2, int num_samples,
                                    std::uint64_t seed) {
  TfdParams params;
  params.tau1 = tau1;
  params.tau2 = tau2;
  params.alpha = 0.0;
  params.r = 0.0;
  params.k = 1.0;
  params.validate();

  auto disk_side = [&](double d, double t) {
    const double e = std::exp(-t / tau2);
    const double ratio = (3.0 - e) / (1.0 + e);
    if (!(ratio > 0.0)) return false;
    return d * d <= tau1 * std::log(ratio) + t * t;
  };

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  DiskCheckResult res;
  for (int i = 0; i < num_samples; ++i) {
    const double d = 5.0 * unit(rng);
    const double t = -5.0 + 10.0 * unit(rng);
    const double f = tfd(params, d * d - t * t, t);
    ++res.samples;
    if (std::abs(f - 0.5) <= kBoundaryBand) {
      ++res.boundary_skipped;
      continue;
    }
    if ((f >= 0.5) != disk_side(d, t)) ++res.violations;
  }
  for (int i = 0; i < num_samples; ++i) {
    const double t = 5.0 * unit(rng);
    const double d = t * unit(rng);
    const double f = tfd(params, d * d - t * t, t);
    ++res.containment_samples;
    if (f < 0.5 - kBoundaryBand) ++res.containment_violations;
  }
  return res;
}

}  // namespace spacetime
