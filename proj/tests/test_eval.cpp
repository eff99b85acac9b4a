#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "spacetime/eval.hpp"
#include "spacetime/experiments.hpp"

using namespace spacetime;

TEST(Eval, AveragePrecision) {
  const std::vector<Scored> perfect{{0.9, true}, {0.1, false}};
  EXPECT_DOUBLE_EQ(average_precision(perfect), 1.0);
  const std::vector<Scored> inverted{{0.1, true}, {0.9, false}};
  EXPECT_DOUBLE_EQ(average_precision(inverted), 0.5);
  const std::vector<Scored> none{{0.1, false}};
  EXPECT_THROW(average_precision(none), EvalError);
}

TEST(Eval, AveragePrecisionOfRandomScores) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u;
  std::vector<Scored> s;
  for (int i = 0; i < 10000; ++i) s.push_back({u(rng), i % 5 == 0});
  EXPECT_NEAR(average_precision(s), 0.20, 0.02);
}

TEST(Eval, BestF1) {
  const std::vector<Scored> sep{{0.1, false}, {0.2, false}, {0.8, true}, {0.9, true}};
  const F1Choice a = best_f1_threshold(sep);
  EXPECT_DOUBLE_EQ(a.f1, 1.0);
  EXPECT_DOUBLE_EQ(a.threshold, 0.5);

  const std::vector<Scored> flat{{0.5, true}, {0.5, false}, {0.5, true}, {0.5, false}};
  const F1Choice b = best_f1_threshold(flat);
  EXPECT_NEAR(b.f1, 2.0 / 3.0, 1e-15);
  EXPECT_EQ(b.threshold, -std::numeric_limits<double>::infinity());

  const std::vector<Scored> three{{0.9, true}, {0.8, true}, {0.7, false}};
  const F1Choice c = best_f1_threshold(three);
  EXPECT_DOUBLE_EQ(c.f1, 1.0);
  EXPECT_GT(c.threshold, 0.7);
  EXPECT_LT(c.threshold, 0.8);
  EXPECT_DOUBLE_EQ(f1_at(three, c.threshold), 1.0);
}

TEST(Eval, RandomEmbeddingsGiveBaselineAp) {
  std::vector<double> aps;
  for (int s = 0; s < 5; ++s) {
    DupDivParams p;
    p.seed = s;
    const auto g = generate_duplication_divergence(p);
    const auto data = make_dataset(g, 0.85, 0.0, 4, s);
    ModelSetup m = dupdiv_setup(ManifoldKind::kMinkowski, 10);
    m.train.seed = s;
    aps.push_back(random_baseline(data, g.num_nodes(), m).average_precision);
  }
  EXPECT_NEAR(median(aps), 0.20, 0.03);
}

TEST(Eval, EvaluateIsDeterministic) {
  const auto g = generate_cycle(20);
  const auto data = make_dataset(g, 0.85, 0.0, 4, 2);
  std::mt19937_64 rng(2);
  const ManifoldSpec spec(ManifoldKind::kMinkowski, 2);
  const auto table = EmbeddingTable::random(spec, 20, 1.0, rng);
  TfdParams t;
  const auto lik = Likelihood::make_tfd(t);
  const Metrics a = evaluate(table, lik, data);
  const Metrics b = evaluate(table, lik, data);
  EXPECT_EQ(a.average_precision, b.average_precision);
  EXPECT_EQ(a.test_nll, b.test_nll);
  EXPECT_EQ(a.f1, b.f1);
  EXPECT_TRUE(a.in_sample_threshold);
  EXPECT_EQ(a.per_edge.size(), 5 * data.test_pos.size());
}

TEST(Eval, PerfectScoresGiveUnitAp) {
  // Two far-apart clusters on a Euclidean line: the edge stays inside one.
  const ManifoldSpec spec(ManifoldKind::kEuclidean, 1);
  EmbeddingTable table(spec, 4);
  table.point(0)[0] = 0.0;
  table.point(1)[0] = 0.0;
  table.point(2)[0] = 100.0;
  table.point(3)[0] = 200.0;
  FdParams fd;
  fd.tau = 0.01;
  fd.r = 1.0;
  SplitDataset d;
  d.test_pos = {{0, 1}};
  d.test_neg = {{0, 2}, {0, 3}, {1, 2}, {1, 3}};
  const Metrics m = evaluate(table, Likelihood::make_fd(fd), d);
  EXPECT_DOUBLE_EQ(m.average_precision, 1.0);
  EXPECT_LT(m.test_nll, 1e-9);
}

TEST(Eval, Heatmap) {
  TfdParams t;
  t.tau1 = 0.4;
  t.tau2 = 0.07;
  t.alpha = 0.075;
  const ManifoldSpec mink(ManifoldKind::kMinkowski, 1);
  const auto cells = heatmap(Likelihood::make_tfd(t), mink, HeatmapBounds{}, 3);
  ASSERT_EQ(cells.size(), 9u);
  EXPECT_NEAR(cells[4].prob, 0.5, 1e-12);  // q = p

  const auto fine = heatmap(Likelihood::make_tfd(t), mink, HeatmapBounds{}, 41);
  const auto best = std::max_element(fine.begin(), fine.end(),
                                     [](auto& a, auto& b) { return a.prob < b.prob; });
  EXPECT_GT(best->x0, 0.0);

  FdParams f1;
  f1.tau = 0.4;
  const auto sym = heatmap(Likelihood::make_fd(f1), mink, HeatmapBounds{}, 11);
  for (int i = 0; i < 11; ++i)
    for (int j = 0; j < 11; ++j)
      EXPECT_DOUBLE_EQ(sym[i * 11 + j].prob, sym[(10 - i) * 11 + j].prob);

  const auto path = std::filesystem::temp_directory_path() / "st_heat.csv";
  write_heatmap_csv(cells, path);
  std::ifstream in(path);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 10);

  EXPECT_THROW(heatmap(Likelihood::make_tfd(t), ManifoldSpec(ManifoldKind::kMinkowski, 2),
                       HeatmapBounds{}, 3),
               EvalError);
}

TEST(Eval, DiskBoundary) {
  for (double tau : {0.05, 1.0}) {
    const DiskCheckResult r = disk_boundary_check(tau, tau, 10000, 1);
    EXPECT_EQ(r.violations, 0);
    EXPECT_EQ(r.containment_violations, 0);
    EXPECT_EQ(r.samples, 10000);
  }
}
