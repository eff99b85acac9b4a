#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "spacetime/experiments.hpp"
#include "spacetime/optimizer.hpp"

using namespace spacetime;

namespace {

TfdParams tfd_params(double tau1, double tau2, double alpha) {
  TfdParams p;
  p.tau1 = tau1;
  p.tau2 = tau2;
  p.alpha = alpha;
  return p;
}

double worst_grad_error(const ManifoldSpec& spec, const Likelihood& lik,
                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vector p = random_point(spec, 1.0, rng);
    const Vector q = random_point(spec, 1.0, rng);
    for (auto label : {EdgeLabel::kPositive, EdgeLabel::kNegative}) {
      worst = std::max(worst, grad_check(spec, lik, p, q, label));
    }
  }
  return worst;
}

}  // namespace

TEST(Optimizer, LearningRateSchedule) {
  TrainConfig cfg;
  cfg.lr = 0.1;
  cfg.epochs = 101;
  cfg.burnin_epochs = 10;
  EXPECT_DOUBLE_EQ(epoch_lr(cfg, 0), 0.001);
  EXPECT_DOUBLE_EQ(epoch_lr(cfg, 9), 0.001);
  EXPECT_DOUBLE_EQ(epoch_lr(cfg, 10), 0.1);
  EXPECT_DOUBLE_EQ(epoch_lr(cfg, 55), 0.0625);
  EXPECT_DOUBLE_EQ(epoch_lr(cfg, 100), 0.025);
  EXPECT_THROW(epoch_lr(cfg, 101), TrainingError);
}

TEST(Optimizer, GradCheckFlat) {
  const auto lik = Likelihood::make_tfd(tfd_params(0.4, 0.3, 0.1));
  EXPECT_LT(worst_grad_error(ManifoldSpec(ManifoldKind::kMinkowski, 3), lik, 1),
            1e-5);
  FdParams fd;
  fd.tau = 0.5;
  EXPECT_LT(worst_grad_error(ManifoldSpec(ManifoldKind::kEuclidean, 3),
                             Likelihood::make_fd(fd), 2),
            1e-5);
}

TEST(Optimizer, GradCheckAds) {
  const ManifoldSpec ads(ManifoldKind::kAntiDeSitter, 3);
  TfdParams t = tfd_params(0.4, 0.3, 0.1);
  t.k = calibrate_k(t, ads);
  EXPECT_LT(worst_grad_error(ads, Likelihood::make_wrapped_tfd(t), 3), 1e-4);
}

TEST(Optimizer, CoincidentEuclideanPointsHaveZeroGradient) {
  const ManifoldSpec e(ManifoldKind::kEuclidean, 3);
  FdParams fd;
  const Vector p{0.1, -0.2, 0.3};
  Vector gp(3, 0.0), gq(3, 0.0);
  edge_loss_gradient(e, Likelihood::make_fd(fd), p, p, EdgeLabel::kPositive, 1.0,
                     gp, gq);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(gp[i], 0.0);
    EXPECT_EQ(gq[i], 0.0);
  }
}

TEST(Optimizer, ZeroEpochsKeepsInitialisation) {
  const ManifoldSpec spec(ManifoldKind::kAntiDeSitter, 2);
  TrainConfig cfg;
  cfg.epochs = 0;
  cfg.seed = 17;
  const auto g = generate_cycle(5);
  const TrainResult r = train(g.edges(), 5, spec,
                              Likelihood::make_tfd(tfd_params(0.4, 0.1, 0.1)), cfg);
  std::mt19937_64 rng(17);
  EXPECT_EQ(r.table, EmbeddingTable::random(spec, 5, cfg.init_scale, rng));
  EXPECT_TRUE(r.trace.empty());
}

TEST(Optimizer, SingleEdgePointsIntoTheFuture) {
  const ManifoldSpec spec(ManifoldKind::kMinkowski, 1);
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.batch_size = 1;
  cfg.seed = 5;
  const TrainResult r = train({Edge{0, 1}}, 2, spec,
                              Likelihood::make_tfd(tfd_params(0.4, 0.07, 0.09)), cfg);
  EXPECT_GT(time_delta(spec, r.table.point(0), r.table.point(1)), 0.0);
}

TEST(Optimizer, CycleOnCylinderSeparatesEdges) {
  ModelSetup m = dupdiv_setup(ManifoldKind::kCylindricalMinkowski, 2);
  m.train.epochs = 300;
  const auto g = generate_cycle(5);
  const ToyRun run = train_toy(g, m, 0);
  double pos = 0.0, neg = 0.0;
  for (const auto& e : run.pairs) (e.positive ? pos : neg) += e.probability;
  EXPECT_GT(pos / 5, neg / 15);
}

TEST(Optimizer, DeterministicTrace) {
  DupDivParams p;
  p.n_final = 40;
  const auto g = generate_duplication_divergence(p);
  ModelSetup m = dupdiv_setup(ManifoldKind::kAntiDeSitter, 4);
  m.train.epochs = 15;
  const Likelihood lik = resolve_likelihood(m);
  const TrainResult a = train(g.edges(), g.num_nodes(), m.spec, lik, m.train);
  const TrainResult b = train(g.edges(), g.num_nodes(), m.spec, lik, m.train);
  ASSERT_EQ(a.trace.size(), 15u);
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    EXPECT_EQ(a.trace[i].mean_nll, b.trace[i].mean_nll);
  }
  EXPECT_EQ(a.table, b.table);
  EXPECT_LE(a.table.max_quadric_residual(), 1e-12);
}

TEST(Optimizer, ConfigValidation) {
  TrainConfig cfg;
  cfg.lr = 0.0;
  EXPECT_THROW(cfg.validate(), TrainingError);
  cfg = TrainConfig{};
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), TrainingError);
  cfg = TrainConfig{};
  EXPECT_THROW(train({}, 3, ManifoldSpec(ManifoldKind::kEuclidean, 2),
                     Likelihood::make_fd(FdParams{}), cfg),
               TrainingError);
}

TEST(Optimizer, CheckpointRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path();
  for (const ManifoldSpec& spec :
       {ManifoldSpec(ManifoldKind::kCylindricalMinkowski, 2, 10.0),
        ManifoldSpec(ManifoldKind::kAntiDeSitter, 3)}) {
    std::mt19937_64 rng(8);
    const EmbeddingTable t = EmbeddingTable::random(spec, 7, 1.0, rng);
    save_checkpoint(t, dir / "st_ckpt.tsv");
    EXPECT_EQ(load_checkpoint(dir / "st_ckpt.tsv"), t);
  }
  std::ofstream(dir / "st_bad.tsv") << "not a checkpoint\n";
  EXPECT_THROW(load_checkpoint(dir / "st_bad.tsv"), TrainingError);
}
