#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "spacetime/config.hpp"
#include "spacetime/pipeline.hpp"

using namespace spacetime;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Config, DefaultsFollowTunedSetup) {
  const ExperimentConfig c = parse_config({});
  EXPECT_EQ(c.manifold.kind(), ManifoldKind::kCylindricalMinkowski);
  EXPECT_EQ(c.manifold.ambient_dim(), 10u);
  EXPECT_EQ(c.manifold.circumference(), 10.0);
  EXPECT_EQ(c.likelihood.kind, LikelihoodKind::kWrappedTfd);
  EXPECT_EQ(c.likelihood.tfd.tau1, 0.4);
  EXPECT_EQ(c.likelihood.tfd.tau2, 0.07);
  EXPECT_EQ(c.likelihood.tfd.alpha, 0.09);
  EXPECT_EQ(c.train.lr, 0.02);
  EXPECT_EQ(c.train.batch_size, 2);
  EXPECT_EQ(c.train.epochs, 200);
  EXPECT_EQ(c.train.neg_ratio, 4);

  const ExperimentConfig e = parse_config({{"manifold.kind", "euclidean"},
                                           {"manifold.embedding_dim", "5"}});
  EXPECT_EQ(e.likelihood.kind, LikelihoodKind::kFd);
  EXPECT_EQ(e.train.batch_size, 4);
  EXPECT_EQ(e.manifold.ambient_dim(), 5u);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_config({{"train.lrr", "0.1"}}), ConfigError);
  EXPECT_THROW(parse_config({{"train.lr", "fast"}}), ConfigError);
  EXPECT_THROW(parse_config({{"train.lr", "0.1,0.2"}}), ConfigError);
  EXPECT_THROW(parse_config({{"manifold.kind", "sphere"}}), ConfigError);
  EXPECT_THROW(parse_config({{"data.train_frac", "1.0"}}), ConfigError);
  EXPECT_THROW(parse_config({{"data.source", "edge_list"},
                             {"data.edge_list", "/nonexistent/graph.tsv"}}),
               ConfigError);
  RawConfig raw;
  EXPECT_THROW(apply_override(raw, "lr=0.1"), ConfigError);
  apply_override(raw, "train.lr = 0.5");
  EXPECT_EQ(raw.at("train.lr"), "0.5");
}

TEST(Config, RoundTrip) {
  const auto dir = scratch_dir("st_cfg");
  RawConfig raw;
  raw["manifold.kind"] = "ads";
  raw["likelihood.k"] = "0.75";
  raw["train.seed"] = "42";
  raw["data.generator"] = "cycle";
  const ExperimentConfig c = parse_config(raw);
  write_config(c, dir / "a.ini");
  const ExperimentConfig back = parse_config(read_raw_config(dir / "a.ini"));
  EXPECT_EQ(to_raw(back), to_raw(c));
  EXPECT_FALSE(back.auto_k);
  EXPECT_EQ(back.likelihood.tfd.k, 0.75);
}

TEST(Config, SweepGrid) {
  RawConfig raw{{"likelihood.tau1", "0.075, 0.15, 0.4"},
                {"train.lr", "0.01,0.02"}};
  const auto points = expand_sweep(raw);
  ASSERT_EQ(points.size(), 6u);
  EXPECT_EQ(points[0].assignment[0].second, "0.075");
  EXPECT_EQ(points[0].assignment[1].second, "0.01");
  EXPECT_EQ(points[1].assignment[1].second, "0.02");
  EXPECT_EQ(points[5].config.likelihood.tfd.tau1, 0.4);
  EXPECT_EQ(points[5].config.train.lr, 0.02);
  EXPECT_EQ(expand_sweep({}).size(), 1u);
  EXPECT_THROW(expand_sweep({{"train.lr", "0.1,"}}), ConfigError);
}

TEST(Config, SweepRunsTrialsPerPoint) {
  RawConfig raw{{"data.generator", "cycle"},
                {"data.n", "12"},
                {"train.epochs", "5"},
                {"likelihood.tau1", "0.075,0.15,0.4"}};
  const auto rows = run_sweep(expand_sweep(raw), 3, 2);
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.values.size(), 3u);
    EXPECT_EQ(r.metric, "ap");
  }
  EXPECT_GE(rows[0].median, rows[1].median);
  EXPECT_GE(rows[1].median, rows[2].median);

  raw["likelihood.tau1"] = "0.4";
  raw["data.generator"] = "chain";
  const auto one = run_sweep(expand_sweep(raw), 3, 1);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].metric, "f1");
  EXPECT_EQ(one[0].values.size(), 3u);
}

TEST(Config, TrainOutputsAreReproducible) {
  const auto dir = scratch_dir("st_train");
  RawConfig raw{{"data.generator", "cycle"}, {"data.n", "5"},
                {"output.dir", (dir / "a").string()}};
  const ExperimentConfig c = parse_config(raw);
  write_train_outputs(c, run_pipeline(c));
  for (const char* f : {"checkpoint.tsv", "loss.csv", "metrics.json",
                        "predictions.csv", "effective_config.ini"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / "a" / f)) << f;
  }
  RawConfig again = read_raw_config(dir / "a" / "effective_config.ini");
  again["output.dir"] = (dir / "b").string();
  const ExperimentConfig c2 = parse_config(again);
  write_train_outputs(c2, run_pipeline(c2));
  EXPECT_EQ(slurp(dir / "a" / "loss.csv"), slurp(dir / "b" / "loss.csv"));
  EXPECT_EQ(slurp(dir / "a" / "metrics.json"), slurp(dir / "b" / "metrics.json"));
  EXPECT_EQ(slurp(dir / "a" / "checkpoint.tsv"), slurp(dir / "b" / "checkpoint.tsv"));

  const Metrics m = evaluate_checkpoint(c, load_checkpoint(dir / "a" / "checkpoint.tsv"));
  EXPECT_TRUE(std::isfinite(m.test_nll));
}

TEST(Config, ToyReports) {
  const ToyReport r = run_toy("chain10", 2, 0);
  ASSERT_EQ(r.groups.size(), 2u);
  EXPECT_EQ(r.groups[0].label, "alpha=0.001");
  EXPECT_EQ(r.groups[1].label, "alpha=0.075");
  EXPECT_EQ(r.groups[0].runs[0].pairs.size(), 90u);
  EXPECT_THROW(run_toy("cycle6", 1, 0), ConfigError);
}
