#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "spacetime/manifold.hpp"

using namespace spacetime;

namespace {

const ManifoldSpec kMink(ManifoldKind::kMinkowski, 1);
const ManifoldSpec kCyl(ManifoldKind::kCylindricalMinkowski, 1, 10.0);
// Three stored coordinates (x_-1, x_0, x_1).
const ManifoldSpec kAds(ManifoldKind::kAntiDeSitter, 1);

Vector ads_point(std::mt19937_64& rng) { return random_point(kAds, 1.0, rng); }

}  // namespace

TEST(Manifold, AmbientDims) {
  EXPECT_EQ(ManifoldSpec(ManifoldKind::kEuclidean, 4).ambient_dim(), 4u);
  EXPECT_EQ(ManifoldSpec(ManifoldKind::kHyperboloid, 4).ambient_dim(), 5u);
  EXPECT_EQ(ManifoldSpec(ManifoldKind::kMinkowski, 4).ambient_dim(), 5u);
  EXPECT_EQ(ManifoldSpec(ManifoldKind::kAntiDeSitter, 4).ambient_dim(), 6u);
  EXPECT_EQ(ManifoldSpec::from_embedding_dim(ManifoldKind::kAntiDeSitter, 10)
                .spatial_dim(),
            8);
  EXPECT_THROW(ManifoldSpec(ManifoldKind::kCylindricalMinkowski, 1),
               ManifoldError);
  EXPECT_THROW(ManifoldSpec(ManifoldKind::kMinkowski, 1, 10.0), ManifoldError);
}

TEST(Manifold, MinkowskiSquaredDistance) {
  EXPECT_DOUBLE_EQ(squared_distance(kMink, Vector{0, 0}, Vector{0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(squared_distance(kMink, Vector{0, 0}, Vector{1, 0}), -1.0);
}

TEST(Manifold, AdsSquaredDistance) {
  const Vector p{0, 1, 0};
  EXPECT_DOUBLE_EQ(squared_distance(kAds, p, p), 0.0);
  // acosh(sqrt 2)^2 from a 30-digit evaluation.
  const Vector q{0, std::sqrt(2.0), 1};
  EXPECT_NEAR(squared_distance(kAds, p, q), 0.776819399895696, 1e-12);
}

TEST(Manifold, AdsTimelikeBeyondAntipode) {
  // <p,q>_L = cos(theta) > 1 is impossible on the sheet, so build it directly:
  // p=(0,1,0), q=(0,-1.5,...) has <p,q>_L = 1.5.
  const ManifoldSpec ads1(ManifoldKind::kAntiDeSitter, 1);
  const Vector p{0, 1, 0};
  const Vector q{0, -1.5, std::sqrt(1.25)};
  EXPECT_NEAR(lorentz_inner(ads1, p, q), 1.5, 1e-15);
  EXPECT_NEAR(squared_distance(ads1, p, q), -std::numbers::pi * std::numbers::pi,
              1e-12);
}

TEST(Manifold, TimeDelta) {
  EXPECT_DOUBLE_EQ(time_delta(kMink, Vector{0, 0}, Vector{2, 0}), 2.0);
  EXPECT_NEAR(time_delta(kCyl, Vector{9, 0}, Vector{1, 0}), 2.0, 1e-12);
  const Vector p{0, 1, 0};
  EXPECT_DOUBLE_EQ(time_delta(kAds, p, p), 0.0);
}

TEST(Manifold, IntervalImages) {
  const auto flat = interval_images(kMink, Vector{0.3, 1}, Vector{1, -0.5}, 5);
  ASSERT_EQ(flat.size(), 1u);
  EXPECT_DOUBLE_EQ(flat[0].s_sq,
                   squared_distance(kMink, Vector{0.3, 1}, Vector{1, -0.5}));

  const auto cyl = interval_images(kCyl, Vector{0, 0}, Vector{1, 0}, 1);
  ASSERT_EQ(cyl.size(), 3u);
  const double dts[] = {-9, 1, 11};
  const double ss[] = {-81, -1, -121};
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(cyl[i].dt, dts[i], 1e-12);
    EXPECT_NEAR(cyl[i].s_sq, ss[i], 1e-10);
  }

  std::mt19937_64 rng(4);
  const auto ads = interval_images(kAds, ads_point(rng), ads_point(rng), 1);
  ASSERT_EQ(ads.size(), 3u);
  EXPECT_EQ(ads[0].s_sq, ads[1].s_sq);
  EXPECT_EQ(ads[1].s_sq, ads[2].s_sq);
}

TEST(Manifold, ExpMapFlat) {
  const Vector r = exp_map(kMink, Vector{1, 2}, Vector{0.5, -1});
  EXPECT_DOUBLE_EQ(r[0], 1.5);
  EXPECT_DOUBLE_EQ(r[1], 1.0);
}

TEST(Manifold, ExpMapAds) {
  std::mt19937_64 rng(9);
  const Vector p = ads_point(rng);
  EXPECT_EQ(exp_map(kAds, p, Vector(3, 0.0)), p);

  // A unit timelike tangent scaled to length pi lands on -p.
  Vector t = tangent_projection(kAds, p, Vector{1, 0, 0});
  const double norm = std::sqrt(std::abs(lorentz_inner(kAds, t, t)));
  ASSERT_LT(lorentz_inner(kAds, t, t), 0.0);
  for (double& x : t) x *= std::numbers::pi / norm;
  const Vector q = exp_map(kAds, p, t);
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(q[i], -p[i], 1e-9);
  EXPECT_NEAR(lorentz_inner(kAds, q, q), -1.0, 1e-12);
}

TEST(Manifold, DescentTangent) {
  const Vector d = descent_tangent(kMink, Vector{0.2, 0.1}, Vector{3, -4});
  EXPECT_DOUBLE_EQ(d[0], 3);
  EXPECT_DOUBLE_EQ(d[1], -4);

  std::mt19937_64 rng(11);
  const Vector p = ads_point(rng);
  // The differential of <x,x>_L at p is normal to the quadric.
  Vector normal(p.size());
  normal[0] = -2 * p[0];
  normal[1] = -2 * p[1];
  normal[2] = 2 * p[2];
  for (double x : descent_tangent(kAds, p, normal)) EXPECT_NEAR(x, 0.0, 1e-12);

  std::normal_distribution<double> g;
  for (int i = 0; i < 100; ++i) {
    const Vector q = ads_point(rng);
    const Vector df{g(rng), g(rng), g(rng)};
    EXPECT_LE(std::abs(lorentz_inner(kAds, descent_tangent(kAds, q, df), q)),
              1e-9);
  }
}

TEST(Manifold, ProjectPoint) {
  std::mt19937_64 rng(2);
  const Vector p = ads_point(rng);
  const Vector same = project_point(kAds, p);
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(same[i], p[i], 1e-15);

  Vector c{10.2, 0.0};
  project_point_inplace(kCyl, c);
  EXPECT_NEAR(c[0], 0.2, 1e-12);

  // Push the point off the quadric by 1e-6.
  Vector drift = p;
  const double s = std::sqrt(1.0 - 1e-6);
  for (double& x : drift) x *= s;
  ASSERT_NEAR(quadric_residual(kAds, drift), 1e-6, 1e-12);
  project_point_inplace(kAds, drift);
  EXPECT_LE(std::abs(quadric_residual(kAds, drift)), 1e-12);
}

TEST(Manifold, RandomPoint) {
  std::mt19937_64 rng(1);
  const Vector o = random_point(kAds, 1e-12, rng);
  EXPECT_NEAR(o[0], 0.0, 1e-9);
  EXPECT_NEAR(o[1], 1.0, 1e-9);
  EXPECT_NEAR(o[2], 0.0, 1e-9);
  for (auto kind : {ManifoldKind::kEuclidean, ManifoldKind::kHyperboloid,
                    ManifoldKind::kMinkowski, ManifoldKind::kAntiDeSitter}) {
    const ManifoldSpec s(kind, 3);
    EXPECT_NO_THROW(validate_point(s, random_point(s, 1.0, rng)));
  }
  EXPECT_NO_THROW(validate_point(kCyl, random_point(kCyl, 1.0, rng)));
  std::mt19937_64 a(1), b(2);
  EXPECT_NE(random_point(kMink, 1.0, a), random_point(kMink, 1.0, b));
}

TEST(Manifold, Differentials) {
  const Vector p{0.5, -1.0}, q{2.0, 0.25};
  const auto d = interval_differentials(kMink, p, q);
  EXPECT_DOUBLE_EQ(d.ds_sq_dq[0], -2 * (q[0] - p[0]));
  EXPECT_DOUBLE_EQ(d.ds_sq_dq[1], 2 * (q[1] - p[1]));
  EXPECT_DOUBLE_EQ(d.ddt_dq[0], 1.0);
  EXPECT_DOUBLE_EQ(d.ddt_dq[1], 0.0);

  const ManifoldSpec e(ManifoldKind::kEuclidean, 2);
  for (double x : interval_differentials(e, p, p).ds_sq_dq) EXPECT_EQ(x, 0.0);
}

TEST(Manifold, AdsDifferentialsMatchFiniteDifferences) {
  std::mt19937_64 rng(21);
  const double h = 1e-5;
  for (int trial = 0; trial < 20; ++trial) {
    const Vector p = ads_point(rng), q = ads_point(rng);
    const auto d = interval_differentials(kAds, p, q);
    for (std::size_t i = 0; i < q.size(); ++i) {
      Vector e(q.size(), 0.0);
      e[i] = 1.0;
      const Vector dir = tangent_projection(kAds, q, e);
      Vector step = dir;
      for (double& x : step) x *= h;
      const Vector qp = exp_map(kAds, q, step);
      for (double& x : step) x = -x;
      const Vector qm = exp_map(kAds, q, step);
      const double fd = (squared_distance(kAds, p, qp) - squared_distance(kAds, p, qm)) / (2 * h);
      double an = 0.0;
      for (std::size_t j = 0; j < q.size(); ++j) an += d.ds_sq_dq[j] * dir[j];
      EXPECT_LE(std::abs(fd - an), 1e-5 * std::max({1.0, std::abs(fd), std::abs(an)}));
    }
  }
}

TEST(Manifold, WrapSymmetric) {
  EXPECT_DOUBLE_EQ(wrap_symmetric(-8.0, 10.0), 2.0);
  EXPECT_DOUBLE_EQ(wrap_symmetric(5.0, 10.0), -5.0);
  EXPECT_DOUBLE_EQ(wrap_symmetric(4.0, 10.0), 4.0);
}
