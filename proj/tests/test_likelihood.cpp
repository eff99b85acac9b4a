#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "spacetime/likelihood.hpp"

using namespace spacetime;

namespace {

TfdParams tfd_params(double tau1, double tau2, double alpha, double r = 0.0,
                     double k = 1.0) {
  TfdParams p;
  p.tau1 = tau1;
  p.tau2 = tau2;
  p.alpha = alpha;
  p.r = r;
  p.k = k;
  return p;
}

}  // namespace

TEST(Likelihood, FermiDirac) {
  FdParams p;
  EXPECT_DOUBLE_EQ(fd(p, 0.0), 0.5);
  p.alpha = 0.0;
  EXPECT_DOUBLE_EQ(fd(p, 7.3), 0.5);
  p.alpha = 1.0;
  p.r = 2.0;
  EXPECT_DOUBLE_EQ(fd(p, 2.0), 0.5);
}

TEST(Likelihood, TfdValues) {
  EXPECT_NEAR(tfd(tfd_params(1, 1, 1), 0.0, 0.0), 0.5, 1e-15);
  // ((1/(e^-1 + 1))^2 / 2)^(1/3) at 30 digits.
  EXPECT_NEAR(tfd(tfd_params(1, 1, 0), -1.0, 1.0), 0.644107149698143, 1e-13);
  const TfdParams a = tfd_params(0.4, 0.07, 0.09);
  EXPECT_GT(tfd(a, -0.1, 0.3), tfd(a, -0.1, -0.3));
}

TEST(Likelihood, TfdPartialsClosedForm) {
  const TfdParams p = tfd_params(0.4, 0.2, 0.3);
  const double v = tfd(p, 0.0, 0.0);
  EXPECT_NEAR(tfd_partials(p, 0.0, 0.0).d_s_sq, -v / (6 * 0.4), 1e-12);

  // With alpha = 0 only F2 depends on dt: d/ddt = v (1 - F2) / (3 tau2).
  const TfdParams q = tfd_params(0.4, 0.2, 0.0);
  const double dt = 0.3;
  const double f2 = 1.0 / (std::exp(-dt / 0.2) + 1.0);
  EXPECT_NEAR(tfd_partials(q, 0.1, dt).d_dt,
              tfd(q, 0.1, dt) * (1.0 - f2) / (3 * 0.2), 1e-12);
}

TEST(Likelihood, TfdPartialsMatchFiniteDifferences) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> tau(0.05, 1.0), alpha(0.0, 1.0),
      r(-0.5, 0.5), s(-2.0, 2.0), t(-2.0, 2.0);
  // Sixth-order central stencil; plain central differences cannot reach
  // 1e-7 in double precision.
  const double h = 3e-3;
  auto diff = [h](auto f) {
    return (f(3 * h) - 9 * f(2 * h) + 45 * f(h) - 45 * f(-h) + 9 * f(-2 * h) -
            f(-3 * h)) /
           (60 * h);
  };
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const TfdParams p = tfd_params(tau(rng), tau(rng), alpha(rng), r(rng));
    const double s_sq = s(rng), dt = t(rng);
    const TfdPartials an = tfd_partials(p, s_sq, dt);
    const double ds = diff([&](double e) { return tfd(p, s_sq + e, dt); });
    const double dd = diff([&](double e) { return tfd(p, s_sq, dt + e); });
    // Below this scale the finite difference itself loses the digits.
    const double floor = 1e-6;
    worst = std::max(worst, std::abs(ds - an.d_s_sq) /
                                std::max({std::abs(ds), std::abs(an.d_s_sq), floor}));
    worst = std::max(worst, std::abs(dd - an.d_dt) /
                                std::max({std::abs(dd), std::abs(an.d_dt), floor}));
  }
  EXPECT_LT(worst, 1e-7);
}

TEST(Likelihood, WrappedSingleImageMatchesTfd) {
  const TfdParams p = tfd_params(0.4, 0.07, 0.09);
  const IntervalImage img{-0.3, 0.4};
  EXPECT_DOUBLE_EQ(wrapped_tfd(p, std::span(&img, 1)).value, tfd(p, -0.3, 0.4));
}

TEST(Likelihood, WrappedTruncationConverges) {
  const ManifoldSpec cyl(ManifoldKind::kCylindricalMinkowski, 1, 10.0);
  TfdParams p3 = tfd_params(1.0, 0.05, 0.075);
  TfdParams p4 = p3;
  p4.wrap_m = 4;
  const Vector a{0.0, 0.0};
  for (double t : {0.05, 1.0, 4.0, 9.5}) {
    for (double x : {0.0, 0.3, 2.0}) {
      const Vector b{t, x};
      const double v3 = wrapped_tfd(p3, interval_images(cyl, a, b, 3)).value;
      const double v4 = wrapped_tfd(p4, interval_images(cyl, a, b, 4)).value;
      EXPECT_LT(std::abs(v4 - v3), 1e-6 * std::abs(v4));
    }
  }
}

TEST(Likelihood, CalibrateK) {
  const TfdParams p = tfd_params(1.0, 1.0, 0.0);
  EXPECT_EQ(calibrate_k(p, ManifoldSpec(ManifoldKind::kMinkowski, 2)), 1.0);
  // Grid maxima from an independent dense numpy scan of the wrapped sum.
  EXPECT_EQ(calibrate_k(tfd_params(0.4, 0.07, 0.09),
                        ManifoldSpec(ManifoldKind::kCylindricalMinkowski, 1, 10.0)),
            1.0);
  EXPECT_EQ(calibrate_k(tfd_params(0.4, 0.15, 0.15, -0.1),
                        ManifoldSpec(ManifoldKind::kAntiDeSitter, 1)),
            1.0);
  const double k = calibrate_k(
      p, ManifoldSpec(ManifoldKind::kCylindricalMinkowski, 1, 2.0));
  EXPECT_NEAR(k, 0.23651738915492487, 1e-3 * 0.2365);
  // Wide circles leave one image, whose value never exceeds 1.
  EXPECT_EQ(calibrate_k(tfd_params(0.4, 0.07, 0.09),
                        ManifoldSpec(ManifoldKind::kCylindricalMinkowski, 1, 1e4)),
            1.0);
}

TEST(Likelihood, EdgeNll) {
  EXPECT_NEAR(edge_nll(0.5, EdgeLabel::kPositive), std::log(2.0), 1e-15);
  EXPECT_NEAR(edge_nll(1.0 - 1e-12, EdgeLabel::kNegative), -std::log(1e-12), 1e-3);
  EXPECT_NEAR(edge_nll(1.0, EdgeLabel::kNegative), -std::log(1e-12), 1e-3);
  EXPECT_NEAR(edge_nll(0.9, EdgeLabel::kNegative), -std::log(0.1), 1e-12);
}

TEST(Likelihood, Validation) {
  EXPECT_THROW(tfd_params(0.0, 1, 0).validate(), LikelihoodError);
  EXPECT_THROW(tfd_params(1, 1, 1.5).validate(), LikelihoodError);
  EXPECT_THROW(tfd_params(1, 1, 0, 0, 1.5).validate(), LikelihoodError);
  EXPECT_THROW(parse_likelihood_kind("tfdx"), LikelihoodError);
  EXPECT_EQ(parse_likelihood_kind("wrapped_tfd"), LikelihoodKind::kWrappedTfd);
}
