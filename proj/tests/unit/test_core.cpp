#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <boost/math/distributions/beta.hpp>

#include "bibeta/density.hpp"
#include "bibeta/error.hpp"
#include "bibeta/moments.hpp"
#include "bibeta/random.hpp"
#include "bibeta/sampling.hpp"
#include "bibeta/stats.hpp"
#include "support/quadrature.hpp"

using namespace bibeta;

namespace {

void expect_kind(ErrorKind kind, const std::function<void()>& body) {
  try {
    body();
    ADD_FAILURE() << "expected " << to_string(kind);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), kind) << e.what();
  }
}

}  // namespace

TEST(AlphaParams, RejectsNonPositive) {
  expect_kind(ErrorKind::InvalidArgument, [] { AlphaParams(1, 0, 1, 1); });
  expect_kind(ErrorKind::InvalidArgument, [] { AlphaParams(1, 1, -2, 1); });
  expect_kind(ErrorKind::InvalidArgument, [] { AlphaParams(1, 1, 1, std::nan("")); });
  EXPECT_DOUBLE_EQ(AlphaParams(1, 2, 3, 4).sum(), 10.0);
}

TEST(AlphaParams, FloorReplacesZeros) {
  std::array<bool, 4> replaced{};
  const auto a = AlphaParams::with_floor({0.0, 2.0, -1.0, 3.0}, 1e-10, &replaced);
  EXPECT_EQ(a[0], 1e-10);
  EXPECT_EQ(a[2], 1e-10);
  EXPECT_TRUE(replaced[0] && replaced[2] && !replaced[1] && !replaced[3]);
}

TEST(Moments, SymmetricUnitAlpha) {
  const auto m = moments_of(AlphaParams(1, 1, 1, 1));
  EXPECT_DOUBLE_EQ(m.m1, 0.5);
  EXPECT_DOUBLE_EQ(m.m2, 0.5);
  EXPECT_DOUBLE_EQ(m.v1, 0.05);
  EXPECT_DOUBLE_EQ(m.v2, 0.05);
  EXPECT_DOUBLE_EQ(m.rho, 0.0);
}

TEST(Moments, ConstructedCorrelation) {
  const double a = 2.0;
  const double r = 0.6;
  const auto m = moments_of(AlphaParams(a / 2 * (1 + r), a / 2 * (1 - r), a / 2 * (1 - r), a / 2 * (1 + r)));
  EXPECT_NEAR(m.rho, 0.6, 1e-15);
}

TEST(Moments, HandValues2731) {
  const auto m = moments_of(AlphaParams(2, 7, 3, 1));
  EXPECT_NEAR(m.m1, 9.0 / 13.0, 1e-15);
  EXPECT_NEAR(m.m2, 5.0 / 13.0, 1e-15);
  EXPECT_NEAR(m.v1, 36.0 / 2366.0, 1e-15);
  EXPECT_NEAR(m.v2, 40.0 / 2366.0, 1e-15);
  EXPECT_NEAR(m.rho, -19.0 / std::sqrt(1440.0), 1e-15);
}

TEST(Moments, CovarianceMatchesDirichletAlgebra) {
  // Cov(U1+U2, U1+U3) from the Dirichlet covariance matrix.
  const Vec4 a{2.5, 0.7, 1.3, 3.1};
  const double s = a[0] + a[1] + a[2] + a[3];
  auto cov = [&](int i, int j) {
    const double pi = a[i] / s;
    const double pj = a[j] / s;
    return ((i == j ? pi : 0.0) - pi * pj) / (s + 1.0);
  };
  const double cxy = cov(0, 0) + cov(0, 2) + cov(1, 0) + cov(1, 2);
  const double vx = cov(0, 0) + cov(1, 1) + 2 * cov(0, 1);
  const double vy = cov(0, 0) + cov(2, 2) + 2 * cov(0, 2);
  const auto m = moments_of(AlphaParams(a));
  EXPECT_NEAR(m.v1, vx, 1e-15);
  EXPECT_NEAR(m.v2, vy, 1e-15);
  EXPECT_NEAR(m.rho, cxy / std::sqrt(vx * vy), 1e-14);
}

TEST(SolveFourMoments, Examples) {
  const auto unit = solve_four_moments(0.5, 0.5, 0.05, 0.0);
  EXPECT_TRUE(unit.feasible);
  EXPECT_NEAR(unit.bar_alpha, 4.0, 1e-14);
  for (double a : unit.alpha) EXPECT_NEAR(a, 1.0, 1e-14);
  expect_kind(ErrorKind::InfeasibleVariance, [] { solve_four_moments(0.5, 0.5, 0.30, 0.0); });
  const auto bad = solve_four_moments(0.9, 0.1, 0.01, 0.5);
  EXPECT_FALSE(bad.feasible);
  EXPECT_LE(*std::min_element(bad.alpha.begin(), bad.alpha.end()), 0.0);
}

TEST(SolveFourMoments, RoundTripRandom) {
  Rng rng(11);
  for (int t = 0; t < 1000; ++t) {
    Vec4 a;
    for (double& v : a) v = 0.2 + 9.8 * rng.uniform();
    const auto m = moments_of(AlphaParams(a));
    const auto back = solve_four_moments(m.m1, m.m2, m.v1, m.rho);
    for (std::size_t k = 0; k < 4; ++k) ASSERT_NEAR(back.alpha[k], a[k], 1e-9);
  }
}

TEST(SolveFourMoments, AtMostOneNonPositive) {
  Rng rng(12);
  for (int t = 0; t < 5000; ++t) {
    const double m1 = 0.02 + 0.96 * rng.uniform();
    const double m2 = 0.02 + 0.96 * rng.uniform();
    const double v1 = m1 * (1 - m1) * rng.uniform();
    const double rho = 2.0 * rng.uniform() - 1.0;
    const auto out = solve_four_moments(m1, m2, v1, rho);
    const auto bad = std::count_if(out.alpha.begin(), out.alpha.end(), [](double v) { return v <= 0.0; });
    ASSERT_LE(bad, 1);
  }
}

TEST(SolveFourMoments, FeasibleIffInsideRhoBounds) {
  for (double m1 = 0.05; m1 < 1.0; m1 += 0.1) {
    for (double m2 = 0.05; m2 < 1.0; m2 += 0.1) {
      const auto b = rho_bounds(m1, m2);
      for (double rho = -0.99; rho < 1.0; rho += 0.0325) {
        for (double frac : {0.1, 0.5, 0.9}) {
          const double v1 = frac * m1 * (1 - m1);
          EXPECT_EQ(solve_four_moments(m1, m2, v1, rho).feasible, b.contains_strictly(rho))
              << m1 << " " << m2 << " " << rho;
        }
      }
    }
  }
}

TEST(SolveThreeMoments, Examples) {
  const auto one = solve_three_moments(0.5, 0.5, 0.0, 1.0);
  for (double a : one.alpha) EXPECT_NEAR(a, 1.0, 1e-15);
  const auto two = solve_three_moments(0.5, 0.5, 0.0, 2.0);
  for (double a : two.alpha) EXPECT_NEAR(a, 2.0, 1e-15);
  const auto m = moments_of(AlphaParams(2, 7, 3, 1));
  const auto back = solve_three_moments(m.m1, m.m2, m.rho, 1.0);
  EXPECT_NEAR(back.alpha[0], 2.0, 1e-9);
  EXPECT_NEAR(back.alpha[1], 7.0, 1e-9);
  EXPECT_NEAR(back.alpha[2], 3.0, 1e-9);
  expect_kind(ErrorKind::DegenerateDenominator, [] { solve_three_moments(0.5, 0.5, -1.0, 1.0); });
}

TEST(RhoBounds, Examples) {
  auto b = rho_bounds(0.5, 0.5);
  EXPECT_NEAR(b.lower, -1.0, 1e-15);
  EXPECT_NEAR(b.upper, 1.0, 1e-15);
  b = rho_bounds(0.3, 0.7);
  EXPECT_NEAR(b.lower, -1.0, 1e-15);
  EXPECT_NEAR(b.upper, 3.0 / 7.0, 1e-15);
  b = rho_bounds(0.2, 0.2);
  EXPECT_NEAR(b.lower, -0.25, 1e-15);
  EXPECT_NEAR(b.upper, 1.0, 1e-15);
}

TEST(Density, ConstantIntegrand) {
  const AlphaParams one(1, 1, 1, 1);
  EXPECT_NEAR(density(one, 0.5, 0.25), 1.5, 1e-12);
  // f = 6 * |Omega| for alpha = (1,1,1,1).
  for (auto [x, y] : {std::pair{0.1, 0.2}, {0.7, 0.6}, {0.3, 0.9}, {0.55, 0.45}, {0.2, 0.2}}) {
    const double width = std::min(x, y) - std::max(0.0, x + y - 1.0);
    EXPECT_NEAR(density(one, x, y), 6.0 * width, 1e-12);
  }
}

TEST(Density, SingularSet) {
  EXPECT_THROW(density(AlphaParams(1, 0.4, 0.4, 1), 0.3, 0.3), Error);
  expect_kind(ErrorKind::UndefinedDensity, [] { density(AlphaParams(1, 0.4, 0.4, 1), 0.3, 0.3); });
  EXPECT_FALSE(is_density_defined(AlphaParams(0.4, 1, 1, 0.4), 0.3, 0.7));
  EXPECT_TRUE(is_density_defined(AlphaParams(2, 2, 2, 2), 0.3, 0.3));
  EXPECT_TRUE(is_density_defined(AlphaParams(2, 2, 2, 2), 0.3, 0.7));
  EXPECT_TRUE(is_density_defined(AlphaParams(1, 0.5, 0.5, 1), 0.2, 0.6));
  EXPECT_TRUE(is_density_defined(AlphaParams(1, 0.4, 0.4, 1), 0.3, 0.3 + 1e-9));
}

TEST(Density, IntegrableEndpointSingularity) {
  // alpha1 < 1 and alpha2 < 1: both ends of Omega are singular but integrable.
  const AlphaParams a(0.5, 0.6, 2.0, 3.0);
  EXPECT_GT(density(a, 0.3, 0.5), 0.0);
  EXPECT_TRUE(std::isfinite(density(a, 0.3, 0.5)));
}

TEST(Density, Normalization) {
  for (const Vec4& v : {Vec4{2, 3, 4, 5}, Vec4{1.5, 1.5, 1.5, 1.5}, Vec4{2, 7, 3, 1}}) {
    const AlphaParams a(v);
    const double total = oracle::integrate_unit_square([&](double x, double y) { return density(a, x, y); });
    EXPECT_NEAR(total, 1.0, 1e-3);
  }
}

TEST(Density, MarginalIsBeta) {
  const AlphaParams a(2, 3, 4, 5);
  boost::math::beta_distribution<> bx(5, 9);
  for (double x : {0.15, 0.4, 0.72}) {
    const double marginal = oracle::integrate_pieces([&](double y) { return density(a, x, y); },
                                                      {0.0, std::min(x, 1 - x), std::max(x, 1 - x), 1.0});
    EXPECT_NEAR(marginal, boost::math::pdf(bx, x), 1e-6);
  }
}

TEST(Density, SwapSymmetry) {
  const AlphaParams a(2, 0.7, 3.5, 1.2);
  const AlphaParams swapped(2, 3.5, 0.7, 1.2);
  for (auto [x, y] : {std::pair{0.2, 0.7}, {0.5, 0.1}, {0.65, 0.66}}) {
    EXPECT_NEAR(density(a, x, y), density(swapped, y, x), 1e-9 * density(a, x, y));
  }
}

TEST(Sampling, EmptyAndDeterministic) {
  EXPECT_EQ(sample(AlphaParams(1, 1, 1, 1), 0, 1).size(), 0u);
  const auto a = sample(AlphaParams(2, 7, 3, 1), 500, 99);
  const auto b = sample(AlphaParams(2, 7, 3, 1), 500, 99);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, sample(AlphaParams(2, 7, 3, 1), 500, 100));
}

TEST(Sampling, SmallShapesStayInside) {
  const auto s = sample(AlphaParams(0.01, 0.02, 0.01, 0.03), 2000, 5);
  for (std::size_t i = 0; i < s.size(); ++i) {
    ASSERT_GT(s.x()[i], 0.0);
    ASSERT_LT(s.x()[i], 1.0);
  }
}

TEST(Sampling, MarginalsPassKs) {
  for (const Vec4& v : {Vec4{2, 7, 3, 1}, Vec4{0.3, 0.5, 0.4, 0.8}, Vec4{5, 1, 1, 5}}) {
    const AlphaParams a(v);
    const auto s = sample(a, 10000, 2024);
    const auto kx = stats::ks_test(s.x(), [&](double t) { return stats::beta_cdf(v[0] + v[1], v[2] + v[3], t); });
    const auto ky = stats::ks_test(s.y(), [&](double t) { return stats::beta_cdf(v[0] + v[2], v[1] + v[3], t); });
    EXPECT_GT(kx.p_value, 0.01);
    EXPECT_GT(ky.p_value, 0.01);
  }
}

TEST(Random, ChildSeedsDiffer) {
  EXPECT_NE(child_seed(1, 0), child_seed(1, 1));
  EXPECT_NE(child_seed(1, 0), child_seed(2, 0));
  EXPECT_EQ(child_seed(7, 3), child_seed(7, 3));
}

TEST(Random, GammaMoments) {
  Rng rng(3);
  for (double shape : {0.05, 0.5, 1.0, 4.0}) {
    double s = 0.0;
    double ss = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double g = gamma_variate(rng, shape);
      s += g;
      ss += g * g;
    }
    const double mean = s / n;
    const double var = ss / n - mean * mean;
    EXPECT_NEAR(mean, shape, 5.0 * std::sqrt(shape / n));
    EXPECT_NEAR(var / shape, 1.0, 0.1);
  }
}
