#include <gtest/gtest.h>

#include <cmath>

#include "bibeta/error.hpp"
#include "bibeta/estimators.hpp"
#include "bibeta/moments.hpp"
#include "bibeta/sampling.hpp"
#include "bibeta/stats.hpp"

using namespace bibeta;

namespace {

MomentSummary exact(const Vec4& a) { return moments_of(AlphaParams(a)); }

}  // namespace

TEST(EmpiricalMoments, TwoPoints) {
  const PairedSample s({0.2, 0.4}, {0.6, 0.8});
  const auto m = empirical_moments(s);
  EXPECT_NEAR(m.m1, 0.3, 1e-15);
  EXPECT_NEAR(m.m2, 0.7, 1e-15);
  EXPECT_NEAR(m.v1, 0.02, 1e-15);
  EXPECT_NEAR(m.v2, 0.02, 1e-15);
  EXPECT_NEAR(m.rho, 1.0, 1e-15);
}

TEST(EmpiricalMoments, IdenticalColumnsAndConstant) {
  const PairedSample same({0.1, 0.5, 0.3}, {0.1, 0.5, 0.3});
  EXPECT_DOUBLE_EQ(empirical_moments(same).rho, 1.0);
  const PairedSample flat({0.4, 0.4, 0.4}, {0.1, 0.2, 0.3});
  try {
    empirical_moments(flat);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ZeroVariance);
  }
}

TEST(Mm1, Examples) {
  const auto unit = mm1({0.5, 0.5, 0.05, 0.05, 0.0});
  EXPECT_EQ(unit.clamped_count(), 0);
  for (double a : unit.alpha_hat) EXPECT_NEAR(a, 1.0, 1e-14);
  const auto clamped = mm1({0.9, 0.1, 0.01, 0.01, 0.5});
  EXPECT_EQ(clamped.clamped_count(), 1);
  const auto raw = solve_four_moments(0.9, 0.1, 0.01, 0.5).alpha;
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(clamped.alpha_hat[k], raw[k] > 0 ? raw[k] : 0.0);
  }
}

TEST(Mm1, ConsistentAtLargeN) {
  const auto s = sample(AlphaParams(1, 1, 1, 1), 100000, 17);
  const auto e = mm1(empirical_moments(s));
  for (double a : e.alpha_hat) EXPECT_NEAR(a, 1.0, 0.05);
}

TEST(Mm2, FixedPointAndSigns) {
  for (const Vec4& a : {Vec4{1, 1, 1, 1}, Vec4{2, 7, 3, 1}, Vec4{0.7, 0.9, 2, 1.5}}) {
    const auto e = mm2(exact(a));
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(e.alpha_hat[k], a[k], 1e-9);
  }
  const auto pos = mm2({0.6, 0.4, 0.03, 0.05, 0.9});
  EXPECT_FALSE(pos.clamped[0]);
  EXPECT_FALSE(pos.clamped[3]);
  const auto neg = mm2({0.6, 0.4, 0.03, 0.05, -0.95});
  EXPECT_FALSE(neg.clamped[1]);
  EXPECT_FALSE(neg.clamped[2]);
}

TEST(Mm3, FixedPoint) {
  const auto unit = mm3(exact({1, 1, 1, 1}));
  for (double a : unit.alpha_hat) EXPECT_NEAR(a, 1.0, 1e-4);
  EXPECT_LT(unit.objective, 1e-10);
  const auto e = mm3(exact({2, 7, 3, 1}));
  const Vec4 truth{2, 7, 3, 1};
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(e.alpha_hat[k], truth[k], 1e-4);
}

TEST(Mm3, MatchesMeansExactly) {
  const MomentSummary target{0.33, 0.30, 0.062, 0.033, -0.73};
  const auto e = mm3(target);
  const auto m = moments_of(e.alpha_hat);
  EXPECT_NEAR(m.m1, 0.33, 1e-8);
  EXPECT_NEAR(m.m2, 0.30, 1e-8);
  for (double a : e.alpha_hat) EXPECT_GT(a, 0.0);
}

TEST(Mm4, FixedPointAndConstraint) {
  const auto unit = mm4(exact({1, 1, 1, 1}));
  for (double a : unit.alpha_hat) EXPECT_NEAR(a, 1.0, 1e-3);
  const Vec4 truth{0.7, 0.9, 2, 1.5};
  const auto e = mm4(exact(truth));
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(e.alpha_hat[k], truth[k], 1e-3);

  const MomentSummary target{0.33, 0.30, 0.062, 0.033, -0.73};
  const auto f = mm4(target);
  const double r1 = target.m1 * (1 - target.m1) / target.v1;
  const double r2 = target.m2 * (1 - target.m2) / target.v2;
  const double sum = f.alpha_hat[0] + f.alpha_hat[1] + f.alpha_hat[2] + f.alpha_hat[3];
  EXPECT_LE(sum, std::max(r1, r2) - 1.0);
  for (double a : f.alpha_hat) EXPECT_GT(a, 0.0);
}

TEST(Estimate, RejectsBayesMethods) {
  EXPECT_THROW(estimate(Method::BE1, {0.5, 0.5, 0.05, 0.05, 0.0}), Error);
  EXPECT_EQ(parse_method("Mm3"), Method::MM3);
  EXPECT_THROW(parse_method("mm5"), Error);
}

TEST(Bootstrap, DeterministicAcrossThreads) {
  const auto s = sample(AlphaParams(2, 3, 7, 1), 100, 3);
  const auto a = bootstrap_ci(s, Method::MM1, 100, 0.95, 42, 1);
  const auto b = bootstrap_ci(s, Method::MM1, 100, 0.95, 42, 4);
  ASSERT_EQ(a.resample_estimates.size(), b.resample_estimates.size());
  for (std::size_t i = 0; i < a.resample_estimates.size(); ++i) EXPECT_EQ(a.resample_estimates[i], b.resample_estimates[i]);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(a.intervals[k].lower, b.intervals[k].lower);
    EXPECT_EQ(a.intervals[k].upper, b.intervals[k].upper);
  }
}

TEST(Bootstrap, DegenerateSampleFailsEverywhere) {
  const PairedSample s(std::vector<double>(20, 0.3), std::vector<double>(20, 0.6));
  try {
    bootstrap_ci(s, Method::MM1, 50, 0.95, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ZeroVariance);
  }
}

TEST(Bootstrap, IntervalsBracketResampleMedian) {
  const auto s = sample(AlphaParams(1, 1, 1, 1), 200, 8);
  const auto ci = bootstrap_ci(s, Method::MM2, 200, 0.9, 8);
  for (std::size_t k = 0; k < 4; ++k) {
    std::vector<double> col;
    for (const auto& r : ci.resample_estimates) col.push_back(r[k]);
    const double med = stats::median(col);
    EXPECT_LE(ci.intervals[k].lower, med);
    EXPECT_GE(ci.intervals[k].upper, med);
  }
}

TEST(Bootstrap, Alpha1Alpha4Correlated) {
  const auto s = sample(AlphaParams(2, 3, 7, 1), 200, 21);
  const auto ci = bootstrap_ci(s, Method::MM1, 500, 0.95, 21);
  std::vector<double> a1;
  std::vector<double> a4;
  for (const auto& r : ci.resample_estimates) {
    a1.push_back(r[0]);
    a4.push_back(r[3]);
  }
  const double r = stats::pearson(a1, a4);
  // Fisher z lower 95% bound above zero.
  const double z = std::atanh(r) - 1.96 / std::sqrt(static_cast<double>(a1.size()) - 3.0);
  EXPECT_GT(z, 0.0);
}
