#include <gtest/gtest.h>

#include <boost/math/distributions/beta.hpp>

#include "bibeta/elicitation.hpp"
#include "bibeta/error.hpp"
#include "bibeta/moments.hpp"

using namespace bibeta;

TEST(Elicit, ExactFourMoment) {
  const auto r = elicit({0.5, 0.5, 0.05, 0.05, 0.0});
  EXPECT_EQ(r.path, ElicitationPath::ExactFourMoment);
  for (double a : r.alpha.values()) EXPECT_NEAR(a, 1.0, 1e-12);
  for (double d : r.discrepancy) EXPECT_LT(d, 1e-14);
}

TEST(Elicit, RatioMismatchUsesThreeMoments) {
  const auto r = elicit({0.5, 0.5, 0.05, 0.02, 0.0});
  EXPECT_EQ(r.path, ElicitationPath::ThreeMomentMM2);
  // Means and correlation are matched exactly on this path.
  EXPECT_LT(r.discrepancy[0], 1e-12);
  EXPECT_LT(r.discrepancy[1], 1e-12);
  EXPECT_LT(r.discrepancy[4], 1e-12);
}

TEST(Elicit, InfeasibleCorrelationFallsBack) {
  const MomentSummary target{0.33, 0.30, 0.062, 0.033, -0.73};
  const auto means_first = elicit(target, Preference::MeansFirst);
  EXPECT_EQ(means_first.path, ElicitationPath::MM3Fallback);
  EXPECT_LT(means_first.discrepancy[0], 1e-8);
  EXPECT_LT(means_first.discrepancy[1], 1e-8);
  const auto balanced = elicit(target, Preference::Balanced);
  EXPECT_EQ(balanced.path, ElicitationPath::MM4Fallback);
  for (double a : balanced.alpha.values()) EXPECT_GT(a, 0.0);
}

TEST(Elicit, PathAIffRatioAndRhoInside) {
  for (const Vec4& a : {Vec4{2, 7, 3, 1}, Vec4{0.4, 0.5, 3, 2}, Vec4{5, 1, 1, 5}}) {
    const auto m = moments_of(AlphaParams(a));
    EXPECT_EQ(elicit(m).path, ElicitationPath::ExactFourMoment);
    auto off = m;
    off.v2 *= 1.0 + 1e-6;
    EXPECT_NE(elicit(off).path, ElicitationPath::ExactFourMoment);
  }
}

TEST(Elicit, BothVariancesInfeasible) {
  try {
    elicit({0.5, 0.5, 0.3, 0.3, 0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InfeasibleVariance);
  }
}

TEST(Elicit, PreferenceParsing) {
  EXPECT_EQ(parse_preference("means-first"), Preference::MeansFirst);
  EXPECT_EQ(parse_preference("BALANCED"), Preference::Balanced);
  EXPECT_THROW(parse_preference("other"), Error);
}

TEST(VarianceFromQuantile, RecoversBetaVariance) {
  const double a = 3.0;
  const double b = 5.0;
  boost::math::beta_distribution<> dist(a, b);
  const double mean = a / (a + b);
  const double q90 = boost::math::quantile(dist, 0.9);
  const double v = variance_from_quantile(mean, q90, 0.9);
  EXPECT_NEAR(v, a * b / ((a + b) * (a + b) * (a + b + 1)), 1e-9);
}
