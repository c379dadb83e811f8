#pragma once

#include <cstdint>
#include <optional>

#include "bibeta/random.hpp"
#include "bibeta/types.hpp"

namespace bibeta {

/// Asymptotic test of m1(1-m1)/v1 = m2(1-m2)/v2.
struct GnReport {
  double g_n = 0.0;
  double sigma_hat = 0.0;
  /// sqrt(n) * g_n / sigma_hat
  double z = 0.0;
  double p_value = 1.0;
};

/// G_n = g(mean X, var X, mean Y, var Y) with g(x1,x2,x3,x4) =
/// x1(1-x1)x4 - x2(1-x3)x3, standardized by the delta-method variance built
/// from the sample covariance of (X, (X-mean X)^2, Y, (Y-mean Y)^2).
/// Needs n >= 5; throws DegenerateVariance when sigma_hat is 0.
GnReport gn_test(const PairedSample& sample);

struct MBootstrap {
  std::size_t B = 0;
  std::size_t failed = 0;
  double q01 = 0.0;
  double q05 = 0.0;
  double q10 = 0.0;
};

struct MReport {
  double m_stat = 0.0;
  /// Unconstrained moment solution divided by its sum.
  Vec4 beta_hat{};
  double bar_alpha = 0.0;
  double threshold = -0.05;
  bool reject = false;
  std::optional<MBootstrap> bootstrap;
};

/// M = min(beta_hat); rejects when M <= c. With `B`, also reports the 1%, 5%
/// and 10% bootstrap quantiles of M (resamples with a non-positive sum are
/// dropped and counted). Throws InfeasibleVariance when var X >= mean X (1 -
/// mean X).
MReport m_test(const MomentSummary& moments, double c = -0.05);
MReport m_test(const PairedSample& sample, double c = -0.05, std::optional<std::size_t> B = std::nullopt,
               std::uint64_t seed = kDefaultSeed, std::size_t threads = 1);

}  // namespace bibeta
