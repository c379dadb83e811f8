#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "bibeta/random.hpp"
#include "bibeta/types.hpp"

namespace bibeta {

enum class Method { MM1, MM2, MM3, MM4, BE1, BE2 };

std::string_view to_string(Method method) noexcept;
/// Accepts "mm1".."mm4", "be1", "be2" in any case.
Method parse_method(std::string_view name);
bool is_moment_method(Method method) noexcept;

struct Interval {
  double lower = 0.0;
  double upper = 0.0;

  bool contains(double v) const noexcept { return v >= lower && v <= upper; }
};

using Intervals = std::array<Interval, 4>;

/// Point estimate of alpha. Closed-form estimators truncate non-positive
/// coordinates at exactly 0 and flag them in `clamped`.
struct EstimateReport {
  Vec4 alpha_hat{};
  Method method = Method::MM1;
  std::array<bool, 4> clamped{};
  bool converged = true;
  /// Final objective for the optimizer-based estimators, NaN otherwise.
  double objective = 0.0;
  std::optional<Intervals> interval;
  double interval_level = 0.95;

  int clamped_count() const noexcept;
};

struct BootstrapCI {
  Method method = Method::MM1;
  Intervals intervals{};
  std::size_t B = 0;
  double level = 0.95;
  std::size_t failed = 0;
  /// One row per successful resample (B - failed rows).
  std::vector<Vec4> resample_estimates;
};

/// Sample means, (n-1) variances and Pearson correlation.
MomentSummary empirical_moments(const PairedSample& sample);

/// Exact four-equation inverse (ignores v2), truncated at 0.
EstimateReport mm1(const MomentSummary& moments);
/// Three-equation solution with alpha4 chosen from both variance relations.
EstimateReport mm2(const MomentSummary& moments);
/// Means matched exactly; (alpha3, alpha4) fitted to the variance and
/// correlation relations numerically.
EstimateReport mm3(const MomentSummary& moments);
/// Five-term least squares over alpha > 0 with the pseudo-trial cap on the sum.
EstimateReport mm4(const MomentSummary& moments);

/// Dispatches to mm1..mm4; Bayes methods are rejected.
EstimateReport estimate(Method method, const MomentSummary& moments);

/// Percentile bootstrap over pairs. Each resample draws from its own child
/// stream of `seed`, so the result does not depend on `threads`. Resamples
/// whose estimator throws are dropped and counted in `failed`.
BootstrapCI bootstrap_ci(const PairedSample& sample, Method method, std::size_t B = 500,
                         double level = 0.95, std::uint64_t seed = kDefaultSeed,
                         std::size_t threads = 1);

}  // namespace bibeta
