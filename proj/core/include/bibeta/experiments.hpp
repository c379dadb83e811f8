#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bibeta/bayes.hpp"
#include "bibeta/estimators.hpp"
#include "bibeta/random.hpp"
#include "bibeta/stats.hpp"
#include "bibeta/types.hpp"

namespace bibeta {

using Mat2 = std::array<std::array<double, 2>, 2>;

/// (X, Y) = (logistic(G1), logistic(G2)) with G ~ N(mu, sigma).
struct LogitNormalParams {
  std::array<double, 2> mu{0.0, 0.0};
  Mat2 sigma{{{1.0, 0.0}, {0.0, 1.0}}};
};

using Generator = std::variant<AlphaParams, LogitNormalParams>;

/// Throws CholeskyFailure unless sigma is symmetric positive definite.
PairedSample sample_logit_normal(const LogitNormalParams& params, std::size_t n, std::uint64_t seed);
PairedSample draw_sample(const Generator& generator, std::size_t n, std::uint64_t seed);

/// Moments of the logit-normal estimated from 10^7 draws. Results are
/// memoized per parameter set and, when BIBETA_CACHE_DIR is set, stored there.
MomentSummary logit_normal_moments(const LogitNormalParams& params);

struct ExperimentSpec {
  Generator generator = AlphaParams(1.0, 1.0, 1.0, 1.0);
  std::size_t n = 50;
  std::size_t reps = 200;
  std::vector<Method> methods{Method::MM1, Method::MM2, Method::MM3, Method::MM4};
  /// Bootstrap resamples per replication for MM intervals; 0 disables them.
  std::size_t bootstrap = 200;
  double level = 0.95;
  PriorSpec prior{};
  HmcConfig hmc{};
  std::uint64_t seed = kDefaultSeed;
  std::size_t threads = 1;
};

struct MetricCell {
  Method method = Method::MM1;
  std::string target;
  double truth = 0.0;
  double bias = 0.0;
  double mse = 0.0;
  double mape = 0.0;
  /// Fraction of intervals containing the truth; NaN without intervals.
  double coverage = 0.0;
  std::size_t reps = 0;
  std::size_t failed = 0;
};

struct MetricsTable {
  std::size_t n = 0;
  std::size_t reps = 0;
  std::vector<MetricCell> cells;

  /// Throws InvalidArgument if the cell is absent.
  const MetricCell& at(Method method, const std::string& target) const;
};

/// Scores alpha-hat against the generating alpha.
MetricsTable run_well_specified(const ExperimentSpec& spec);
/// Scores moments_of(alpha-hat) against the generator's true moments.
MetricsTable run_misspecified(const ExperimentSpec& spec);
/// Dispatches on the generator type.
MetricsTable run_experiment(const ExperimentSpec& spec);

enum class Statistic { Pn, GnZ, M };

std::string_view to_string(Statistic statistic) noexcept;
Statistic parse_statistic(std::string_view name);

struct DistributionSummary {
  Statistic statistic = Statistic::Pn;
  std::size_t reps = 0;
  std::size_t failed = 0;
  /// Sorted values of the statistic over successful replications.
  std::vector<double> values;
  std::vector<std::pair<double, double>> quantiles;
  stats::Histogram histogram;
  /// Fraction of values outside [0, 0.2].
  double fraction_outside = 0.0;
  /// Kolmogorov distance of the values to the standard normal.
  double ks_normal = 0.0;
};

DistributionSummary sampling_distribution(Statistic statistic, const Generator& generator, std::size_t n,
                                          std::size_t reps, std::uint64_t seed = kDefaultSeed,
                                          std::size_t bins = 30, std::size_t threads = 1);

}  // namespace bibeta
