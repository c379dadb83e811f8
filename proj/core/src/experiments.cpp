#include "bibeta/experiments.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>

#include "bibeta/diagnostics.hpp"
#include "bibeta/error.hpp"
#include "bibeta/moments.hpp"
#include "bibeta/parallel.hpp"
#include "bibeta/sampling.hpp"

namespace bibeta {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kOracleDraws = 10'000'000;
constexpr std::uint64_t kOracleSeed = 0x6C6F676974ULL;

struct Cholesky2 {
  double l11 = 0.0;
  double l21 = 0.0;
  double l22 = 0.0;
};

Cholesky2 cholesky(const Mat2& s) {
  if (!std::isfinite(s[0][0]) || !std::isfinite(s[0][1]) || !std::isfinite(s[1][0]) || !std::isfinite(s[1][1])) {
    fail(ErrorKind::CholeskyFailure, "covariance has non-finite entries");
  }
  if (std::abs(s[0][1] - s[1][0]) > 1e-12 * std::max(1.0, std::abs(s[0][1]))) {
    fail(ErrorKind::CholeskyFailure, "covariance is not symmetric");
  }
  if (!(s[0][0] > 0.0)) fail(ErrorKind::CholeskyFailure, "covariance is not positive definite");
  Cholesky2 out;
  out.l11 = std::sqrt(s[0][0]);
  out.l21 = s[1][0] / out.l11;
  const double rest = s[1][1] - out.l21 * out.l21;
  if (!(rest > 0.0)) fail(ErrorKind::CholeskyFailure, "covariance is not positive definite");
  out.l22 = std::sqrt(rest);
  return out;
}

double logistic_open(double g) {
  const double v = 1.0 / (1.0 + std::exp(-g));
  return std::clamp(v, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

std::string cache_key(const LogitNormalParams& p) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.17g_%.17g_%.17g_%.17g_%.17g_%.17g", p.mu[0], p.mu[1], p.sigma[0][0],
                p.sigma[0][1], p.sigma[1][0], p.sigma[1][1]);
  return buf;
}

std::optional<MomentSummary> read_cache(const std::filesystem::path& file) {
  std::ifstream in(file);
  MomentSummary m;
  if (in >> m.m1 >> m.m2 >> m.v1 >> m.v2 >> m.rho) return m;
  return std::nullopt;
}

void write_cache(const std::filesystem::path& file, const MomentSummary& m) {
  std::error_code ec;
  std::filesystem::create_directories(file.parent_path(), ec);
  std::ofstream out(file);
  if (!out) return;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g %.17g\n", m.m1, m.m2, m.v1, m.v2, m.rho);
  out << buf;
}

MomentSummary simulate_moments(const LogitNormalParams& params) {
  const Cholesky2 l = cholesky(params.sigma);
  Rng rng(kOracleSeed);
  // Shifted sums keep cancellation small: all values sit in (0, 1).
  double sx = 0.0;
  double sy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < kOracleDraws; ++i) {
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    const double x = logistic_open(params.mu[0] + l.l11 * z1) - 0.5;
    const double y = logistic_open(params.mu[1] + l.l21 * z1 + l.l22 * z2) - 0.5;
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  const double n = static_cast<double>(kOracleDraws);
  const double mx = sx / n;
  const double my = sy / n;
  MomentSummary m;
  m.m1 = mx + 0.5;
  m.m2 = my + 0.5;
  m.v1 = sxx / n - mx * mx;
  m.v2 = syy / n - my * my;
  m.rho = (sxy / n - mx * my) / std::sqrt(m.v1 * m.v2);
  return m;
}

std::array<std::string, 4> alpha_targets() { return {"alpha1", "alpha2", "alpha3", "alpha4"}; }
std::array<std::string, 5> moment_targets() { return {"m1", "m2", "v1", "v2", "rho"}; }

struct MethodOutcome {
  std::optional<std::vector<double>> values;
  std::optional<Intervals> intervals;
};

/// Estimates for every method on one replication's data. BE1 and BE2 share a
/// single posterior fit.
std::vector<MethodOutcome> fit_all(const ExperimentSpec& spec, const PairedSample& data, std::uint64_t rep_seed,
                                   bool with_intervals, bool score_moments) {
  std::vector<MethodOutcome> out(spec.methods.size());
  std::optional<PosteriorDraws> posterior;
  bool posterior_failed = false;
  std::optional<MomentSummary> empirical;
  try {
    empirical = empirical_moments(data);
  } catch (const Error&) {
  }
  for (std::size_t j = 0; j < spec.methods.size(); ++j) {
    const Method method = spec.methods[j];
    try {
      EstimateReport report;
      if (is_moment_method(method)) {
        if (!empirical) continue;
        report = estimate(method, *empirical);
        if (with_intervals && spec.bootstrap > 0) {
          const auto ci = bootstrap_ci(data, method, spec.bootstrap, spec.level, child_seed(rep_seed, 1 + j), 1);
          out[j].intervals = ci.intervals;
        }
      } else {
        if (posterior_failed) continue;
        if (!posterior) {
          HmcConfig hmc = spec.hmc;
          hmc.seed = child_seed(rep_seed, 1000);
          hmc.threads = 1;
          hmc.keep_latent = false;
          try {
            posterior = hmc_fit(data, spec.prior, hmc);
          } catch (const Error&) {
            posterior_failed = true;
            continue;
          }
        }
        report = method == Method::BE1 ? be1(*posterior) : be2(*posterior);
        if (with_intervals) out[j].intervals = report.interval;
      }
      if (score_moments) {
        const MomentSummary m = moments_of(report.alpha_hat);
        out[j].values = std::vector<double>{m.m1, m.m2, m.v1, m.v2, m.rho};
      } else {
        out[j].values = std::vector<double>(report.alpha_hat.begin(), report.alpha_hat.end());
      }
    } catch (const Error&) {
      out[j] = {};
    }
  }
  return out;
}

template <std::size_t K>
MetricsTable run(const ExperimentSpec& spec, const std::array<double, K>& truth,
                 const std::array<std::string, K>& names, bool with_intervals, bool score_moments) {
  if (spec.reps < 1) fail(ErrorKind::InvalidArgument, "reps must be >= 1");
  if (spec.n < 2) fail(ErrorKind::InvalidArgument, "n must be >= 2");
  if (spec.methods.empty()) fail(ErrorKind::InvalidArgument, "no methods requested");
  std::vector<std::vector<MethodOutcome>> outcomes(spec.reps);
  parallel_for(spec.reps, spec.threads, [&](std::size_t r) {
    const std::uint64_t rep_seed = child_seed(spec.seed, r);
    PairedSample data;
    try {
      data = draw_sample(spec.generator, spec.n, rep_seed);
    } catch (const Error&) {
      outcomes[r].assign(spec.methods.size(), MethodOutcome{});
      return;
    }
    outcomes[r] = fit_all(spec, data, child_seed(rep_seed, 7), with_intervals, score_moments);
  });

  MetricsTable table;
  table.n = spec.n;
  table.reps = spec.reps;
  for (std::size_t j = 0; j < spec.methods.size(); ++j) {
    for (std::size_t k = 0; k < K; ++k) {
      MetricCell cell;
      cell.method = spec.methods[j];
      cell.target = names[k];
      cell.truth = truth[k];
      double bias = 0.0;
      double mse = 0.0;
      double mape = 0.0;
      std::size_t hits = 0;
      std::size_t intervals = 0;
      for (std::size_t r = 0; r < spec.reps; ++r) {
        const MethodOutcome& o = outcomes[r][j];
        if (!o.values) {
          ++cell.failed;
          continue;
        }
        ++cell.reps;
        const double err = (*o.values)[k] - truth[k];
        bias += err;
        mse += err * err;
        mape += std::abs(err) / std::abs(truth[k]);
        if (o.intervals && k < 4) {
          ++intervals;
          if ((*o.intervals)[k].contains(truth[k])) ++hits;
        }
      }
      const double count = static_cast<double>(cell.reps);
      cell.bias = cell.reps ? bias / count : kNaN;
      cell.mse = cell.reps ? mse / count : kNaN;
      cell.mape = cell.reps ? mape / count : kNaN;
      cell.coverage = intervals ? static_cast<double>(hits) / static_cast<double>(intervals) : kNaN;
      table.cells.push_back(cell);
    }
  }
  return table;
}

}  // namespace

const MetricCell& MetricsTable::at(Method method, const std::string& target) const {
  for (const auto& c : cells) {
    if (c.method == method && c.target == target) return c;
  }
  fail(ErrorKind::InvalidArgument, "no cell for " + std::string(to_string(method)) + "/" + target);
}

PairedSample sample_logit_normal(const LogitNormalParams& params, std::size_t n, std::uint64_t seed) {
  const Cholesky2 l = cholesky(params.sigma);
  Rng rng(seed);
  PairedSample out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    out.push_back(logistic_open(params.mu[0] + l.l11 * z1), logistic_open(params.mu[1] + l.l21 * z1 + l.l22 * z2));
  }
  return out;
}

PairedSample draw_sample(const Generator& generator, std::size_t n, std::uint64_t seed) {
  if (const auto* alpha = std::get_if<AlphaParams>(&generator)) return sample(*alpha, n, seed);
  return sample_logit_normal(std::get<LogitNormalParams>(generator), n, seed);
}

MomentSummary logit_normal_moments(const LogitNormalParams& params) {
  static std::mutex mutex;
  static std::map<std::string, MomentSummary> memo;
  const std::string key = cache_key(params);
  {
    std::lock_guard lock(mutex);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
  }
  std::optional<std::filesystem::path> file;
  if (const char* dir = std::getenv("BIBETA_CACHE_DIR"); dir && *dir) {
    file = std::filesystem::path(dir) / ("logit_normal_" + key + ".txt");
    if (auto cached = read_cache(*file)) {
      std::lock_guard lock(mutex);
      memo.emplace(key, *cached);
      return *cached;
    }
  }
  const MomentSummary m = simulate_moments(params);
  if (file) write_cache(*file, m);
  std::lock_guard lock(mutex);
  memo.emplace(key, m);
  return m;
}

MetricsTable run_well_specified(const ExperimentSpec& spec) {
  const auto* alpha = std::get_if<AlphaParams>(&spec.generator);
  if (!alpha) fail(ErrorKind::InvalidArgument, "well-specified runs need a bivariate beta generator");
  return run<4>(spec, alpha->values(), alpha_targets(), true, false);
}

MetricsTable run_misspecified(const ExperimentSpec& spec) {
  const auto* params = std::get_if<LogitNormalParams>(&spec.generator);
  if (!params) fail(ErrorKind::InvalidArgument, "misspecified runs need a logit-normal generator");
  cholesky(params->sigma);
  const MomentSummary m = logit_normal_moments(*params);
  return run<5>(spec, {m.m1, m.m2, m.v1, m.v2, m.rho}, moment_targets(), false, true);
}

MetricsTable run_experiment(const ExperimentSpec& spec) {
  return std::holds_alternative<AlphaParams>(spec.generator) ? run_well_specified(spec) : run_misspecified(spec);
}

std::string_view to_string(Statistic statistic) noexcept {
  switch (statistic) {
    case Statistic::Pn: return "Pn";
    case Statistic::GnZ: return "Gn_z";
    case Statistic::M: return "M";
  }
  return "?";
}

Statistic parse_statistic(std::string_view name) {
  std::string lower;
  for (char c : name) {
    if (c != '_' && c != '-') lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (lower == "pn") return Statistic::Pn;
  if (lower == "gnz" || lower == "gn") return Statistic::GnZ;
  if (lower == "m") return Statistic::M;
  fail(ErrorKind::InvalidArgument, "unknown statistic '" + std::string(name) + "'");
}

DistributionSummary sampling_distribution(Statistic statistic, const Generator& generator, std::size_t n,
                                          std::size_t reps, std::uint64_t seed, std::size_t bins,
                                          std::size_t threads) {
  if (reps < 1) fail(ErrorKind::InvalidArgument, "reps must be >= 1");
  std::vector<double> values(reps, kNaN);
  parallel_for(reps, threads, [&](std::size_t r) {
    try {
      const PairedSample data = draw_sample(generator, n, child_seed(seed, r));
      switch (statistic) {
        case Statistic::Pn: values[r] = empirical_moments(data).rho; break;
        case Statistic::GnZ: values[r] = gn_test(data).z; break;
        case Statistic::M: values[r] = m_test(data).m_stat; break;
      }
    } catch (const Error&) {
    }
  });
  DistributionSummary out;
  out.statistic = statistic;
  out.reps = reps;
  for (double v : values) {
    if (std::isnan(v)) {
      ++out.failed;
    } else {
      out.values.push_back(v);
    }
  }
  if (out.values.empty()) return out;
  std::sort(out.values.begin(), out.values.end());
  for (double p : {0.01, 0.025, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.975, 0.99}) {
    out.quantiles.emplace_back(p, stats::quantile_sorted(out.values, p));
  }
  out.histogram = stats::histogram(out.values, std::max<std::size_t>(bins, 1));
  const auto outside = std::count_if(out.values.begin(), out.values.end(), [](double v) { return v < 0.0 || v > 0.2; });
  out.fraction_outside = static_cast<double>(outside) / static_cast<double>(out.values.size());
  out.ks_normal = stats::ks_test(out.values, stats::normal_cdf).statistic;
  return out;
}

}  // namespace bibeta
