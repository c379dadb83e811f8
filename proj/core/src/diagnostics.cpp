#include "bibeta/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "bibeta/error.hpp"
#include "bibeta/estimators.hpp"
#include "bibeta/moments.hpp"
#include "bibeta/parallel.hpp"
#include "bibeta/stats.hpp"

namespace bibeta {

namespace {

struct MCore {
  Vec4 beta{};
  double bar_alpha = 0.0;
  double m = 0.0;
};

MCore m_core(const MomentSummary& em) {
  const SolverOutcome solved = solve_four_moments(em.m1, em.m2, em.v1, em.rho);
  if (!(solved.bar_alpha > 0.0)) fail(ErrorKind::InfeasibleVariance, "implied parameter sum is not positive");
  MCore out;
  out.bar_alpha = solved.bar_alpha;
  for (std::size_t k = 0; k < 4; ++k) out.beta[k] = solved.alpha[k] / solved.bar_alpha;
  out.m = *std::min_element(out.beta.begin(), out.beta.end());
  return out;
}

}  // namespace

GnReport gn_test(const PairedSample& sample) {
  const std::size_t n = sample.size();
  if (n < 5) fail(ErrorKind::InvalidArgument, "G_n test needs at least five pairs");
  const auto xs = sample.x();
  const auto ys = sample.y();
  const double mx = stats::mean(xs);
  const double my = stats::mean(ys);
  const double vx = stats::variance(xs);
  const double vy = stats::variance(ys);

  std::vector<std::array<double, 4>> rows(n);
  std::array<double, 4> centre{};
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    rows[i] = {xs[i], dx * dx, ys[i], dy * dy};
    for (std::size_t j = 0; j < 4; ++j) centre[j] += rows[i][j];
  }
  for (double& c : centre) c /= static_cast<double>(n);
  std::array<std::array<double, 4>, 4> cov{};
  for (const auto& row : rows) {
    for (std::size_t a = 0; a < 4; ++a) {
      for (std::size_t b = 0; b < 4; ++b) cov[a][b] += (row[a] - centre[a]) * (row[b] - centre[b]);
    }
  }
  for (auto& line : cov) {
    for (double& v : line) v /= static_cast<double>(n - 1);
  }

  const std::array<double, 4> grad = {(1.0 - 2.0 * mx) * vy, -(1.0 - my) * my, -vx * (1.0 - 2.0 * my),
                                      mx * (1.0 - mx)};
  double var = 0.0;
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = 0; b < 4; ++b) var += grad[a] * cov[a][b] * grad[b];
  }
  if (!(var > 0.0) || !std::isfinite(var)) fail(ErrorKind::DegenerateVariance, "estimated G_n variance is zero");

  GnReport out;
  out.g_n = mx * (1.0 - mx) * vy - vx * (1.0 - my) * my;
  out.sigma_hat = std::sqrt(var);
  out.z = std::sqrt(static_cast<double>(n)) * out.g_n / out.sigma_hat;
  out.p_value = std::min(1.0, 2.0 * stats::normal_cdf(-std::abs(out.z)));
  return out;
}

MReport m_test(const MomentSummary& moments, double c) {
  const MCore core = m_core(moments);
  MReport out;
  out.beta_hat = core.beta;
  out.bar_alpha = core.bar_alpha;
  out.m_stat = core.m;
  out.threshold = c;
  out.reject = core.m <= c;
  return out;
}

MReport m_test(const PairedSample& sample, double c, std::optional<std::size_t> B, std::uint64_t seed,
               std::size_t threads) {
  MReport out = m_test(empirical_moments(sample), c);
  if (!B) return out;
  if (*B < 2) fail(ErrorKind::InvalidArgument, "bootstrap needs B >= 2");

  const std::size_t n = sample.size();
  std::vector<double> stats_m(*B, std::nan(""));
  parallel_for(*B, threads, [&](std::size_t b) {
    Rng rng(child_seed(seed, b));
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) r = rng.index(n);
    try {
      stats_m[b] = m_core(empirical_moments(sample.select(rows))).m;
    } catch (const Error&) {
    }
  });
  MBootstrap boot;
  boot.B = *B;
  std::vector<double> ok;
  for (double v : stats_m) {
    if (std::isnan(v)) {
      ++boot.failed;
    } else {
      ok.push_back(v);
    }
  }
  if (ok.empty()) fail(ErrorKind::InfeasibleVariance, "every bootstrap resample had a non-positive sum");
  std::sort(ok.begin(), ok.end());
  boot.q01 = stats::quantile_sorted(ok, 0.01);
  boot.q05 = stats::quantile_sorted(ok, 0.05);
  boot.q10 = stats::quantile_sorted(ok, 0.10);
  out.bootstrap = boot;
  return out;
}

}  // namespace bibeta
