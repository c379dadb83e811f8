#include "bibeta/mcmc_diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bibeta/error.hpp"
#include "bibeta/stats.hpp"

namespace bibeta::mcmc {

namespace {

ChainDraws split_chains(const ChainDraws& chains) {
  if (chains.empty()) fail(ErrorKind::InvalidArgument, "no chains supplied");
  const std::size_t n = chains.front().size();
  for (const auto& c : chains) {
    if (c.size() != n) fail(ErrorKind::InvalidArgument, "chains must have equal length");
  }
  if (n < 4) fail(ErrorKind::InvalidArgument, "need at least 4 draws per chain");
  const std::size_t half = n / 2;
  ChainDraws out;
  out.reserve(2 * chains.size());
  for (const auto& c : chains) {
    out.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
    out.emplace_back(c.end() - static_cast<std::ptrdiff_t>(half), c.end());
  }
  return out;
}

ChainDraws rank_normalize(const ChainDraws& chains) {
  const std::size_t m = chains.size();
  const std::size_t n = chains.front().size();
  const std::size_t total = m * n;
  std::vector<std::pair<double, std::size_t>> pooled;
  pooled.reserve(total);
  for (std::size_t c = 0; c < m; ++c) {
    for (std::size_t i = 0; i < n; ++i) pooled.emplace_back(chains[c][i], c * n + i);
  }
  std::sort(pooled.begin(), pooled.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<double> ranks(total);
  for (std::size_t i = 0; i < total;) {
    std::size_t j = i;
    while (j + 1 < total && pooled[j + 1].first == pooled[i].first) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[pooled[k].second] = avg;
    i = j + 1;
  }
  const double s = static_cast<double>(total);
  ChainDraws out(m, std::vector<double>(n));
  for (std::size_t c = 0; c < m; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      out[c][i] = stats::normal_quantile((ranks[c * n + i] - 0.375) / (s + 0.25));
    }
  }
  return out;
}

bool all_constant(const ChainDraws& chains) {
  const double first = chains.front().front();
  for (const auto& c : chains) {
    for (double v : c) {
      if (v != first) return false;
    }
  }
  return true;
}

std::vector<double> autocovariance(const std::vector<double>& x) {
  const std::size_t n = x.size();
  const double mu = stats::mean(x);
  std::vector<double> acov(n, 0.0);
  for (std::size_t lag = 0; lag < n; ++lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += (x[i] - mu) * (x[i + lag] - mu);
    acov[lag] = s / static_cast<double>(n);
  }
  return acov;
}

double rhat_of(const ChainDraws& chains) {
  const std::size_t m = chains.size();
  const double n = static_cast<double>(chains.front().size());
  std::vector<double> means(m);
  std::vector<double> vars(m);
  for (std::size_t c = 0; c < m; ++c) {
    means[c] = stats::mean(chains[c]);
    vars[c] = stats::variance(chains[c]);
  }
  const double w = stats::mean(vars);
  const double b = n * stats::variance(means);
  const double var_plus = (n - 1.0) / n * w + b / n;
  return std::sqrt(var_plus / w);
}

double ess_of(const ChainDraws& chains) {
  const std::size_t m = chains.size();
  const std::size_t n = chains.front().size();
  const double nd = static_cast<double>(n);
  std::vector<std::vector<double>> acov(m);
  std::vector<double> means(m);
  std::vector<double> vars(m);
  for (std::size_t c = 0; c < m; ++c) {
    acov[c] = autocovariance(chains[c]);
    means[c] = stats::mean(chains[c]);
    vars[c] = acov[c][0] * nd / (nd - 1.0);
  }
  const double mean_var = stats::mean(vars);
  double var_plus = mean_var * (nd - 1.0) / nd;
  if (m > 1) var_plus += stats::variance(means);
  auto mean_acov = [&](std::size_t t) {
    double s = 0.0;
    for (std::size_t c = 0; c < m; ++c) s += acov[c][t];
    return s / static_cast<double>(m);
  };

  std::vector<double> rho(n, 0.0);
  double rho_even = 1.0;
  rho[0] = rho_even;
  double rho_odd = 1.0 - (mean_var - mean_acov(1)) / var_plus;
  rho[1] = rho_odd;
  std::size_t t = 1;
  while (t < n - 5 && rho_even + rho_odd > 0.0) {
    rho_even = 1.0 - (mean_var - mean_acov(t + 1)) / var_plus;
    rho_odd = 1.0 - (mean_var - mean_acov(t + 2)) / var_plus;
    if (rho_even + rho_odd >= 0.0) {
      rho[t + 1] = rho_even;
      rho[t + 2] = rho_odd;
    }
    t += 2;
  }
  const std::size_t max_t = t;
  if (rho_even > 0.0) rho[max_t + 1] = rho_even;

  for (std::size_t k = 1; k + 3 <= max_t; k += 2) {
    if (rho[k + 1] + rho[k + 2] > rho[k - 1] + rho[k]) {
      rho[k + 1] = 0.5 * (rho[k - 1] + rho[k]);
      rho[k + 2] = rho[k + 1];
    }
  }

  const double total = static_cast<double>(m) * nd;
  double tau = -1.0 + 2.0 * std::accumulate(rho.begin(), rho.begin() + static_cast<std::ptrdiff_t>(max_t), 0.0) +
               rho[max_t + 1];
  tau = std::max(tau, 1.0 / std::log10(total));
  return std::min(total / tau, total);
}

}  // namespace

double split_rhat(const ChainDraws& chains) {
  const ChainDraws split = split_chains(chains);
  if (all_constant(split)) return std::numeric_limits<double>::quiet_NaN();
  return rhat_of(rank_normalize(split));
}

double bulk_ess(const ChainDraws& chains) {
  const ChainDraws split = split_chains(chains);
  if (all_constant(split)) return std::numeric_limits<double>::quiet_NaN();
  return ess_of(rank_normalize(split));
}

}  // namespace bibeta::mcmc
