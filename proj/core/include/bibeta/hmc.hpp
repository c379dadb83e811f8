#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace bibeta::hmc {

/// Returns log p(q) up to a constant and writes its gradient into `grad`.
/// Non-finite returns mark points outside the support.
using LogDensity = std::function<double(std::span<const double> q, std::span<double> grad)>;

struct SamplerConfig {
  std::size_t warmup = 2000;
  std::size_t iters = 2000;
  double target_accept = 0.9;
  int max_depth = 10;
  /// A transition is divergent when H - H0 exceeds this.
  double max_energy_error = 1000.0;
  bool adapt_step_size = true;
  bool adapt_metric = true;
  /// Starting step size; used unchanged when adaptation is off.
  double step_size = 1.0;
};

/// Post-warmup output of one chain.
struct ChainResult {
  std::size_t dim = 0;
  std::size_t iters = 0;
  /// Row-major iters x dim.
  std::vector<double> draws;
  std::size_t divergences = 0;
  double mean_accept_stat = 0.0;
  double step_size = 0.0;
  std::vector<double> inv_metric;
  std::size_t leapfrog_steps = 0;

  std::span<const double> draw(std::size_t i) const {
    return std::span<const double>(draws).subspan(i * dim, dim);
  }
};

/// Dynamic HMC with multinomial trajectory sampling and the generalized
/// no-U-turn criterion, a diagonal Euclidean metric, dual-averaging step
/// size adaptation and windowed metric adaptation during warmup.
ChainResult run_chain(const LogDensity& target, std::vector<double> init, const SamplerConfig& config,
                      std::uint64_t seed);

}  // namespace bibeta::hmc
