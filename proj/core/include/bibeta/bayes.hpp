#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bibeta/estimators.hpp"
#include "bibeta/random.hpp"
#include "bibeta/types.hpp"

namespace bibeta {

/// Independent prior on each alpha coordinate.
///
/// GammaIID: Gamma(shape_k, rate_k), optionally truncated to alpha >= lower.
/// UniformExponential: mass p spread uniformly on (0, C) and an exponential
/// tail of rate lambda = p / (C (1 - p)) beyond C, so the density is
/// continuous at C.
struct PriorSpec {
  enum class Kind { GammaIID, UniformExponential };

  Kind kind = Kind::GammaIID;
  Vec4 shape{1.0, 1.0, 1.0, 1.0};
  Vec4 rate{1.0, 1.0, 1.0, 1.0};
  double lower = 0.0;
  double cutoff = 1.0;
  double mass = 0.5;

  static PriorSpec gamma_iid(double shape = 1.0, double rate = 1.0, double lower = 0.0);
  static PriorSpec gamma(const Vec4& shape, const Vec4& rate, double lower = 0.0);
  static PriorSpec uniform_exponential(double cutoff, double mass);

  /// Throws InvalidArgument when the hyperparameters are out of range.
  void validate() const;
  double tail_rate() const { return mass / (cutoff * (1.0 - mass)); }
  /// Lower end of the support of every coordinate.
  double support_lower() const { return kind == Kind::GammaIID ? lower : 0.0; }

  /// Normalized log density of the four coordinates; -inf off the support.
  double log_density(const Vec4& alpha) const;
  /// d/d alpha_k of the log density of coordinate k (0 at the kink of the
  /// uniform-exponential prior).
  double dlog_density(std::size_t k, double alpha_k) const;
  Vec4 draw(Rng& rng) const;
};

/// Unconstrained coordinates of the augmented model: theta_k = log(alpha_k -
/// lower) and w_i = logit of u_i rescaled to (L_i, U_i), where
/// L_i = max(0, x_i + y_i - 1) and U_i = min(x_i, y_i).
struct AugmentedState {
  Vec4 theta{};
  std::vector<double> w;
};

/// Log posterior of (alpha, u) given the data, in unconstrained coordinates.
/// Caches the per-datum bounds; cheap to copy.
class AugmentedModel {
 public:
  AugmentedModel(const PairedSample& data, const PriorSpec& prior);

  std::size_t size() const noexcept { return x_.size(); }
  std::size_t dimension() const noexcept { return 4 + x_.size(); }
  const PriorSpec& prior() const noexcept { return prior_; }

  /// Log density (including Jacobians) at q = (theta, w), gradient into grad.
  double log_density(std::span<const double> q, std::span<double> grad) const;
  double log_density(std::span<const double> q) const;

  Vec4 alpha_of(std::span<const double> q) const;
  std::vector<double> latent_of(std::span<const double> q) const;
  /// Inverse transform. Requires alpha above the prior support bound and
  /// u_i strictly inside (L_i, U_i).
  std::vector<double> unconstrained(const Vec4& alpha, std::span<const double> u) const;
  double log_jacobian(std::span<const double> q) const;

  double latent_lower(std::size_t i) const { return lower_[i]; }
  double latent_upper(std::size_t i) const { return lower_[i] + width_[i]; }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> lower_;
  std::vector<double> width_;
  std::vector<double> log_width_;
  PriorSpec prior_;
};

std::vector<double> flatten(const AugmentedState& state);
AugmentedState unflatten(std::span<const double> q);

/// Log posterior in (theta, w) with its exact gradient.
struct AugmentedGradient {
  Vec4 theta{};
  std::vector<double> w;
};
double log_augmented_posterior(const AugmentedState& state, const PairedSample& data, const PriorSpec& prior,
                               AugmentedGradient* gradient = nullptr);

/// Log of prod_i f(u_i, x_i, y_i | alpha) * prior(alpha) without Jacobian
/// terms.
double log_augmented_density(const Vec4& alpha, std::span<const double> u, const PairedSample& data,
                             const PriorSpec& prior);

struct HmcConfig {
  std::size_t chains = 4;
  std::size_t warmup = 2000;
  std::size_t iters = 2000;
  double target_accept = 0.9;
  int max_depth = 10;
  std::uint64_t seed = kDefaultSeed;
  std::size_t threads = 1;
  bool keep_latent = false;
};

struct PosteriorDraws {
  /// Chain-major: draw i of chain c is at c * iters + i.
  std::vector<Vec4> draws;
  /// Row-major (chains * iters) x n when requested.
  std::optional<std::vector<double>> latent_draws;
  std::size_t latent_dim = 0;
  std::size_t divergence_count = 0;
  double accept_rate = 0.0;
  Vec4 rhat{};
  Vec4 ess{};
  std::size_t chains = 0;
  std::size_t warmup = 0;
  std::size_t iters = 0;
  std::vector<double> step_sizes;
};

/// Fits the augmented posterior with dynamic HMC. Chain c uses the child
/// stream c of config.seed, so results do not depend on config.threads.
PosteriorDraws hmc_fit(const PairedSample& data, const PriorSpec& prior, const HmcConfig& config = {});

/// Posterior mean with equal-tailed 95% credible intervals.
EstimateReport be1(const PosteriorDraws& draws);
/// Posterior median with equal-tailed 95% credible intervals.
EstimateReport be2(const PosteriorDraws& draws);

/// Number of `draws` strictly below `truth`.
int sbc_rank(std::span<const double> draws, double truth);
/// Indices of L draws taken at stride total / L from the front.
std::vector<std::size_t> thin_indices(std::size_t total, std::size_t L);

struct SBCReport {
  std::size_t L = 0;
  std::size_t N = 0;
  std::size_t n = 0;
  /// One row per experiment that completed, values in [0, L].
  std::vector<std::array<int, 4>> ranks;
  Vec4 p_values{};
  std::size_t dropped = 0;
  /// Experiments with at least one divergent transition.
  std::size_t divergent_experiments = 0;
  std::vector<Vec4> truths;
};

struct SbcConfig {
  std::size_t n = 50;
  std::size_t L = 19;
  std::size_t N = 200;
  HmcConfig hmc{};
  std::uint64_t seed = kDefaultSeed;
  std::size_t threads = 1;
};

SBCReport sbc(const PriorSpec& prior, const SbcConfig& config);

struct MomentCheck {
  std::string name;
  double lower = 0.0;
  double median = 0.0;
  double upper = 0.0;
  double observed = 0.0;
  bool inside = false;
};

/// Posterior predictive check of (m1, m2, v1, v2, rho) against the data.
struct PpcReport {
  std::array<MomentCheck, 5> moments;
};

PpcReport ppc(const PosteriorDraws& draws, const PairedSample& data);

/// Correlations implied by `count` alpha draws from the prior.
std::vector<double> prior_predictive_correlation(const PriorSpec& prior, std::size_t count,
                                                 std::uint64_t seed = kDefaultSeed);

}  // namespace bibeta
