#include "bibeta/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "bibeta/density.hpp"
#include "bibeta/error.hpp"
#include "bibeta/hmc.hpp"
#include "bibeta/mcmc_diagnostics.hpp"
#include "bibeta/moments.hpp"
#include "bibeta/parallel.hpp"
#include "bibeta/sampling.hpp"
#include "bibeta/stats.hpp"

namespace bibeta {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kInitAttempts = 100;

double log_sigmoid(double w) {
  return w < 0.0 ? w - std::log1p(std::exp(w)) : -std::log1p(std::exp(-w));
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    fail(ErrorKind::InvalidArgument, std::string(what) + " must be positive and finite");
  }
}

}  // namespace

PriorSpec PriorSpec::gamma_iid(double shape, double rate, double lower) {
  return gamma({shape, shape, shape, shape}, {rate, rate, rate, rate}, lower);
}

PriorSpec PriorSpec::gamma(const Vec4& shape, const Vec4& rate, double lower) {
  PriorSpec out;
  out.kind = Kind::GammaIID;
  out.shape = shape;
  out.rate = rate;
  out.lower = lower;
  out.validate();
  return out;
}

PriorSpec PriorSpec::uniform_exponential(double cutoff, double mass) {
  PriorSpec out;
  out.kind = Kind::UniformExponential;
  out.cutoff = cutoff;
  out.mass = mass;
  out.validate();
  return out;
}

void PriorSpec::validate() const {
  if (kind == Kind::GammaIID) {
    for (std::size_t k = 0; k < 4; ++k) {
      require_positive(shape[k], "gamma shape");
      require_positive(rate[k], "gamma rate");
    }
    if (!(lower >= 0.0) || !std::isfinite(lower)) {
      fail(ErrorKind::InvalidArgument, "truncation bound must be finite and >= 0");
    }
  } else {
    require_positive(cutoff, "cutoff C");
    if (!(mass > 0.0 && mass < 1.0)) fail(ErrorKind::InvalidArgument, "mass p must lie in (0,1)");
  }
}

double PriorSpec::log_density(const Vec4& alpha) const {
  double total = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const double a = alpha[k];
    if (kind == Kind::GammaIID) {
      if (!(a > 0.0) || a < lower) return kNegInf;
      total += shape[k] * std::log(rate[k]) - boost::math::lgamma(shape[k]) + (shape[k] - 1.0) * std::log(a) -
               rate[k] * a;
      if (lower > 0.0) total -= std::log(boost::math::gamma_q(shape[k], rate[k] * lower));
    } else {
      if (!(a > 0.0)) return kNegInf;
      if (a < cutoff) {
        total += std::log(mass / cutoff);
      } else {
        const double lambda = tail_rate();
        total += std::log((1.0 - mass) * lambda) - lambda * (a - cutoff);
      }
    }
  }
  return total;
}

double PriorSpec::dlog_density(std::size_t k, double alpha_k) const {
  if (kind == Kind::GammaIID) return (shape[k] - 1.0) / alpha_k - rate[k];
  return alpha_k > cutoff ? -tail_rate() : 0.0;
}

Vec4 PriorSpec::draw(Rng& rng) const {
  Vec4 out{};
  for (std::size_t k = 0; k < 4; ++k) {
    if (kind == Kind::GammaIID) {
      if (lower > 0.0) {
        const double q0 = boost::math::gamma_q(shape[k], rate[k] * lower);
        out[k] = std::max(lower, boost::math::gamma_q_inv(shape[k], rng.uniform() * q0) / rate[k]);
      } else {
        out[k] = gamma_variate(rng, shape[k]) / rate[k];
      }
    } else if (rng.uniform() < mass) {
      out[k] = cutoff * rng.uniform();
    } else {
      out[k] = cutoff - std::log(rng.uniform()) / tail_rate();
    }
    out[k] = std::max(out[k], std::numeric_limits<double>::min());
  }
  return out;
}

AugmentedModel::AugmentedModel(const PairedSample& data, const PriorSpec& prior)
    : x_(data.x().begin(), data.x().end()), y_(data.y().begin(), data.y().end()), prior_(prior) {
  prior_.validate();
  const std::size_t n = x_.size();
  lower_.resize(n);
  width_.resize(n);
  log_width_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = x_[i];
    const double y = y_[i];
    if (x + y <= 1.0) {
      lower_[i] = 0.0;
      width_[i] = std::min(x, y);
    } else {
      lower_[i] = x + y - 1.0;
      width_[i] = 1.0 - std::max(x, y);
    }
    log_width_[i] = std::log(width_[i]);
  }
}

Vec4 AugmentedModel::alpha_of(std::span<const double> q) const {
  const double lo = prior_.support_lower();
  return {lo + std::exp(q[0]), lo + std::exp(q[1]), lo + std::exp(q[2]), lo + std::exp(q[3])};
}

std::vector<double> AugmentedModel::latent_of(std::span<const double> q) const {
  std::vector<double> u(size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    u[i] = lower_[i] + width_[i] * std::exp(log_sigmoid(q[4 + i]));
  }
  return u;
}

std::vector<double> AugmentedModel::unconstrained(const Vec4& alpha, std::span<const double> u) const {
  if (u.size() != size()) fail(ErrorKind::InvalidArgument, "latent vector length does not match the data");
  const double lo = prior_.support_lower();
  std::vector<double> q(dimension());
  for (std::size_t k = 0; k < 4; ++k) {
    if (!(alpha[k] > lo)) fail(ErrorKind::InvalidArgument, "alpha must exceed the prior support bound");
    q[k] = std::log(alpha[k] - lo);
  }
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double t = (u[i] - lower_[i]) / width_[i];
    if (!(t > 0.0 && t < 1.0)) fail(ErrorKind::InvalidArgument, "latent value outside its admissible interval");
    q[4 + i] = std::log(t) - std::log1p(-t);
  }
  return q;
}

double AugmentedModel::log_jacobian(std::span<const double> q) const {
  double total = q[0] + q[1] + q[2] + q[3];
  for (std::size_t i = 0; i < size(); ++i) {
    const double w = q[4 + i];
    total += log_width_[i] + log_sigmoid(w) + log_sigmoid(-w);
  }
  return total;
}

double AugmentedModel::log_density(std::span<const double> q) const {
  std::vector<double> grad(dimension());
  return log_density(q, grad);
}

double AugmentedModel::log_density(std::span<const double> q, std::span<double> grad) const {
  const std::size_t n = size();
  if (q.size() != dimension() || grad.size() != dimension()) {
    fail(ErrorKind::InvalidArgument, "state dimension does not match the data");
  }
  std::fill(grad.begin(), grad.end(), 0.0);
  const Vec4 alpha = alpha_of(q);
  Vec4 alpha_minus_lo{};
  for (std::size_t k = 0; k < 4; ++k) {
    alpha_minus_lo[k] = std::exp(q[k]);
    if (!std::isfinite(alpha[k]) || !(alpha_minus_lo[k] > 0.0)) return kNegInf;
  }

  Vec4 log_sums{};
  double jacobian = q[0] + q[1] + q[2] + q[3];
  for (std::size_t i = 0; i < n; ++i) {
    const double x = x_[i];
    const double y = y_[i];
    const double w = q[4 + i];
    const double log_s = log_sigmoid(w);
    const double log_1ms = log_sigmoid(-w);
    const double s = std::exp(log_s);
    const double one_m_s = std::exp(log_1ms);
    const double width = width_[i];
    const double du = width * s * one_m_s;

    double log_a;
    double log_d;
    double ra;
    double rd;
    if (lower_[i] == 0.0) {
      log_a = log_width_[i] + log_s;
      ra = one_m_s;
      const double d = (1.0 - x - y) + width * s;
      log_d = std::log(d);
      rd = du / d;
    } else {
      log_d = log_width_[i] + log_s;
      rd = one_m_s;
      const double a = lower_[i] + width * s;
      log_a = std::log(a);
      ra = du / a;
    }
    double log_b;
    double log_c;
    double rb;
    double rc;
    if (x <= y) {
      log_b = log_width_[i] + log_1ms;
      rb = s;
      const double c = (y - x) + width * one_m_s;
      log_c = std::log(c);
      rc = du / c;
    } else {
      log_c = log_width_[i] + log_1ms;
      rc = s;
      const double b = (x - y) + width * one_m_s;
      log_b = std::log(b);
      rb = du / b;
    }

    log_sums[0] += log_a;
    log_sums[1] += log_b;
    log_sums[2] += log_c;
    log_sums[3] += log_d;
    jacobian += log_width_[i] + log_s + log_1ms;
    grad[4 + i] = (alpha[0] - 1.0) * ra - (alpha[1] - 1.0) * rb - (alpha[2] - 1.0) * rc +
                  (alpha[3] - 1.0) * rd + (one_m_s - s);
  }

  const double nd = static_cast<double>(n);
  const double total_alpha = alpha[0] + alpha[1] + alpha[2] + alpha[3];
  const double psi_total = boost::math::digamma(total_alpha);
  double data_term = -nd * log_beta_function(alpha);
  for (std::size_t k = 0; k < 4; ++k) {
    data_term += (alpha[k] - 1.0) * log_sums[k];
    const double dalpha = log_sums[k] - nd * (boost::math::digamma(alpha[k]) - psi_total) +
                          prior_.dlog_density(k, alpha[k]);
    grad[k] = alpha_minus_lo[k] * dalpha + 1.0;
  }
  const double prior_term = prior_.log_density(alpha);
  const double total = data_term + prior_term + jacobian;
  if (!std::isfinite(total)) {
    std::fill(grad.begin(), grad.end(), 0.0);
    return kNegInf;
  }
  return total;
}

std::vector<double> flatten(const AugmentedState& state) {
  std::vector<double> q(state.theta.begin(), state.theta.end());
  q.insert(q.end(), state.w.begin(), state.w.end());
  return q;
}

AugmentedState unflatten(std::span<const double> q) {
  if (q.size() < 4) fail(ErrorKind::InvalidArgument, "state needs at least four coordinates");
  AugmentedState out;
  std::copy_n(q.begin(), 4, out.theta.begin());
  out.w.assign(q.begin() + 4, q.end());
  return out;
}

double log_augmented_posterior(const AugmentedState& state, const PairedSample& data, const PriorSpec& prior,
                               AugmentedGradient* gradient) {
  if (state.w.size() != data.size()) fail(ErrorKind::InvalidArgument, "state dimension does not match the data");
  const AugmentedModel model(data, prior);
  const auto q = flatten(state);
  std::vector<double> grad(q.size());
  const double value = model.log_density(q, grad);
  if (gradient) {
    std::copy_n(grad.begin(), 4, gradient->theta.begin());
    gradient->w.assign(grad.begin() + 4, grad.end());
  }
  return value;
}

double log_augmented_density(const Vec4& alpha, std::span<const double> u, const PairedSample& data,
                             const PriorSpec& prior) {
  if (u.size() != data.size()) fail(ErrorKind::InvalidArgument, "latent vector length does not match the data");
  double total = -static_cast<double>(data.size()) * log_beta_function(alpha) + prior.log_density(alpha);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double x = data.x()[i];
    const double y = data.y()[i];
    total += (alpha[0] - 1.0) * std::log(u[i]) + (alpha[1] - 1.0) * std::log(x - u[i]) +
             (alpha[2] - 1.0) * std::log(y - u[i]) + (alpha[3] - 1.0) * std::log(1.0 - x - y + u[i]);
  }
  return total;
}

PosteriorDraws hmc_fit(const PairedSample& data, const PriorSpec& prior, const HmcConfig& config) {
  if (data.size() < 2) fail(ErrorKind::InvalidArgument, "Bayesian fit needs at least two pairs");
  if (config.chains == 0 || config.iters == 0) fail(ErrorKind::InvalidArgument, "need at least one chain and draw");
  const AugmentedModel model(data, prior);
  const std::size_t dim = model.dimension();
  const hmc::LogDensity target = [&model](std::span<const double> q, std::span<double> g) {
    return model.log_density(q, g);
  };

  hmc::SamplerConfig sampler;
  sampler.warmup = config.warmup;
  sampler.iters = config.iters;
  sampler.target_accept = config.target_accept;
  sampler.max_depth = config.max_depth;

  std::vector<hmc::ChainResult> results(config.chains);
  parallel_for(config.chains, config.threads, [&](std::size_t c) {
    Rng init_rng(child_seed(config.seed, 2 * c));
    std::vector<double> init(dim, 0.0);
    std::vector<double> grad(dim);
    bool ok = false;
    for (std::size_t attempt = 0; attempt < kInitAttempts && !ok; ++attempt) {
      for (std::size_t k = 0; k < 4; ++k) init[k] = 2.0 * init_rng.uniform() - 1.0;
      const double lp = model.log_density(init, grad);
      ok = std::isfinite(lp) && std::all_of(grad.begin(), grad.end(), [](double g) { return std::isfinite(g); });
    }
    if (!ok) fail(ErrorKind::ChainFailure, "no finite initial point after 100 attempts");
    results[c] = hmc::run_chain(target, init, sampler, child_seed(config.seed, 2 * c + 1));
  });

  PosteriorDraws out;
  out.chains = config.chains;
  out.warmup = config.warmup;
  out.iters = config.iters;
  out.latent_dim = data.size();
  out.draws.reserve(config.chains * config.iters);
  if (config.keep_latent) out.latent_draws.emplace().reserve(config.chains * config.iters * data.size());
  std::array<mcmc::ChainDraws, 4> per_coord;
  for (auto& pc : per_coord) pc.assign(config.chains, std::vector<double>(config.iters));
  double accept = 0.0;
  for (std::size_t c = 0; c < config.chains; ++c) {
    const auto& r = results[c];
    out.divergence_count += r.divergences;
    accept += r.mean_accept_stat;
    out.step_sizes.push_back(r.step_size);
    for (std::size_t i = 0; i < config.iters; ++i) {
      const auto q = r.draw(i);
      const Vec4 a = model.alpha_of(q);
      out.draws.push_back(a);
      for (std::size_t k = 0; k < 4; ++k) per_coord[k][c][i] = a[k];
      if (config.keep_latent) {
        const auto u = model.latent_of(q);
        out.latent_draws->insert(out.latent_draws->end(), u.begin(), u.end());
      }
    }
  }
  out.accept_rate = accept / static_cast<double>(config.chains);
  for (std::size_t k = 0; k < 4; ++k) {
    if (config.iters >= 4) {
      out.rhat[k] = mcmc::split_rhat(per_coord[k]);
      out.ess[k] = mcmc::bulk_ess(per_coord[k]);
    } else {
      out.rhat[k] = kNaN;
      out.ess[k] = kNaN;
    }
  }
  return out;
}

namespace {

EstimateReport bayes_estimate(const PosteriorDraws& draws, Method method) {
  if (draws.draws.empty()) fail(ErrorKind::InvalidArgument, "no posterior draws");
  EstimateReport out;
  out.method = method;
  out.objective = kNaN;
  Intervals intervals{};
  std::vector<double> column(draws.draws.size());
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t i = 0; i < column.size(); ++i) column[i] = draws.draws[i][k];
    std::sort(column.begin(), column.end());
    out.alpha_hat[k] = method == Method::BE1 ? stats::mean(column) : stats::quantile_sorted(column, 0.5);
    intervals[k] = {stats::quantile_sorted(column, 0.025), stats::quantile_sorted(column, 0.975)};
  }
  out.interval = intervals;
  out.interval_level = 0.95;
  return out;
}

}  // namespace

EstimateReport be1(const PosteriorDraws& draws) { return bayes_estimate(draws, Method::BE1); }
EstimateReport be2(const PosteriorDraws& draws) { return bayes_estimate(draws, Method::BE2); }

int sbc_rank(std::span<const double> draws, double truth) {
  return static_cast<int>(std::count_if(draws.begin(), draws.end(), [truth](double d) { return d < truth; }));
}

std::vector<std::size_t> thin_indices(std::size_t total, std::size_t L) {
  if (L == 0 || L > total) fail(ErrorKind::InvalidArgument, "need 1 <= L <= number of draws");
  const std::size_t stride = total / L;
  std::vector<std::size_t> out(L);
  for (std::size_t j = 0; j < L; ++j) out[j] = j * stride;
  return out;
}

SBCReport sbc(const PriorSpec& prior, const SbcConfig& config) {
  if (config.L < 1 || config.N < 1) fail(ErrorKind::InvalidArgument, "SBC needs L >= 1 and N >= 1");
  prior.validate();
  struct Outcome {
    Vec4 truth{};
    std::optional<std::array<int, 4>> ranks;
    bool divergent = false;
  };
  std::vector<Outcome> outcomes(config.N);
  parallel_for(config.N, config.threads, [&](std::size_t e) {
    Rng rng(child_seed(config.seed, e));
    Outcome& slot = outcomes[e];
    slot.truth = prior.draw(rng);
    const std::uint64_t data_seed = rng();
    HmcConfig hmc = config.hmc;
    hmc.seed = rng();
    hmc.threads = 1;
    hmc.keep_latent = false;
    try {
      const PairedSample data = sample(AlphaParams(slot.truth), config.n, data_seed);
      const PosteriorDraws post = hmc_fit(data, prior, hmc);
      const auto idx = thin_indices(post.draws.size(), config.L);
      std::array<int, 4> ranks{};
      std::vector<double> thinned(idx.size());
      for (std::size_t k = 0; k < 4; ++k) {
        for (std::size_t j = 0; j < idx.size(); ++j) thinned[j] = post.draws[idx[j]][k];
        ranks[k] = sbc_rank(thinned, slot.truth[k]);
      }
      slot.ranks = ranks;
      slot.divergent = post.divergence_count > 0;
    } catch (const Error&) {
      slot.ranks.reset();
    }
  });

  SBCReport report;
  report.L = config.L;
  report.N = config.N;
  report.n = config.n;
  std::array<std::vector<std::size_t>, 4> counts;
  for (auto& c : counts) c.assign(config.L + 1, 0);
  for (const auto& o : outcomes) {
    if (!o.ranks) {
      ++report.dropped;
      continue;
    }
    report.ranks.push_back(*o.ranks);
    report.truths.push_back(o.truth);
    if (o.divergent) ++report.divergent_experiments;
    for (std::size_t k = 0; k < 4; ++k) ++counts[k][static_cast<std::size_t>((*o.ranks)[k])];
  }
  for (std::size_t k = 0; k < 4; ++k) {
    report.p_values[k] = report.ranks.empty() ? kNaN : stats::chi_square_uniform_pvalue(counts[k]);
  }
  return report;
}

PpcReport ppc(const PosteriorDraws& draws, const PairedSample& data) {
  if (draws.draws.empty()) fail(ErrorKind::InvalidArgument, "no posterior draws");
  const MomentSummary observed = empirical_moments(data);
  const std::size_t m = draws.draws.size();
  std::array<std::vector<double>, 5> implied;
  for (auto& v : implied) v.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const MomentSummary s = moments_of(draws.draws[i]);
    implied[0][i] = s.m1;
    implied[1][i] = s.m2;
    implied[2][i] = s.v1;
    implied[3][i] = s.v2;
    implied[4][i] = s.rho;
  }
  const std::array<double, 5> obs{observed.m1, observed.m2, observed.v1, observed.v2, observed.rho};
  static constexpr const char* kNames[] = {"m1", "m2", "v1", "v2", "rho"};
  PpcReport report;
  for (std::size_t j = 0; j < 5; ++j) {
    auto& v = implied[j];
    std::sort(v.begin(), v.end());
    MomentCheck& check = report.moments[j];
    check.name = kNames[j];
    check.lower = stats::quantile_sorted(v, 0.025);
    check.median = stats::quantile_sorted(v, 0.5);
    check.upper = stats::quantile_sorted(v, 0.975);
    check.observed = obs[j];
    check.inside = obs[j] >= check.lower && obs[j] <= check.upper;
  }
  return report;
}

std::vector<double> prior_predictive_correlation(const PriorSpec& prior, std::size_t count, std::uint64_t seed) {
  if (count == 0) fail(ErrorKind::InvalidArgument, "need at least one draw");
  prior.validate();
  Rng rng(seed);
  std::vector<double> out(count);
  for (auto& rho : out) rho = moments_of(prior.draw(rng)).rho;
  return out;
}

}  // namespace bibeta
