#include "bibeta/hmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bibeta/error.hpp"
#include "bibeta/random.hpp"

namespace bibeta::hmc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void add_to(std::vector<double>& acc, const std::vector<double>& v) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
}

std::vector<double> sum_of(const std::vector<double>& a, const std::vector<double>& b) {
  auto out = a;
  add_to(out, b);
  return out;
}

struct PhasePoint {
  std::vector<double> q;
  std::vector<double> p;
  std::vector<double> grad;
  double logp = kNegInf;
};

/// Dual averaging of log step size toward a target mean acceptance statistic.
class StepSizeAdapter {
 public:
  explicit StepSizeAdapter(double target) : target_(target) {}

  void set_mu(double mu) { mu_ = mu; }
  void restart() {
    counter_ = 0.0;
    s_bar_ = 0.0;
    x_bar_ = 0.0;
  }
  double learn(double accept_stat) {
    counter_ += 1.0;
    accept_stat = std::min(1.0, accept_stat);
    const double eta = 1.0 / (counter_ + kT0);
    s_bar_ = (1.0 - eta) * s_bar_ + eta * (target_ - accept_stat);
    const double x = mu_ - s_bar_ * std::sqrt(counter_) / kGamma;
    const double x_eta = std::pow(counter_, -kKappa);
    x_bar_ = (1.0 - x_eta) * x_bar_ + x_eta * x;
    return std::exp(x);
  }
  double final_step_size() const { return std::exp(x_bar_); }

 private:
  static constexpr double kGamma = 0.05;
  static constexpr double kKappa = 0.75;
  static constexpr double kT0 = 10.0;
  double target_;
  double mu_ = std::log(10.0);
  double counter_ = 0.0;
  double s_bar_ = 0.0;
  double x_bar_ = 0.0;
};

/// Windowed diagonal metric estimation: a fast initial buffer, doubling slow
/// windows, and a terminal fast buffer.
class MetricAdapter {
 public:
  MetricAdapter(std::size_t dim, std::size_t warmup) : warmup_(warmup), mean_(dim), m2_(dim) {
    if (warmup < 20) {
      enabled_ = false;
      return;
    }
    if (init_buffer_ + base_window_ + term_buffer_ > warmup) {
      init_buffer_ = static_cast<std::size_t>(0.15 * static_cast<double>(warmup));
      term_buffer_ = static_cast<std::size_t>(0.1 * static_cast<double>(warmup));
      base_window_ = warmup - (init_buffer_ + term_buffer_);
    }
    window_size_ = base_window_;
    next_window_ = init_buffer_ + window_size_ - 1;
  }

  /// Feeds one warmup draw; returns true when `inv_metric` was updated.
  bool learn(const std::vector<double>& q, std::vector<double>& inv_metric) {
    if (!enabled_) return false;
    if (in_window()) add(q);
    if (end_of_window()) {
      compute_next_window();
      const double n = static_cast<double>(count_);
      for (std::size_t i = 0; i < inv_metric.size(); ++i) {
        const double var = count_ > 1 ? m2_[i] / (n - 1.0) : 1.0;
        inv_metric[i] = (n / (n + 5.0)) * var + 1e-3 * (5.0 / (n + 5.0));
      }
      reset();
      ++counter_;
      return true;
    }
    ++counter_;
    return false;
  }

 private:
  bool in_window() const {
    return counter_ >= init_buffer_ && counter_ < warmup_ - term_buffer_ && counter_ != warmup_;
  }
  bool end_of_window() const { return counter_ == next_window_ && counter_ != warmup_; }
  void compute_next_window() {
    if (next_window_ == warmup_ - term_buffer_ - 1) return;
    window_size_ *= 2;
    next_window_ = counter_ + window_size_;
    if (next_window_ != warmup_ - term_buffer_ - 1) {
      const std::size_t boundary = next_window_ + 2 * window_size_;
      if (boundary >= warmup_ - term_buffer_) next_window_ = warmup_ - term_buffer_ - 1;
    }
  }
  void add(const std::vector<double>& q) {
    ++count_;
    const double n = static_cast<double>(count_);
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double delta = q[i] - mean_[i];
      mean_[i] += delta / n;
      m2_[i] += delta * (q[i] - mean_[i]);
    }
  }
  void reset() {
    count_ = 0;
    std::fill(mean_.begin(), mean_.end(), 0.0);
    std::fill(m2_.begin(), m2_.end(), 0.0);
  }

  bool enabled_ = true;
  std::size_t warmup_;
  std::size_t init_buffer_ = 75;
  std::size_t term_buffer_ = 50;
  std::size_t base_window_ = 25;
  std::size_t window_size_ = 25;
  std::size_t next_window_ = 0;
  std::size_t counter_ = 0;
  std::size_t count_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

struct TransitionInfo {
  double accept_stat = 0.0;
  bool divergent = false;
};

class Nuts {
 public:
  Nuts(const LogDensity& target, std::size_t dim, const SamplerConfig& config, Rng& rng)
      : target_(target), dim_(dim), config_(config), rng_(rng), inv_metric_(dim, 1.0) {}

  double step_size = 1.0;
  std::vector<double>& inv_metric() { return inv_metric_; }

  void evaluate(PhasePoint& z) {
    z.grad.assign(dim_, 0.0);
    const double lp = target_(z.q, z.grad);
    z.logp = std::isfinite(lp) ? lp : kNegInf;
    if (!std::isfinite(lp)) std::fill(z.grad.begin(), z.grad.end(), 0.0);
  }

  void sample_momentum(PhasePoint& z) {
    z.p.resize(dim_);
    for (std::size_t i = 0; i < dim_; ++i) z.p[i] = rng_.normal() / std::sqrt(inv_metric_[i]);
  }

  double hamiltonian(const PhasePoint& z) const {
    if (z.logp == kNegInf) return std::numeric_limits<double>::infinity();
    double k = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) k += inv_metric_[i] * z.p[i] * z.p[i];
    return -z.logp + 0.5 * k;
  }

  std::vector<double> dtau_dp(const PhasePoint& z) const {
    std::vector<double> out(dim_);
    for (std::size_t i = 0; i < dim_; ++i) out[i] = inv_metric_[i] * z.p[i];
    return out;
  }

  void leapfrog(PhasePoint& z, double eps) {
    for (std::size_t i = 0; i < dim_; ++i) z.p[i] += 0.5 * eps * z.grad[i];
    for (std::size_t i = 0; i < dim_; ++i) z.q[i] += eps * inv_metric_[i] * z.p[i];
    evaluate(z);
    if (z.logp == kNegInf) return;
    for (std::size_t i = 0; i < dim_; ++i) z.p[i] += 0.5 * eps * z.grad[i];
  }

  /// Doubles/halves the step size until one leapfrog step crosses an
  /// acceptance probability of 0.8.
  void init_step_size(const PhasePoint& start) {
    PhasePoint z = start;
    sample_momentum(z);
    double h0 = hamiltonian(z);
    leapfrog(z, step_size);
    double h = hamiltonian(z);
    if (std::isnan(h)) h = std::numeric_limits<double>::infinity();
    const double log_08 = std::log(0.8);
    const int direction = (h0 - h) > log_08 ? 1 : -1;
    for (int iter = 0; iter < 100; ++iter) {
      z = start;
      sample_momentum(z);
      h0 = hamiltonian(z);
      leapfrog(z, step_size);
      h = hamiltonian(z);
      if (std::isnan(h)) h = std::numeric_limits<double>::infinity();
      const double delta = h0 - h;
      if (direction == 1 && !(delta > log_08)) break;
      if (direction == -1 && !(delta < log_08)) break;
      step_size = direction == 1 ? 2.0 * step_size : 0.5 * step_size;
      if (step_size > 1e7 || step_size == 0.0) {
        fail(ErrorKind::ChainFailure, "step size initialization diverged");
      }
    }
  }

  TransitionInfo transition(PhasePoint& current) {
    z_ = current;
    sample_momentum(z_);
    z_.grad = current.grad;

    PhasePoint z_fwd = z_;
    PhasePoint z_bck = z_;
    PhasePoint z_sample = z_;
    PhasePoint z_propose = z_;

    std::vector<double> p_fwd_fwd = z_.p;
    std::vector<double> p_sharp_fwd_fwd = dtau_dp(z_);
    std::vector<double> p_fwd_bck = z_.p;
    std::vector<double> p_sharp_fwd_bck = p_sharp_fwd_fwd;
    std::vector<double> p_bck_fwd = z_.p;
    std::vector<double> p_sharp_bck_fwd = p_sharp_fwd_fwd;
    std::vector<double> p_bck_bck = z_.p;
    std::vector<double> p_sharp_bck_bck = p_sharp_fwd_fwd;

    std::vector<double> rho = z_.p;
    double log_sum_weight = 0.0;
    const double h0 = hamiltonian(z_);
    n_leapfrog_ = 0;
    sum_metro_prob_ = 0.0;
    divergent_ = false;

    for (int depth = 0; depth < config_.max_depth; ++depth) {
      std::vector<double> rho_fwd(dim_, 0.0);
      std::vector<double> rho_bck(dim_, 0.0);
      bool valid_subtree = false;
      double log_sum_weight_subtree = kNegInf;

      if (rng_.uniform() > 0.5) {
        z_ = z_fwd;
        rho_bck = rho;
        p_bck_fwd = p_fwd_bck;
        p_sharp_bck_fwd = p_sharp_fwd_bck;
        valid_subtree = build_tree(depth, z_propose, p_sharp_fwd_bck, p_sharp_fwd_fwd, rho_fwd, p_fwd_bck,
                                   p_fwd_fwd, h0, 1.0, log_sum_weight_subtree);
        z_fwd = z_;
      } else {
        z_ = z_bck;
        rho_fwd = rho;
        p_fwd_bck = p_bck_fwd;
        p_sharp_fwd_bck = p_sharp_bck_fwd;
        valid_subtree = build_tree(depth, z_propose, p_sharp_bck_fwd, p_sharp_bck_bck, rho_bck, p_bck_fwd,
                                   p_bck_bck, h0, -1.0, log_sum_weight_subtree);
        z_bck = z_;
      }
      if (!valid_subtree) break;

      if (log_sum_weight_subtree > log_sum_weight) {
        z_sample = z_propose;
      } else if (rng_.uniform() < std::exp(log_sum_weight_subtree - log_sum_weight)) {
        z_sample = z_propose;
      }
      log_sum_weight = log_sum_exp(log_sum_weight, log_sum_weight_subtree);

      rho = sum_of(rho_bck, rho_fwd);
      bool persist = criterion(p_sharp_bck_bck, p_sharp_fwd_fwd, rho);
      persist = persist && criterion(p_sharp_bck_bck, p_sharp_fwd_bck, sum_of(rho_bck, p_fwd_bck));
      persist = persist && criterion(p_sharp_bck_fwd, p_sharp_fwd_fwd, sum_of(rho_fwd, p_bck_fwd));
      if (!persist) break;
    }

    current = z_sample;
    TransitionInfo info;
    info.accept_stat = n_leapfrog_ > 0 ? sum_metro_prob_ / static_cast<double>(n_leapfrog_) : 0.0;
    info.divergent = divergent_;
    total_leapfrog += n_leapfrog_;
    return info;
  }

  std::size_t total_leapfrog = 0;

 private:
  static bool criterion(const std::vector<double>& p_sharp_minus, const std::vector<double>& p_sharp_plus,
                        const std::vector<double>& rho) {
    return dot(p_sharp_plus, rho) > 0.0 && dot(p_sharp_minus, rho) > 0.0;
  }

  bool build_tree(int depth, PhasePoint& z_propose, std::vector<double>& p_sharp_beg,
                  std::vector<double>& p_sharp_end, std::vector<double>& rho, std::vector<double>& p_beg,
                  std::vector<double>& p_end, double h0, double sign, double& log_sum_weight) {
    if (depth == 0) {
      leapfrog(z_, sign * step_size);
      ++n_leapfrog_;
      double h = hamiltonian(z_);
      if (std::isnan(h)) h = std::numeric_limits<double>::infinity();
      if (h - h0 > config_.max_energy_error) divergent_ = true;
      log_sum_weight = log_sum_exp(log_sum_weight, h0 - h);
      sum_metro_prob_ += (h0 - h > 0.0) ? 1.0 : std::exp(h0 - h);
      z_propose = z_;
      p_sharp_beg = dtau_dp(z_);
      p_sharp_end = p_sharp_beg;
      add_to(rho, z_.p);
      p_beg = z_.p;
      p_end = p_beg;
      return !divergent_;
    }

    double log_sum_weight_init = kNegInf;
    std::vector<double> p_init_end(dim_, 0.0);
    std::vector<double> p_sharp_init_end(dim_, 0.0);
    std::vector<double> rho_init(dim_, 0.0);
    if (!build_tree(depth - 1, z_propose, p_sharp_beg, p_sharp_init_end, rho_init, p_beg, p_init_end, h0, sign,
                    log_sum_weight_init)) {
      return false;
    }

    PhasePoint z_propose_final = z_;
    double log_sum_weight_final = kNegInf;
    std::vector<double> p_final_beg(dim_, 0.0);
    std::vector<double> p_sharp_final_beg(dim_, 0.0);
    std::vector<double> rho_final(dim_, 0.0);
    if (!build_tree(depth - 1, z_propose_final, p_sharp_final_beg, p_sharp_end, rho_final, p_final_beg, p_end,
                    h0, sign, log_sum_weight_final)) {
      return false;
    }

    const double log_sum_weight_subtree = log_sum_exp(log_sum_weight_init, log_sum_weight_final);
    log_sum_weight = log_sum_exp(log_sum_weight, log_sum_weight_subtree);
    if (log_sum_weight_final > log_sum_weight_subtree) {
      z_propose = z_propose_final;
    } else if (rng_.uniform() < std::exp(log_sum_weight_final - log_sum_weight_subtree)) {
      z_propose = z_propose_final;
    }

    const std::vector<double> rho_subtree = sum_of(rho_init, rho_final);
    add_to(rho, rho_subtree);
    bool persist = criterion(p_sharp_beg, p_sharp_end, rho_subtree);
    persist = persist && criterion(p_sharp_beg, p_sharp_final_beg, sum_of(rho_init, p_final_beg));
    persist = persist && criterion(p_sharp_init_end, p_sharp_end, sum_of(rho_final, p_init_end));
    return persist;
  }

  const LogDensity& target_;
  std::size_t dim_;
  const SamplerConfig& config_;
  Rng& rng_;
  std::vector<double> inv_metric_;
  PhasePoint z_;
  std::size_t n_leapfrog_ = 0;
  double sum_metro_prob_ = 0.0;
  bool divergent_ = false;
};

}  // namespace

ChainResult run_chain(const LogDensity& target, std::vector<double> init, const SamplerConfig& config,
                      std::uint64_t seed) {
  const std::size_t dim = init.size();
  if (dim == 0) fail(ErrorKind::InvalidArgument, "HMC needs at least one dimension");
  if (!(config.step_size > 0.0)) fail(ErrorKind::InvalidArgument, "step size must be positive");
  if (config.max_depth < 1) fail(ErrorKind::InvalidArgument, "max tree depth must be >= 1");

  Rng rng(seed);
  Nuts nuts(target, dim, config, rng);
  nuts.step_size = config.step_size;

  PhasePoint current;
  current.q = std::move(init);
  nuts.evaluate(current);
  if (current.logp == kNegInf) {
    fail(ErrorKind::ChainFailure, "log density is not finite at the initial point");
  }

  const bool adapt = config.warmup > 0 && (config.adapt_step_size || config.adapt_metric);
  StepSizeAdapter step_adapter(config.target_accept);
  MetricAdapter metric_adapter(dim, config.warmup);
  if (config.adapt_step_size && config.warmup > 0) {
    nuts.init_step_size(current);
    step_adapter.set_mu(std::log(10.0 * nuts.step_size));
    step_adapter.restart();
  }

  for (std::size_t it = 0; it < config.warmup; ++it) {
    const TransitionInfo info = nuts.transition(current);
    if (!adapt) continue;
    if (config.adapt_step_size) nuts.step_size = step_adapter.learn(info.accept_stat);
    if (config.adapt_metric && metric_adapter.learn(current.q, nuts.inv_metric())) {
      if (config.adapt_step_size) {
        nuts.init_step_size(current);
        step_adapter.set_mu(std::log(10.0 * nuts.step_size));
        step_adapter.restart();
      }
    }
  }
  if (config.adapt_step_size && config.warmup > 0) nuts.step_size = step_adapter.final_step_size();

  ChainResult result;
  result.dim = dim;
  result.iters = config.iters;
  result.draws.reserve(config.iters * dim);
  const std::size_t leapfrog_before = nuts.total_leapfrog;
  double accept_total = 0.0;
  for (std::size_t it = 0; it < config.iters; ++it) {
    const TransitionInfo info = nuts.transition(current);
    accept_total += info.accept_stat;
    if (info.divergent) ++result.divergences;
    result.draws.insert(result.draws.end(), current.q.begin(), current.q.end());
  }
  result.mean_accept_stat = config.iters > 0 ? accept_total / static_cast<double>(config.iters) : 0.0;
  result.step_size = nuts.step_size;
  result.inv_metric = nuts.inv_metric();
  result.leapfrog_steps = nuts.total_leapfrog - leapfrog_before;
  return result;
}

}  // namespace bibeta::hmc
