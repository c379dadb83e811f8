#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include "bibeta/bayes.hpp"
#include "bibeta/density.hpp"
#include "bibeta/diagnostics.hpp"
#include "bibeta/error.hpp"
#include "bibeta/estimators.hpp"
#include "bibeta/experiments.hpp"
#include "bibeta/moments.hpp"
#include "bibeta/parallel.hpp"
#include "bibeta/random.hpp"
#include "bibeta/sampling.hpp"
#include "bibeta/stats.hpp"
#include "support/quadrature.hpp"

using namespace bibeta;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  std::function<Outcome()> check;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::size_t threads() { return default_thread_count(); }

Outcome moment_round_trip() {
  Rng rng(101);
  std::vector<Vec4> alphas(1000);
  for (auto& a : alphas) {
    for (double& v : a) v = 0.2 + 9.8 * rng.uniform();
  }
  const auto start = Clock::now();
  double worst = 0.0;
  bool all_feasible = true;
  for (const auto& a : alphas) {
    const auto m = moments_of(a);
    const auto solved = solve_four_moments(m.m1, m.m2, m.v1, m.rho);
    all_feasible = all_feasible && solved.feasible;
    for (std::size_t k = 0; k < 4; ++k) worst = std::max(worst, std::abs(solved.alpha[k] - a[k]));
  }
  const double elapsed = seconds_since(start);
  return {all_feasible && worst <= 1e-9 && elapsed < 1.0,
          fmt("max |error| = %.3g, all feasible = %d, %.3f s", worst, all_feasible, elapsed)};
}

Outcome density_normalization() {
  const auto start = Clock::now();
  std::string detail;
  bool ok = true;
  for (const Vec4& v : {Vec4{2, 3, 4, 5}, Vec4{1.5, 1.5, 1.5, 1.5}, Vec4{2, 7, 3, 1}}) {
    const AlphaParams a(v);
    const double total = oracle::integrate_unit_square([&](double x, double y) { return density(a, x, y); });
    ok = ok && std::abs(total - 1.0) <= 1e-3;
    detail += fmt("(%g,%g,%g,%g) -> %.8f; ", v[0], v[1], v[2], v[3], total);
  }
  const double elapsed = seconds_since(start);
  return {ok && elapsed < 30.0, detail + fmt("%.2f s", elapsed)};
}

Outcome density_spot_check() {
  const double f = density(AlphaParams(1, 1, 1, 1), 0.5, 0.25);
  return {std::abs(f - 1.5) <= 1e-6, fmt("f(0.5, 0.25) = %.12f", f)};
}

/// Central moment mu_{jk} of (x, y).
double central(std::span<const double> x, std::span<const double> y, double mx, double my, int j, int k) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::pow(x[i] - mx, j) * std::pow(y[i] - my, k);
  return s / static_cast<double>(x.size());
}

Outcome sampling_correctness() {
  const AlphaParams alpha(2, 7, 3, 1);
  const std::size_t n = 100000;
  const auto s = sample(alpha, n, 202);
  const auto truth = moments_of(alpha);
  const auto x = s.x();
  const auto y = s.y();
  const double mx = stats::mean(x);
  const double my = stats::mean(y);
  const double vx = stats::variance(x);
  const double vy = stats::variance(y);
  const double r = stats::pearson(x, y);
  const double nn = static_cast<double>(n);
  const double u20 = central(x, y, mx, my, 2, 0);
  const double u02 = central(x, y, mx, my, 0, 2);
  const double u11 = central(x, y, mx, my, 1, 1);
  const double u40 = central(x, y, mx, my, 4, 0);
  const double u04 = central(x, y, mx, my, 0, 4);
  const double u22 = central(x, y, mx, my, 2, 2);
  const double u31 = central(x, y, mx, my, 3, 1);
  const double u13 = central(x, y, mx, my, 1, 3);
  const double se_mx = std::sqrt(u20 / nn);
  const double se_my = std::sqrt(u02 / nn);
  const double se_vx = std::sqrt((u40 - u20 * u20) / nn);
  const double se_vy = std::sqrt((u04 - u02 * u02) / nn);
  // Delta-method variance of the sample correlation for non-normal data.
  const double var_r = r * r / (4.0 * nn) *
                       (u40 / (u20 * u20) + u04 / (u02 * u02) + 2.0 * u22 / (u20 * u02) + 4.0 * u22 / (u11 * u11) -
                        4.0 * u31 / (u11 * u20) - 4.0 * u13 / (u11 * u02));
  const double se_r = std::sqrt(var_r);
  const std::array<double, 5> z{(mx - truth.m1) / se_mx, (my - truth.m2) / se_my, (vx - truth.v1) / se_vx,
                                (vy - truth.v2) / se_vy, (r - truth.rho) / se_r};
  bool ok = true;
  for (double v : z) ok = ok && std::abs(v) <= 3.0;
  const auto ks_x = stats::ks_test(x, [](double t) { return stats::beta_cdf(9, 4, t); });
  const auto ks_y = stats::ks_test(y, [](double t) { return stats::beta_cdf(5, 8, t); });
  ok = ok && ks_x.p_value >= 0.01 && ks_y.p_value >= 0.01;
  return {ok, fmt("z = (%.2f, %.2f, %.2f, %.2f, %.2f); KS p = %.3f, %.3f", z[0], z[1], z[2], z[3], z[4],
                  ks_x.p_value, ks_y.p_value)};
}

Outcome table_a1() {
  ExperimentSpec spec;
  spec.generator = AlphaParams(1, 1, 1, 1);
  spec.n = 200;
  spec.reps = 200;
  spec.methods = {Method::MM1};
  spec.bootstrap = 200;
  spec.seed = 301;
  spec.threads = threads();
  const auto start = Clock::now();
  const auto table = run_well_specified(spec);
  const double elapsed = seconds_since(start);
  bool ok = elapsed < 600.0;
  std::string detail = "MAPE";
  for (int k = 1; k <= 4; ++k) {
    const auto& c = table.at(Method::MM1, "alpha" + std::to_string(k));
    ok = ok && c.mape >= 0.07 && c.mape <= 0.14;
    detail += fmt(" %.4f", c.mape);
  }
  detail += "; coverage";
  for (int k = 1; k <= 4; ++k) {
    const auto& c = table.at(Method::MM1, "alpha" + std::to_string(k));
    ok = ok && c.coverage >= 0.90 && c.coverage <= 0.98;
    detail += fmt(" %.3f", c.coverage);
  }
  return {ok, detail + fmt("; %.1f s", elapsed)};
}

Outcome table_a2() {
  ExperimentSpec spec;
  spec.generator = AlphaParams(2, 7, 3, 1);
  spec.n = 50;
  spec.reps = 100;
  spec.methods = {Method::BE1};
  spec.bootstrap = 0;
  spec.prior = PriorSpec::gamma_iid(1.0, 1.0);
  spec.seed = 302;
  spec.threads = threads();
  const auto start = Clock::now();
  const auto table = run_well_specified(spec);
  const double elapsed = seconds_since(start);
  const auto& a1 = table.at(Method::BE1, "alpha1");
  const auto& a2 = table.at(Method::BE1, "alpha2");
  const bool ok = a2.bias < 0.0 && a2.coverage < a1.coverage && elapsed < 1800.0;
  return {ok, fmt("alpha2 bias = %.4f; coverage alpha1 = %.3f, alpha2 = %.3f; failed = %zu; %.1f s", a2.bias,
                  a1.coverage, a2.coverage, a2.failed, elapsed)};
}

LogitNormalParams experiment_one() { return {{0.0, 0.0}, {{{1.0, 0.1}, {0.1, 1.0}}}}; }
LogitNormalParams experiment_two() { return {{-1.0, -1.0}, {{{2.25, -1.2}, {-1.2, 1.0}}}}; }

Outcome misspecified_one() {
  ExperimentSpec spec;
  spec.generator = experiment_one();
  spec.n = 50;
  spec.reps = 200;
  spec.methods = {Method::MM1};
  spec.seed = 303;
  spec.threads = threads();
  const auto table = run_misspecified(spec);
  const double mape = table.at(Method::MM1, "rho").mape;
  const auto pn = sampling_distribution(Statistic::Pn, spec.generator, 50, 2000, 304, 30, threads());
  const bool ok = mape > 1.0 && std::abs(pn.fraction_outside - 0.5) <= 0.05;
  return {ok, fmt("MM1 rho MAPE = %.3f; P(Pn outside [0, 0.2]) = %.4f", mape, pn.fraction_outside)};
}

Outcome misspecified_two() {
  ExperimentSpec spec;
  spec.generator = experiment_two();
  spec.n = 50;
  spec.reps = 200;
  spec.methods = {Method::MM1, Method::MM2, Method::MM3};
  spec.seed = 305;
  spec.threads = threads();
  const auto table = run_misspecified(spec);
  const double b1 = table.at(Method::MM3, "m1").bias;
  const double b2 = table.at(Method::MM3, "m2").bias;
  const double mm1_v2 = table.at(Method::MM1, "v2").mape;
  const double mm2_v2 = table.at(Method::MM2, "v2").mape;
  const bool ok = std::abs(b1) < 0.01 && std::abs(b2) < 0.01 && mm1_v2 > mm2_v2;
  return {ok, fmt("MM3 mean bias = (%.5f, %.5f); v2 MAPE MM1 = %.4f, MM2 = %.4f", b1, b2, mm1_v2, mm2_v2)};
}

Outcome gn_calibration() {
  const AlphaParams alpha(2, 3, 7, 1);
  const std::size_t reps = 500;
  std::vector<double> p(reps, std::nan(""));
  parallel_for(reps, threads(), [&](std::size_t r) {
    try {
      p[r] = gn_test(sample(alpha, 200, child_seed(306, r))).p_value;
    } catch (const Error&) {
    }
  });
  std::erase_if(p, [](double v) { return std::isnan(v); });
  const double size = static_cast<double>(std::count_if(p.begin(), p.end(), [](double v) { return v < 0.05; })) /
                      static_cast<double>(p.size());
  const auto ks = stats::ks_test(p, [](double t) { return std::clamp(t, 0.0, 1.0); });
  const auto z30 = sampling_distribution(Statistic::GnZ, alpha, 30, 2000, 307, 30, threads());
  const bool ok = size >= 0.02 && size <= 0.09 && ks.p_value >= 0.01 && z30.ks_normal < 0.08;
  return {ok, fmt("size = %.3f over %zu reps; KS uniformity p = %.3f; n=30 KS distance to N(0,1) = %.4f", size,
                  p.size(), ks.p_value, z30.ks_normal)};
}

Outcome m_test_size() {
  const std::size_t reps = 500;
  std::vector<int> outcome(reps, -1);
  parallel_for(reps, threads(), [&](std::size_t r) {
    Rng rng(child_seed(308, r));
    Vec4 a;
    for (double& v : a) v = 0.01 + 0.49 * rng.uniform();
    try {
      outcome[r] = m_test(sample(AlphaParams(a), 50, rng()), -0.05).reject ? 1 : 0;
    } catch (const Error&) {
    }
  });
  const auto rejected = std::count(outcome.begin(), outcome.end(), 1);
  const auto failed = std::count(outcome.begin(), outcome.end(), -1);
  const double rate = static_cast<double>(rejected) / static_cast<double>(reps - static_cast<std::size_t>(failed));
  return {rate <= 0.08, fmt("rejection rate = %.4f (%ld of %ld; %ld undefined)", rate, static_cast<long>(rejected),
                            static_cast<long>(reps) - static_cast<long>(failed), static_cast<long>(failed))};
}

Outcome gradient_check() {
  Rng rng(309);
  double worst = 0.0;
  for (int state = 0; state < 100; ++state) {
    Vec4 truth;
    for (double& a : truth) a = 0.3 + 4.0 * rng.uniform();
    const auto data = sample(AlphaParams(truth), 5 + static_cast<std::size_t>(state % 20), rng());
    const auto prior = state % 2 ? PriorSpec::gamma_iid(1.0, 1.0, 0.5) : PriorSpec::gamma_iid(2.0, 0.5);
    AugmentedState s;
    for (double& t : s.theta) t = 3.0 * rng.uniform() - 1.5;
    s.w.resize(data.size());
    for (double& w : s.w) w = 8.0 * rng.uniform() - 4.0;
    AugmentedGradient grad;
    log_augmented_posterior(s, data, prior, &grad);
    const double h = 1e-6;
    auto check = [&](double& slot, double analytic) {
      const double saved = slot;
      slot = saved + h;
      const double up = log_augmented_posterior(s, data, prior);
      slot = saved - h;
      const double down = log_augmented_posterior(s, data, prior);
      slot = saved;
      const double fd = (up - down) / (2.0 * h);
      worst = std::max(worst, std::abs(analytic - fd) / std::max(1.0, std::abs(fd)));
    };
    for (std::size_t k = 0; k < 4; ++k) check(s.theta[k], grad.theta[k]);
    for (std::size_t i = 0; i < s.w.size(); ++i) check(s.w[i], grad.w[i]);
  }
  return {worst < 1e-5, fmt("max relative error = %.3g over 100 states", worst)};
}

Outcome sbc_check() {
  SbcConfig config;
  config.n = 50;
  config.L = 19;
  config.N = 200;
  config.seed = 310;
  config.threads = threads();
  const auto start = Clock::now();
  const auto report = sbc(PriorSpec::gamma_iid(1.0, 1.0, 0.5), config);
  const double elapsed = seconds_since(start);
  bool ok = elapsed < 7200.0;
  for (double p : report.p_values) ok = ok && p > 0.005;
  return {ok, fmt("p = (%.4f, %.4f, %.4f, %.4f); completed %zu, dropped %zu, divergent %zu; %.0f s",
                  report.p_values[0], report.p_values[1], report.p_values[2], report.p_values[3],
                  report.ranks.size(), report.dropped, report.divergent_experiments, elapsed)};
}

Outcome runtime_ordering() {
  const AlphaParams alpha(2, 7, 3, 1);
  const std::size_t datasets = 200;
  const std::size_t repeats = 10;
  std::array<std::vector<double>, 3> times;
  volatile double sink = 0.0;
  const std::array<Method, 3> methods{Method::MM1, Method::MM2, Method::MM4};
  for (std::size_t d = 0; d < datasets; ++d) {
    const auto data = sample(alpha, 50, child_seed(311, d));
    for (std::size_t m = 0; m < methods.size(); ++m) {
      const auto start = Clock::now();
      for (std::size_t r = 0; r < repeats; ++r) {
        try {
          sink = estimate(methods[m], empirical_moments(data)).alpha_hat[0];
        } catch (const Error&) {
        }
      }
      times[m].push_back(seconds_since(start) / static_cast<double>(repeats));
    }
  }
  const double t1 = stats::median(times[0]);
  const double t2 = stats::median(times[1]);
  const double t4 = stats::median(times[2]);
  return {t1 < t4 && t2 < t4, fmt("median fit time MM1 = %.3g s, MM2 = %.3g s, MM4 = %.3g s", t1, t2, t4)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {"moment round-trip", moment_round_trip},
      {"density normalization", density_normalization},
      {"analytic density spot-check", density_spot_check},
      {"sampling correctness", sampling_correctness},
      {"well-specified alpha=(1,1,1,1) MM1 MAPE and bootstrap coverage", table_a1},
      {"well-specified alpha=(2,7,3,1) BE1 bias and coverage signs", table_a2},
      {"misspecified experiment 1", misspecified_one},
      {"misspecified experiment 2", misspecified_two},
      {"G_n calibration", gn_calibration},
      {"M-test size", m_test_size},
      {"gradient check", gradient_check},
      {"simulation-based calibration", sbc_check},
      {"runtime ordering", runtime_ordering},
  };
  const std::string filter = argc > 1 ? argv[1] : "";
  int failures = 0;
  for (const auto& c : criteria) {
    if (!filter.empty() && c.name.find(filter) == std::string::npos) continue;
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", c.name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
