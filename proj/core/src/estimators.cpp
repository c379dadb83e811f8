#include "bibeta/estimators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "bibeta/error.hpp"
#include "bibeta/moments.hpp"
#include "bibeta/optimize.hpp"
#include "bibeta/parallel.hpp"
#include "bibeta/random.hpp"
#include "bibeta/stats.hpp"

namespace bibeta {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kConstraintMargin = 1e-8;
constexpr double kMm4StartFloor = 1e-2;
constexpr int kRestarts = 5;

void require_summary(const MomentSummary& m) {
  if (!(m.m1 > 0.0 && m.m1 < 1.0 && m.m2 > 0.0 && m.m2 < 1.0)) {
    fail(ErrorKind::InvalidArgument, "means must lie in (0,1)");
  }
  if (!(m.v1 > 0.0 && m.v2 > 0.0)) fail(ErrorKind::InvalidArgument, "variances must be positive");
  if (!(m.rho >= -1.0 && m.rho <= 1.0)) fail(ErrorKind::InvalidArgument, "rho must lie in [-1,1]");
}

/// m(1-m)/v for each marginal; equals s_alpha + 1 under the model.
std::pair<double, double> trial_ratios(const MomentSummary& m) {
  return {m.m1 * (1.0 - m.m1) / m.v1, m.m2 * (1.0 - m.m2) / m.v2};
}

EstimateReport truncated(Method method, const Vec4& raw) {
  EstimateReport out;
  out.method = method;
  out.objective = kNaN;
  for (std::size_t i = 0; i < 4; ++i) {
    out.clamped[i] = !(raw[i] > 0.0);
    out.alpha_hat[i] = out.clamped[i] ? 0.0 : raw[i];
  }
  return out;
}

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

// Deterministic restart offsets, scaled per restart.
std::vector<double> perturbed(const std::vector<double>& base, int restart) {
  static constexpr double kPattern[] = {0.7, -0.4, 0.3, -0.9, 0.5, -0.2};
  auto out = base;
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] += kPattern[(j + static_cast<std::size_t>(restart)) % 6] * (restart % 2 == 0 ? 1.0 : -1.0);
  }
  return out;
}

/// Best of one start plus deterministic restarts; later restarts are seeded
/// from the incumbent so a premature simplex collapse gets a second look.
optimize::NelderMeadResult multistart(const optimize::Objective& f, const std::vector<double>& start) {
  optimize::NelderMeadOptions options;
  auto best = optimize::nelder_mead(f, start, options);
  for (int r = 1; r < kRestarts; ++r) {
    const auto& anchor = (r % 2 == 1) ? best.x : start;
    auto next = optimize::nelder_mead(f, perturbed(anchor, r), options);
    if (next.value < best.value || (next.value == best.value && next.converged && !best.converged)) {
      best = std::move(next);
    }
  }
  // Polish from the incumbent with a small simplex.
  options.initial_step = 1e-3;
  auto polished = optimize::nelder_mead(f, best.x, options);
  if (polished.value <= best.value) best = std::move(polished);
  return best;
}

}  // namespace

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::MM1: return "MM1";
    case Method::MM2: return "MM2";
    case Method::MM3: return "MM3";
    case Method::MM4: return "MM4";
    case Method::BE1: return "BE1";
    case Method::BE2: return "BE2";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "mm1") return Method::MM1;
  if (lower == "mm2") return Method::MM2;
  if (lower == "mm3") return Method::MM3;
  if (lower == "mm4") return Method::MM4;
  if (lower == "be1") return Method::BE1;
  if (lower == "be2") return Method::BE2;
  fail(ErrorKind::InvalidArgument, "unknown method '" + std::string(name) + "'");
}

bool is_moment_method(Method method) noexcept {
  return method == Method::MM1 || method == Method::MM2 || method == Method::MM3 ||
         method == Method::MM4;
}

int EstimateReport::clamped_count() const noexcept {
  return static_cast<int>(std::count(clamped.begin(), clamped.end(), true));
}

MomentSummary empirical_moments(const PairedSample& sample) {
  const std::size_t n = sample.size();
  if (n < 2) fail(ErrorKind::InvalidArgument, "empirical moments need at least two pairs");
  const auto xs = sample.x();
  const auto ys = sample.y();
  const double mx = stats::mean(xs);
  const double my = stats::mean(ys);
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  const auto [x_lo, x_hi] = std::minmax_element(xs.begin(), xs.end());
  const auto [y_lo, y_hi] = std::minmax_element(ys.begin(), ys.end());
  if (*x_lo == *x_hi || *y_lo == *y_hi || sxx == 0.0 || syy == 0.0) {
    fail(ErrorKind::ZeroVariance, "a coordinate has zero sample variance; correlation is undefined");
  }
  const double denom = static_cast<double>(n - 1);
  MomentSummary out;
  out.m1 = mx;
  out.m2 = my;
  out.v1 = sxx / denom;
  out.v2 = syy / denom;
  out.rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  return out;
}

EstimateReport mm1(const MomentSummary& m) {
  require_summary(m);
  const SolverOutcome solved = solve_four_moments(m.m1, m.m2, m.v1, m.rho);
  return truncated(Method::MM1, solved.alpha);
}

EstimateReport mm2(const MomentSummary& m) {
  require_summary(m);
  const double d = (1.0 - m.m1) * (1.0 - m.m2) + m.rho * marginal_scale(m.m1, m.m2);
  if (d == 0.0) fail(ErrorKind::DegenerateDenominator, "D = (1-m1)(1-m2) + rho*sqrt(...) is zero");
  const auto [r1, r2] = trial_ratios(m);
  const double sum = 0.5 * (r1 + r2) - 1.0;
  if (!(sum > 0.0)) {
    fail(ErrorKind::InfeasibleVariance, "variances imply a non-positive parameter sum");
  }
  const double cross = m.rho * marginal_scale(m.m1, m.m2);
  const double a4 = d * sum;
  const Vec4 raw = {
      a4 * (m.m1 * m.m2 + cross) / d,
      a4 * (m.m1 * (1.0 - m.m2) - cross) / d,
      a4 * (m.m2 * (1.0 - m.m1) - cross) / d,
      a4,
  };
  return truncated(Method::MM2, raw);
}

EstimateReport mm3(const MomentSummary& m) {
  require_summary(m);
  const double m1 = m.m1;
  const double m2 = m.m2;
  const auto [r1, r2] = trial_ratios(m);
  const double e = m2 - m.rho * marginal_scale(m1, m2) / (1.0 - m1);

  // alpha1, alpha2 > 0 confine t = alpha4 / alpha3 to (lo, hi).
  const double lo = (m1 + m2 < 1.0) ? (1.0 - m1 - m2) / m2 : 0.0;
  const double hi = (m1 < m2) ? (1.0 - m2) / (m2 - m1) : kInf;
  auto ratio = [&](double phi) {
    if (std::isinf(hi)) return lo + std::exp(phi);
    return lo + (hi - lo) * sigmoid(phi);
  };
  auto ratio_inverse = [&](double t) {
    if (std::isinf(hi)) return std::log(t - lo);
    return logit((t - lo) / (hi - lo));
  };
  auto assemble = [&](double psi, double phi) {
    const double a3 = std::exp(psi);
    const double a4 = ratio(phi) * a3;
    return Vec4{((m1 + m2 - 1.0) * a3 + m2 * a4) / (1.0 - m1),
                ((1.0 - m2) * a3 + (m1 - m2) * a4) / (1.0 - m1), a3, a4};
  };

  auto objective = [&](std::span<const double> p) {
    const Vec4 a = assemble(p[0], p[1]);
    if (!(a[0] >= kConstraintMargin && a[1] >= kConstraintMargin) || !(a[3] > 0.0)) return kInf;
    const double s = (a[2] + a[3]) / (1.0 - m1);
    const double t1 = s + 1.0 - r1;
    const double t2 = s + 1.0 - r2;
    const double t3 = (e - 1.0) * a[2] + e * a[3];
    return t1 * t1 + t2 * t2 + t3 * t3;
  };

  // Start at the ratio implied by E when it is admissible, else mid-interval,
  // and at the sum implied by the averaged variance relations.
  double t0 = 0.0;
  if (e > 0.0 && e < 1.0) t0 = (1.0 - e) / e;
  const double mid = std::isinf(hi) ? lo + 1.0 : 0.5 * (lo + hi);
  if (!(t0 > lo && t0 < hi)) t0 = mid;
  const double s0 = std::max(0.5 * (r1 + r2) - 1.0, 0.1);
  const double a3_0 = s0 * (1.0 - m1) / (1.0 + t0);
  const std::vector<double> start = {std::log(a3_0), ratio_inverse(t0)};

  const auto best = multistart(objective, start);
  if (!std::isfinite(best.value)) {
    fail(ErrorKind::OptimizerFailure, "MM3: no feasible point improved the objective");
  }
  EstimateReport out;
  out.method = Method::MM3;
  out.alpha_hat = assemble(best.x[0], best.x[1]);
  out.converged = best.converged;
  out.objective = best.value;
  return out;
}

EstimateReport mm4(const MomentSummary& m) {
  require_summary(m);
  const auto [r1, r2] = trial_ratios(m);
  const double cap = std::max(r1, r2) - 1.0;
  if (!(cap > 0.0)) {
    fail(ErrorKind::InfeasibleVariance, "MM4: the sum constraint leaves no admissible alpha");
  }

  // alpha = cap * sigmoid(p0) * softmax(p1, p2, p3, 0): positivity and the
  // sum constraint hold for every unconstrained p.
  auto assemble = [&](std::span<const double> p) {
    const double total = cap * sigmoid(p[0]);
    const double hi = std::max({p[1], p[2], p[3], 0.0});
    Vec4 w = {std::exp(p[1] - hi), std::exp(p[2] - hi), std::exp(p[3] - hi), std::exp(-hi)};
    const double norm = w[0] + w[1] + w[2] + w[3];
    for (double& v : w) v = total * v / norm;
    return w;
  };
  auto objective = [&](std::span<const double> p) {
    const Vec4 a = assemble(p);
    if (!(a[0] > 0.0 && a[1] > 0.0 && a[2] > 0.0 && a[3] > 0.0)) return kInf;
    const MomentSummary fit = moments_of(a);
    const double d1 = m.m1 - fit.m1;
    const double d2 = m.m2 - fit.m2;
    const double d3 = m.rho - fit.rho;
    const double d4 = m.v1 - fit.v1;
    const double d5 = m.v2 - fit.v2;
    return d1 * d1 + d2 * d2 + d3 * d3 + d4 * d4 + d5 * d5;
  };

  Vec4 init = {1.0, 1.0, 1.0, 1.0};
  try {
    init = solve_four_moments(m.m1, m.m2, m.v1, m.rho).alpha;
    for (double& a : init) {
      if (!(a > 0.0)) a = kMm4StartFloor;
    }
  } catch (const Error&) {
  }
  double s0 = init[0] + init[1] + init[2] + init[3];
  if (s0 >= cap) {
    const double scale = 0.99 * cap / s0;
    for (double& a : init) a *= scale;
    s0 *= scale;
  }
  const std::vector<double> start = {logit(s0 / cap), std::log(init[0] / init[3]),
                                     std::log(init[1] / init[3]), std::log(init[2] / init[3])};

  const auto best = multistart(objective, start);
  if (!std::isfinite(best.value)) {
    fail(ErrorKind::OptimizerFailure, "MM4: no feasible point improved the objective");
  }
  EstimateReport out;
  out.method = Method::MM4;
  out.alpha_hat = assemble(best.x);
  out.converged = best.converged;
  out.objective = best.value;
  return out;
}

EstimateReport estimate(Method method, const MomentSummary& moments) {
  switch (method) {
    case Method::MM1: return mm1(moments);
    case Method::MM2: return mm2(moments);
    case Method::MM3: return mm3(moments);
    case Method::MM4: return mm4(moments);
    default: break;
  }
  fail(ErrorKind::InvalidArgument, std::string(to_string(method)) + " is not a moment estimator");
}

BootstrapCI bootstrap_ci(const PairedSample& sample, Method method, std::size_t B, double level,
                         std::uint64_t seed, std::size_t threads) {
  if (!is_moment_method(method)) {
    fail(ErrorKind::InvalidArgument, "bootstrap intervals are defined for MM1-MM4");
  }
  if (sample.size() < 2) fail(ErrorKind::InvalidArgument, "bootstrap needs at least two pairs");
  if (B < 2) fail(ErrorKind::InvalidArgument, "bootstrap needs B >= 2");
  if (!(level > 0.0 && level < 1.0)) fail(ErrorKind::InvalidArgument, "level must lie in (0,1)");

  const std::size_t n = sample.size();
  std::vector<std::optional<Vec4>> slots(B);
  std::vector<ErrorKind> errors(B, ErrorKind::InvalidArgument);
  parallel_for(B, threads, [&](std::size_t b) {
    Rng rng(child_seed(seed, b));
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) r = rng.index(n);
    try {
      slots[b] = estimate(method, empirical_moments(sample.select(rows))).alpha_hat;
    } catch (const Error& e) {
      errors[b] = e.kind();
    }
  });

  BootstrapCI out;
  out.method = method;
  out.B = B;
  out.level = level;
  std::optional<ErrorKind> first_error;
  for (std::size_t b = 0; b < B; ++b) {
    if (slots[b]) {
      out.resample_estimates.push_back(*slots[b]);
    } else {
      ++out.failed;
      if (!first_error) first_error = errors[b];
    }
  }
  if (out.resample_estimates.size() < 2) {
    fail(first_error.value_or(ErrorKind::InvalidArgument),
         "bootstrap: " + std::to_string(out.failed) + " of " + std::to_string(B) +
             " resamples failed");
  }
  const double tail = 0.5 * (1.0 - level);
  for (std::size_t i = 0; i < 4; ++i) {
    std::vector<double> column;
    column.reserve(out.resample_estimates.size());
    for (const auto& row : out.resample_estimates) column.push_back(row[i]);
    std::sort(column.begin(), column.end());
    out.intervals[i] = {stats::quantile_sorted(column, tail), stats::quantile_sorted(column, 1.0 - tail)};
  }
  return out;
}

}  // namespace bibeta
