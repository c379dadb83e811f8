#include "bibeta/elicitation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "bibeta/error.hpp"
#include "bibeta/estimators.hpp"
#include "bibeta/moments.hpp"
#include "bibeta/stats.hpp"

namespace bibeta {

namespace {

constexpr double kRatioTolerance = 1e-9;
constexpr double kFloor = 1e-10;

bool valid_variance(double m, double v) { return v > 0.0 && v < m * (1.0 - m); }

ElicitationResult finish(const MomentSummary& requested, ElicitationPath path, const Vec4& raw,
                         std::vector<std::string> notes = {}) {
  static constexpr const char* kNames[] = {"alpha1", "alpha2", "alpha3", "alpha4"};
  Vec4 values = raw;
  for (std::size_t k = 0; k < 4; ++k) {
    if (!(values[k] > 0.0)) {
      values[k] = kFloor;
      notes.push_back(std::string(kNames[k]) + " was 0 and is floored at 1e-10");
    }
  }
  ElicitationResult out;
  out.alpha = AlphaParams(values);
  out.path = path;
  out.requested = requested;
  out.achieved = moments_of(out.alpha);
  out.discrepancy = {std::abs(requested.m1 - out.achieved.m1), std::abs(requested.m2 - out.achieved.m2),
                     std::abs(requested.v1 - out.achieved.v1), std::abs(requested.v2 - out.achieved.v2),
                     std::abs(requested.rho - out.achieved.rho)};
  out.notes = std::move(notes);
  return out;
}

}  // namespace

std::string_view to_string(ElicitationPath path) noexcept {
  switch (path) {
    case ElicitationPath::ExactFourMoment: return "ExactFourMoment";
    case ElicitationPath::ThreeMomentMM2: return "ThreeMomentMM2";
    case ElicitationPath::MM3Fallback: return "MM3Fallback";
    case ElicitationPath::MM4Fallback: return "MM4Fallback";
  }
  return "?";
}

std::string_view to_string(Preference preference) noexcept {
  return preference == Preference::MeansFirst ? "MeansFirst" : "Balanced";
}

Preference parse_preference(std::string_view name) {
  std::string lower;
  for (char c : name) {
    if (c != '-' && c != '_') lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (lower == "meansfirst") return Preference::MeansFirst;
  if (lower == "balanced") return Preference::Balanced;
  fail(ErrorKind::InvalidArgument, "unknown preference '" + std::string(name) + "'");
}

ElicitationResult elicit(const MomentSummary& requested, Preference preference) {
  const auto& r = requested;
  if (!(r.m1 > 0.0 && r.m1 < 1.0 && r.m2 > 0.0 && r.m2 < 1.0)) {
    fail(ErrorKind::InvalidArgument, "means must lie in (0,1)");
  }
  if (!(r.v1 > 0.0 && r.v2 > 0.0)) fail(ErrorKind::InvalidArgument, "variances must be positive");
  if (!(r.rho >= -1.0 && r.rho <= 1.0)) fail(ErrorKind::InvalidArgument, "rho must lie in [-1,1]");
  const bool v1_ok = valid_variance(r.m1, r.v1);
  const bool v2_ok = valid_variance(r.m2, r.v2);
  if (!v1_ok && !v2_ok) {
    fail(ErrorKind::InfeasibleVariance, "both variances exceed m(1-m); no beta marginal matches");
  }

  if (v1_ok && v2_ok) {
    const double r1 = r.m1 * (1.0 - r.m1) / r.v1;
    const double r2 = r.m2 * (1.0 - r.m2) / r.v2;
    const bool ratios_equal = std::abs(r1 - r2) <= kRatioTolerance * std::max(std::abs(r1), std::abs(r2));
    if (ratios_equal && rho_bounds(r.m1, r.m2).contains_strictly(r.rho)) {
      const SolverOutcome exact = solve_four_moments(r.m1, r.m2, r.v1, r.rho);
      if (exact.feasible) return finish(requested, ElicitationPath::ExactFourMoment, exact.alpha);
    }
  }

  try {
    const EstimateReport three = mm2(requested);
    if (three.clamped_count() == 0) return finish(requested, ElicitationPath::ThreeMomentMM2, three.alpha_hat);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InfeasibleVariance && e.kind() != ErrorKind::DegenerateDenominator) throw;
  }

  if (preference == Preference::MeansFirst) {
    return finish(requested, ElicitationPath::MM3Fallback, mm3(requested).alpha_hat);
  }
  return finish(requested, ElicitationPath::MM4Fallback, mm4(requested).alpha_hat);
}

double variance_from_quantile(double mean, double quantile, double probability) {
  if (!(mean > 0.0 && mean < 1.0)) fail(ErrorKind::InvalidArgument, "mean must lie in (0,1)");
  if (!(quantile > 0.0 && quantile < 1.0)) fail(ErrorKind::InvalidArgument, "quantile must lie in (0,1)");
  if (!(probability > 0.0 && probability < 1.0)) {
    fail(ErrorKind::InvalidArgument, "probability must lie in (0,1)");
  }
  // Concentration s = a + b on a log scale; the marginal is Beta(m s, (1-m) s).
  auto gap = [&](double log_s) {
    const double s = std::exp(log_s);
    return stats::beta_cdf(mean * s, (1.0 - mean) * s, quantile) - probability;
  };
  double lo = std::log(1e-6);
  double hi = std::log(1e8);
  double g_lo = gap(lo);
  const double g_hi = gap(hi);
  if (g_lo * g_hi > 0.0) {
    fail(ErrorKind::InvalidArgument, "no beta marginal with this mean has the requested quantile");
  }
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    const double g_mid = gap(mid);
    if ((g_mid > 0.0) == (g_lo > 0.0)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
  }
  const double s = std::exp(0.5 * (lo + hi));
  return mean * (1.0 - mean) / (s + 1.0);
}

}  // namespace bibeta
