#include "bibeta/moments.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bibeta/error.hpp"

namespace bibeta {

namespace {

void require_mean(double m, const char* name) {
  if (!(m > 0.0 && m < 1.0)) {
    fail(ErrorKind::InvalidArgument, std::string(name) + " must lie in (0,1)");
  }
}

void require_rho(double rho) {
  if (!(rho >= -1.0 && rho <= 1.0)) {
    fail(ErrorKind::InvalidArgument, "rho must lie in [-1,1]");
  }
}

}  // namespace

double marginal_scale(double m1, double m2) {
  return std::sqrt(m1 * m2 * (1.0 - m1) * (1.0 - m2));
}

MomentSummary moments_of(const AlphaParams& alpha) { return moments_of(alpha.values()); }

MomentSummary moments_of(const Vec4& a) {
  const double s = a[0] + a[1] + a[2] + a[3];
  const double x_top = a[0] + a[1];
  const double x_bottom = a[2] + a[3];
  const double y_top = a[0] + a[2];
  const double y_bottom = a[1] + a[3];
  const double denom = x_top * x_bottom * y_top * y_bottom;
  if (!(s > 0.0) || !(denom > 0.0)) {
    fail(ErrorKind::InvalidArgument, "alpha does not define non-degenerate marginals");
  }
  MomentSummary out;
  out.m1 = x_top / s;
  out.m2 = y_top / s;
  out.v1 = x_top * x_bottom / (s * s * (s + 1.0));
  out.v2 = y_top * y_bottom / (s * s * (s + 1.0));
  out.rho = (a[0] * a[3] - a[1] * a[2]) / std::sqrt(denom);
  return out;
}

SolverOutcome solve_four_moments(double m1, double m2, double v1, double rho) {
  require_mean(m1, "m1");
  require_mean(m2, "m2");
  require_rho(rho);
  if (!(v1 > 0.0)) fail(ErrorKind::InvalidArgument, "v1 must be positive");
  if (v1 >= m1 * (1.0 - m1)) {
    fail(ErrorKind::InfeasibleVariance, "v1 >= m1(1-m1): no beta marginal has this variance");
  }

  SolverOutcome out;
  out.bar_alpha = (m1 - m1 * m1 - v1) / v1;
  const double a4 = out.bar_alpha * (rho * marginal_scale(m1, m2) + (1.0 - m1) * (1.0 - m2));
  out.alpha = {
      (m1 + m2 - 1.0) * out.bar_alpha + a4,
      (1.0 - m2) * out.bar_alpha - a4,
      (1.0 - m1) * out.bar_alpha - a4,
      a4,
  };
  out.feasible = std::all_of(out.alpha.begin(), out.alpha.end(), [](double a) { return a > 0.0; });
  return out;
}

SolverOutcome solve_three_moments(double m1, double m2, double rho, double alpha4) {
  require_mean(m1, "m1");
  require_mean(m2, "m2");
  require_rho(rho);
  if (!(alpha4 > 0.0)) fail(ErrorKind::InvalidArgument, "alpha4 must be positive");

  const double cross = rho * marginal_scale(m1, m2);
  const double denom = (1.0 - m1) * (1.0 - m2) + cross;
  if (!(denom > 0.0)) {
    fail(ErrorKind::DegenerateDenominator,
         "(1-m1)(1-m2) + rho*sqrt(m1 m2 (1-m1)(1-m2)) is not positive");
  }
  SolverOutcome out;
  out.alpha = {
      alpha4 * (m1 * m2 + cross) / denom,
      alpha4 * (m1 * (1.0 - m2) - cross) / denom,
      alpha4 * (m2 * (1.0 - m1) - cross) / denom,
      alpha4,
  };
  out.bar_alpha = alpha4 / denom;
  out.feasible = std::all_of(out.alpha.begin(), out.alpha.end(), [](double a) { return a > 0.0; });
  return out;
}

RhoInterval rho_bounds(double m1, double m2) {
  require_mean(m1, "m1");
  require_mean(m2, "m2");
  const double scale = marginal_scale(m1, m2);
  RhoInterval out;
  out.lower = -std::min(m1 * m2, (1.0 - m1) * (1.0 - m2)) / scale;
  out.upper = (std::min(m1, m2) - m1 * m2) / scale;
  return out;
}

}  // namespace bibeta
