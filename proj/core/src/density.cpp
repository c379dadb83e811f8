#include "bibeta/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "bibeta/error.hpp"

namespace bibeta {

namespace {

constexpr double kSingularTolerance = 1e-12;
constexpr double kDegenerateWidth = 1e-15;
// The tanh-sinh error estimate is the gap between the last two refinement
// levels on the reference interval (-1, 1); accept up to this multiple of the
// requested tolerance.
constexpr double kErrorSlack = 100.0;

boost::math::quadrature::tanh_sinh<double>& integrator() {
  thread_local boost::math::quadrature::tanh_sinh<double> instance(15);
  return instance;
}

}  // namespace

double log_beta_function(const Vec4& alpha) {
  double sum = 0.0;
  double out = 0.0;
  for (double a : alpha) {
    out += boost::math::lgamma(a);
    sum += a;
  }
  return out - boost::math::lgamma(sum);
}

bool is_density_defined(const AlphaParams& alpha, double x, double y) {
  if (alpha[0] + alpha[3] <= 1.0 && std::abs(x + y - 1.0) <= kSingularTolerance) return false;
  if (alpha[1] + alpha[2] <= 1.0 && std::abs(x - y) <= kSingularTolerance) return false;
  return true;
}

double density(const AlphaParams& alpha, double x, double y, const DensityOptions& options) {
  if (!(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0)) {
    fail(ErrorKind::InvalidArgument, "density is evaluated on the open unit square only");
  }
  if (!is_density_defined(alpha, x, y)) {
    fail(ErrorKind::UndefinedDensity,
         "density diverges at (" + std::to_string(x) + ", " + std::to_string(y) + ")");
  }

  const double lower = std::max(0.0, x + y - 1.0);
  const double upper = std::min(x, y);
  const double width = upper - lower;
  if (width <= kDegenerateWidth) return 0.0;

  const Vec4& a = alpha.values();
  const double log_norm = log_beta_function(a);
  const bool lower_is_zero = !(x + y - 1.0 > 0.0);
  const bool upper_is_x = x <= y;
  const double gap_xy = std::abs(y - x);
  const double slack_d = 1.0 - x - y;

  auto term = [](double exponent, double value) {
    return exponent == 0.0 ? 0.0 : exponent * std::log(value);
  };

  // xc is a - u on the left half and b - u on the right half, which lets the
  // distances to both ends of the interval be formed without cancellation.
  auto integrand = [&](double u, double xc) -> double {
    double from_lower = 0.0;
    double to_upper = 0.0;
    if (xc < 0.0) {
      from_lower = -xc;
      to_upper = upper - u;
    } else {
      to_upper = xc;
      from_lower = u - lower;
    }
    const double u1 = lower_is_zero ? from_lower : lower + from_lower;
    const double u4 = lower_is_zero ? slack_d + from_lower : from_lower;
    const double u2 = upper_is_x ? to_upper : gap_xy + to_upper;
    const double u3 = upper_is_x ? gap_xy + to_upper : to_upper;
    const double log_value = term(a[0] - 1.0, u1) + term(a[1] - 1.0, u2) +
                             term(a[2] - 1.0, u3) + term(a[3] - 1.0, u4) - log_norm;
    return std::exp(log_value);
  };

  double error = 0.0;
  double l1 = 0.0;
  double result = 0.0;
  try {
    result = integrator().integrate(integrand, lower, upper, options.relative_tolerance, &error, &l1);
  } catch (const std::exception& e) {
    fail(ErrorKind::QuadratureFailure, std::string("quadrature failed: ") + e.what());
  }
  error *= 0.5 * width;
  if (!std::isfinite(result) || error > kErrorSlack * options.relative_tolerance * std::max(l1, 1e-300)) {
    fail(ErrorKind::QuadratureFailure, "quadrature did not reach the requested tolerance");
  }
  return result;
}

}  // namespace bibeta
