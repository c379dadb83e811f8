#include "bibeta/random.hpp"

#include <cmath>

#include "bibeta/error.hpp"

namespace bibeta {

namespace {

double marsaglia_tsang(Rng& rng, double shape) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace

double log_gamma_variate(Rng& rng, double shape) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    fail(ErrorKind::InvalidArgument, "gamma shape must be positive and finite");
  }
  if (shape < 1.0) {
    const double boosted = marsaglia_tsang(rng, shape + 1.0);
    return std::log(boosted) + std::log(rng.uniform()) / shape;
  }
  return std::log(marsaglia_tsang(rng, shape));
}

}  // namespace bibeta
