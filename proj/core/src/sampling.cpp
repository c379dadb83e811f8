#include "bibeta/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bibeta/random.hpp"

namespace bibeta {

namespace {

double log_add(double a, double b) {
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// Tiny shapes can put a coordinate within rounding of the boundary.
double interior(double v) {
  constexpr double lo = std::numeric_limits<double>::min();
  constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
  return std::clamp(v, lo, hi);
}

}  // namespace

PairedSample sample(const AlphaParams& alpha, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> xs;
  std::vector<double> ys;
  xs.reserve(n);
  ys.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double g1 = log_gamma_variate(rng, alpha[0]);
    const double g2 = log_gamma_variate(rng, alpha[1]);
    const double g3 = log_gamma_variate(rng, alpha[2]);
    const double g4 = log_gamma_variate(rng, alpha[3]);
    const double total = log_add(log_add(g1, g2), log_add(g3, g4));
    xs.push_back(interior(std::exp(log_add(g1, g2) - total)));
    ys.push_back(interior(std::exp(log_add(g1, g3) - total)));
  }
  return PairedSample(std::move(xs), std::move(ys));
}

}  // namespace bibeta
