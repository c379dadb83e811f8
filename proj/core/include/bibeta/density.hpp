#pragma once

#include "bibeta/types.hpp"

namespace bibeta {

/// log B(alpha) = sum(lgamma(alpha_i)) - lgamma(sum(alpha)).
double log_beta_function(const Vec4& alpha);

/// False on the null set where the mixing integral diverges:
/// alpha1 + alpha4 <= 1 with x + y = 1, or alpha2 + alpha3 <= 1 with x = y.
/// Equalities are tested to an absolute tolerance of 1e-12.
bool is_density_defined(const AlphaParams& alpha, double x, double y);

struct DensityOptions {
  double relative_tolerance = 1e-8;
};

/// Joint density of (X, Y) at an interior point, by double-exponential
/// quadrature of the latent U1 over (max(0, x+y-1), min(x, y)).
/// Throws UndefinedDensity on the singular set and QuadratureFailure when the
/// tolerance cannot be met.
double density(const AlphaParams& alpha, double x, double y, const DensityOptions& options = {});

}  // namespace bibeta
