#pragma once

#include "bibeta/types.hpp"

namespace bibeta {

/// Closed-form means, variances and correlation of BivariateBeta(alpha).
MomentSummary moments_of(const AlphaParams& alpha);

/// Same formulas for a vector that may contain zeros (clamped estimates).
/// Requires a positive sum and non-degenerate marginals.
MomentSummary moments_of(const Vec4& alpha);

/// Exact inverse of the (m1, m2, v1, rho) equations. The solution is returned
/// as computed, coordinates may be non-positive; `feasible` reports whether all
/// four are strictly positive. Throws InfeasibleVariance if v1 >= m1(1-m1).
SolverOutcome solve_four_moments(double m1, double m2, double v1, double rho);

/// Solution of the (m1, m2, rho) equations scaled by a free alpha4. Throws
/// DegenerateDenominator if (1-m1)(1-m2) + rho*sqrt(m1 m2 (1-m1)(1-m2)) <= 0.
SolverOutcome solve_three_moments(double m1, double m2, double rho, double alpha4);

/// Correlations for which the four-moment solution is strictly positive.
RhoInterval rho_bounds(double m1, double m2);

/// sqrt(m1 m2 (1-m1) (1-m2)), the scale shared by all correlation formulas.
double marginal_scale(double m1, double m2);

}  // namespace bibeta
