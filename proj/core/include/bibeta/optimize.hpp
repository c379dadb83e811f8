#pragma once

#include <functional>
#include <span>
#include <vector>

namespace bibeta::optimize {

struct NelderMeadOptions {
  int max_evaluations = 20000;
  double initial_step = 0.25;
  /// Stop when max - min over the simplex is below abs + rel * |min| ...
  double f_abs_tolerance = 1e-24;
  double f_rel_tolerance = 1e-12;
  /// ... and the simplex diameter (infinity norm) is below this.
  double x_tolerance = 1e-9;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  bool converged = false;
  int evaluations = 0;
};

using Objective = std::function<double(std::span<const double>)>;

/// Derivative-free simplex minimization (dimension-adaptive coefficients).
/// Non-finite objective values are treated as +infinity.
NelderMeadResult nelder_mead(const Objective& f, std::vector<double> start,
                             const NelderMeadOptions& options = {});

}  // namespace bibeta::optimize
