#include "bibeta/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bibeta/error.hpp"

namespace bibeta::optimize {

namespace {

struct Vertex {
  std::vector<double> x;
  double f = 0.0;
};

}  // namespace

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> start,
                             const NelderMeadOptions& options) {
  const std::size_t dim = start.size();
  if (dim == 0) fail(ErrorKind::InvalidArgument, "nelder_mead needs at least one variable");

  // Gao & Han coefficients; they reduce to the classic ones in 2-D.
  const double n = static_cast<double>(dim);
  const double reflect = 1.0;
  const double expand = 1.0 + 2.0 / n;
  const double contract = 0.75 - 1.0 / (2.0 * n);
  const double shrink = 1.0 - 1.0 / n;

  int evaluations = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<Vertex> simplex(dim + 1);
  simplex[0].x = start;
  simplex[0].f = eval(start);
  for (std::size_t i = 0; i < dim; ++i) {
    auto x = start;
    x[i] += options.initial_step;
    simplex[i + 1].x = std::move(x);
    simplex[i + 1].f = eval(simplex[i + 1].x);
  }

  auto by_value = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };
  std::vector<double> centroid(dim);
  std::vector<double> trial(dim);
  auto affine = [&](double t, const std::vector<double>& toward) {
    // centroid + t * (centroid - toward)
    for (std::size_t j = 0; j < dim; ++j) trial[j] = centroid[j] + t * (centroid[j] - toward[j]);
    return trial;
  };

  bool converged = false;
  while (evaluations < options.max_evaluations) {
    std::sort(simplex.begin(), simplex.end(), by_value);
    const double best = simplex.front().f;
    const double worst = simplex.back().f;
    double diameter = 0.0;
    for (std::size_t i = 1; i <= dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j) {
        diameter = std::max(diameter, std::abs(simplex[i].x[j] - simplex[0].x[j]));
      }
    }
    if (std::isfinite(worst) &&
        worst - best <= options.f_abs_tolerance + options.f_rel_tolerance * std::abs(best) &&
        diameter <= options.x_tolerance) {
      converged = true;
      break;
    }
    if (diameter < 1e-15) {
      // Collapsed simplex that still disagrees in value; nothing left to do.
      converged = std::isfinite(best);
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j) centroid[j] += simplex[i].x[j];
    }
    for (double& c : centroid) c /= n;

    Vertex& last = simplex.back();
    const std::vector<double> reflected = affine(reflect, last.x);
    const double f_reflected = eval(reflected);

    if (f_reflected < simplex.front().f) {
      const std::vector<double> expanded = affine(expand, last.x);
      const double f_expanded = eval(expanded);
      if (f_expanded < f_reflected) {
        last = {expanded, f_expanded};
      } else {
        last = {reflected, f_reflected};
      }
      continue;
    }
    if (f_reflected < simplex[dim - 1].f) {
      last = {reflected, f_reflected};
      continue;
    }

    bool outside = f_reflected < last.f;
    const std::vector<double> contracted =
        outside ? affine(contract * reflect, last.x) : affine(-contract, last.x);
    const double f_contracted = eval(contracted);
    if (f_contracted < std::min(f_reflected, last.f)) {
      last = {contracted, f_contracted};
      continue;
    }

    for (std::size_t i = 1; i <= dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j) {
        simplex[i].x[j] = simplex[0].x[j] + shrink * (simplex[i].x[j] - simplex[0].x[j]);
      }
      simplex[i].f = eval(simplex[i].x);
    }
  }

  std::sort(simplex.begin(), simplex.end(), by_value);
  NelderMeadResult result;
  result.x = simplex.front().x;
  result.value = simplex.front().f;
  result.converged = converged;
  result.evaluations = evaluations;
  return result;
}

}  // namespace bibeta::optimize
