#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace bibeta {

using Vec4 = std::array<double, 4>;

/// Dirichlet concentration vector (alpha1..alpha4) of the bivariate beta.
/// Every coordinate is strictly positive and finite.
class AlphaParams {
 public:
  AlphaParams(double a1, double a2, double a3, double a4);
  explicit AlphaParams(const Vec4& values);

  double operator[](std::size_t i) const { return values_[i]; }
  const Vec4& values() const noexcept { return values_; }
  double sum() const noexcept { return values_[0] + values_[1] + values_[2] + values_[3]; }

  /// Replaces non-positive coordinates by `floor`. Returns the parameter and
  /// which coordinates were replaced.
  static AlphaParams with_floor(const Vec4& values, double floor, std::array<bool, 4>* replaced = nullptr);

  friend bool operator==(const AlphaParams&, const AlphaParams&) = default;

 private:
  Vec4 values_;
};

/// Means, variances and correlation of a pair (X, Y), theoretical or empirical.
struct MomentSummary {
  double m1 = 0.0;
  double m2 = 0.0;
  double v1 = 0.0;
  double v2 = 0.0;
  double rho = 0.0;

  friend bool operator==(const MomentSummary&, const MomentSummary&) = default;
};

/// Observations (x_i, y_i) in the open unit square, stored column-wise.
class PairedSample {
 public:
  PairedSample() = default;
  PairedSample(std::vector<double> x, std::vector<double> y);

  void reserve(std::size_t n);
  void push_back(double x, double y);

  std::size_t size() const noexcept { return x_.size(); }
  bool empty() const noexcept { return x_.empty(); }
  std::span<const double> x() const noexcept { return x_; }
  std::span<const double> y() const noexcept { return y_; }

  /// Sample with rows picked by `rows` (used by the bootstrap).
  PairedSample select(std::span<const std::size_t> rows) const;

  /// Column-swapped copy: (y_i, x_i).
  PairedSample swapped() const;

  friend bool operator==(const PairedSample&, const PairedSample&) = default;

 private:
  std::vector<double> x_;
  std::vector<double> y_;
};

struct RhoInterval {
  double lower = -1.0;
  double upper = 1.0;

  bool contains_strictly(double rho) const noexcept { return rho > lower && rho < upper; }
};

/// Unconstrained solution of a moments' system. Coordinates may be <= 0.
struct SolverOutcome {
  Vec4 alpha{};
  bool feasible = false;
  double bar_alpha = 0.0;
};

}  // namespace bibeta
