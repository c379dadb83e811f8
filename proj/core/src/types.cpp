#include "bibeta/types.hpp"

#include <cmath>
#include <string>

#include "bibeta/error.hpp"

namespace bibeta {

namespace {

void check_unit(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) {
    fail(ErrorKind::InvalidArgument,
         std::string(name) + " = " + std::to_string(v) + " is outside the open interval (0,1)");
  }
}

}  // namespace

AlphaParams::AlphaParams(double a1, double a2, double a3, double a4)
    : AlphaParams(Vec4{a1, a2, a3, a4}) {}

AlphaParams::AlphaParams(const Vec4& values) : values_(values) {
  for (std::size_t i = 0; i < 4; ++i) {
    if (!(values_[i] > 0.0) || !std::isfinite(values_[i])) {
      fail(ErrorKind::InvalidArgument,
           "alpha" + std::to_string(i + 1) + " must be positive and finite");
    }
  }
}

AlphaParams AlphaParams::with_floor(const Vec4& values, double floor, std::array<bool, 4>* replaced) {
  Vec4 out = values;
  for (std::size_t i = 0; i < 4; ++i) {
    const bool bad = !(out[i] > 0.0);
    if (bad) out[i] = floor;
    if (replaced) (*replaced)[i] = bad;
  }
  return AlphaParams(out);
}

PairedSample::PairedSample(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  if (x_.size() != y_.size()) {
    fail(ErrorKind::InvalidArgument, "x and y columns differ in length");
  }
  for (std::size_t i = 0; i < x_.size(); ++i) {
    check_unit(x_[i], "x");
    check_unit(y_[i], "y");
  }
}

void PairedSample::reserve(std::size_t n) {
  x_.reserve(n);
  y_.reserve(n);
}

void PairedSample::push_back(double x, double y) {
  check_unit(x, "x");
  check_unit(y, "y");
  x_.push_back(x);
  y_.push_back(y);
}

PairedSample PairedSample::select(std::span<const std::size_t> rows) const {
  PairedSample out;
  out.x_.reserve(rows.size());
  out.y_.reserve(rows.size());
  for (std::size_t r : rows) {
    out.x_.push_back(x_.at(r));
    out.y_.push_back(y_.at(r));
  }
  return out;
}

PairedSample PairedSample::swapped() const {
  PairedSample out;
  out.x_ = y_;
  out.y_ = x_;
  return out;
}

}  // namespace bibeta
