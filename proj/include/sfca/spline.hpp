#pragma once

#include <span>
#include <vector>

namespace sfca {

/// Natural cubic spline through strictly increasing knots.
/// Outside the knot range it extrapolates linearly with the end slope,
/// which is the natural-boundary continuation (zero curvature).
class CubicSpline {
 public:
  CubicSpline(std::vector<double> x, std::vector<double> y);

  double operator()(double t) const;
  std::vector<double> operator()(std::span<const double> ts) const;

  double derivative(double t) const;

 private:
  std::size_t interval(double t) const;

  std::vector<double> x_, y_, m_;  // m_: second derivatives at knots
};

}  // namespace sfca
