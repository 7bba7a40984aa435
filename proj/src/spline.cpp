#include "sfca/spline.hpp"

#include <algorithm>
#include <cmath>

#include "sfca/common.hpp"

namespace sfca {

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) throw Error("spline needs at least two knots of matching size");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x_[i]) || !std::isfinite(y_[i])) throw Error("spline knots must be finite");
    if (i > 0 && !(x_[i] > x_[i - 1])) throw Error("spline knots must be strictly increasing");
  }
  m_.assign(n, 0.0);
  if (n == 2) return;

  // Tridiagonal system for interior second derivatives (Thomas algorithm).
  const std::size_t k = n - 2;
  std::vector<double> diag(k), upper(k), rhs(k);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = x_[i] - x_[i - 1];
    const double h1 = x_[i + 1] - x_[i];
    diag[i - 1] = 2.0 * (h0 + h1);
    upper[i - 1] = h1;
    rhs[i - 1] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
  }
  for (std::size_t i = 1; i < k; ++i) {
    const double lower = x_[i + 1] - x_[i];  // h_{i} below the diagonal
    const double f = lower / diag[i - 1];
    diag[i] -= f * upper[i - 1];
    rhs[i] -= f * rhs[i - 1];
  }
  m_[k] = rhs[k - 1] / diag[k - 1];
  for (std::size_t i = k - 1; i >= 1; --i) m_[i] = (rhs[i - 1] - upper[i - 1] * m_[i + 1]) / diag[i - 1];
}

std::size_t CubicSpline::interval(double t) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), t);
  std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
  return std::min(i, x_.size() - 2);
}

double CubicSpline::derivative(double t) const {
  const std::size_t i = interval(std::clamp(t, x_.front(), x_.back()));
  const double h = x_[i + 1] - x_[i];
  const double tc = std::clamp(t, x_.front(), x_.back());
  const double a = (x_[i + 1] - tc) / h;
  const double b = (tc - x_[i]) / h;
  return (y_[i + 1] - y_[i]) / h + h * ((3 * b * b - 1) * m_[i + 1] - (3 * a * a - 1) * m_[i]) / 6.0;
}

double CubicSpline::operator()(double t) const {
  if (t < x_.front()) return y_.front() + derivative(x_.front()) * (t - x_.front());
  if (t > x_.back()) return y_.back() + derivative(x_.back()) * (t - x_.back());
  const std::size_t i = interval(t);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - t) / h;
  const double b = (t - x_[i]) / h;
  return a * y_[i] + b * y_[i + 1] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

std::vector<double> CubicSpline::operator()(std::span<const double> ts) const {
  std::vector<double> out;
  out.reserve(ts.size());
  for (double t : ts) out.push_back((*this)(t));
  return out;
}

}  // namespace sfca
