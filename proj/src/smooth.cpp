#include "sfca/smooth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "sfca/common.hpp"

namespace sfca {
namespace {

// Row-major n x n matrix B with B[k][j] = alpha_k cos(pi (2j+1) k / 2n).
const std::vector<double>& dct_basis(int n) {
  thread_local std::unordered_map<int, std::vector<double>> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<double> b(static_cast<std::size_t>(n) * n);
  const double a0 = std::sqrt(1.0 / n);
  const double ak = std::sqrt(2.0 / n);
  for (int k = 0; k < n; ++k) {
    const double alpha = k == 0 ? a0 : ak;
    for (int j = 0; j < n; ++j)
      b[static_cast<std::size_t>(k) * n + j] =
          alpha * std::cos(std::numbers::pi * (2.0 * j + 1.0) * k / (2.0 * n));
  }
  return cache.emplace(n, std::move(b)).first->second;
}

std::vector<double> fill_linear(std::span<const double> y) {
  const int n = static_cast<int>(y.size());
  std::vector<double> out(y.begin(), y.end());
  int prev = -1;
  for (int i = 0; i < n; ++i) {
    if (is_missing(y[i])) continue;
    if (prev < 0) {
      for (int j = 0; j < i; ++j) out[j] = y[i];
    } else if (i - prev > 1) {
      for (int j = prev + 1; j < i; ++j)
        out[j] = y[prev] + (y[i] - y[prev]) * (j - prev) / double(i - prev);
    }
    prev = i;
  }
  if (prev < 0) throw Error("empty trace");
  for (int j = prev + 1; j < n; ++j) out[j] = y[prev];
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + mid));
  }
  return m;
}

}  // namespace

std::vector<double> dct2(std::span<const double> x) {
  const int n = static_cast<int>(x.size());
  const auto& b = dct_basis(n);
  std::vector<double> c(n, 0.0);
  for (int k = 0; k < n; ++k) {
    const double* row = &b[static_cast<std::size_t>(k) * n];
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += row[j] * x[j];
    c[k] = s;
  }
  return c;
}

std::vector<double> idct2(std::span<const double> c) {
  const int n = static_cast<int>(c.size());
  const auto& b = dct_basis(n);
  std::vector<double> x(n, 0.0);
  for (int k = 0; k < n; ++k) {
    const double* row = &b[static_cast<std::size_t>(k) * n];
    const double ck = c[k];
    for (int j = 0; j < n; ++j) x[j] += row[j] * ck;
  }
  return x;
}

double difference_eigenvalue(int i, int n) {
  return -2.0 + 2.0 * std::cos(i * std::numbers::pi / n);
}

std::vector<double> garcia_smooth(std::span<const double> series, const SmoothOptions& opts) {
  const int n = static_cast<int>(series.size());
  if (n < 3) throw Error("garcia_smooth needs at least 3 values, got " + std::to_string(n));
  if (!(opts.penalty >= 0.0)) throw Error("smoothing penalty must be non-negative");

  std::vector<double> gamma(n);
  for (int i = 0; i < n; ++i) {
    const double lambda = difference_eigenvalue(i, n);
    gamma[i] = 1.0 / (1.0 + opts.penalty * lambda * lambda);
  }
  auto apply = [&](std::span<const double> v) {
    auto c = dct2(v);
    for (int i = 0; i < n; ++i) c[i] *= gamma[i];
    return idct2(c);
  };

  std::vector<double> presence(n);
  bool any_missing = false;
  for (int i = 0; i < n; ++i) {
    presence[i] = is_missing(series[i]) ? 0.0 : 1.0;
    any_missing = any_missing || presence[i] == 0.0;
  }
  const std::vector<double> y = fill_linear(series);

  if (!any_missing && !opts.robust) {
    if (opts.penalty == 0.0) return y;
    return apply(y);
  }

  // Fixed point of z <- H(W (y - z) + z), started from the filled series.
  auto weighted_fit = [&](const std::vector<double>& w, std::vector<double> z) {
    const bool unit = std::all_of(w.begin(), w.end(), [](double v) { return v == 1.0; });
    if (unit) return apply(y);
    std::vector<double> target(n);
    for (int it = 0; it < opts.max_iterations; ++it) {
      for (int i = 0; i < n; ++i) target[i] = w[i] * (y[i] - z[i]) + z[i];
      auto next = apply(target);
      double delta = 0.0, scale = 0.0;
      for (int i = 0; i < n; ++i) {
        delta = std::max(delta, std::abs(next[i] - z[i]));
        scale = std::max(scale, std::abs(next[i]));
      }
      z = std::move(next);
      if (delta <= opts.tolerance * (1.0 + scale)) break;
    }
    return z;
  };

  std::vector<double> z = weighted_fit(presence, y);
  if (!opts.robust) return z;

  double hat = 0.0;
  for (double g : gamma) hat += g;
  hat /= n;
  const double lev = std::sqrt(std::max(1e-12, 1.0 - hat));

  std::vector<double> robust_w(n, 1.0);
  for (int pass = 0; pass < opts.robust_iterations; ++pass) {
    std::vector<double> resid;
    resid.reserve(n);
    for (int i = 0; i < n; ++i)
      if (presence[i] > 0) resid.push_back(y[i] - z[i]);
    const double med = median(resid);
    std::vector<double> dev;
    dev.reserve(resid.size());
    for (double r : resid) dev.push_back(std::abs(r - med));
    const double mad = median(dev);
    if (mad <= 0.0) break;
    const double scale = 1.4826 * mad * lev;
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) {
      const double u = (y[i] - z[i]) / scale / opts.bisquare_constant;
      robust_w[i] = std::abs(u) < 1.0 ? (1.0 - u * u) * (1.0 - u * u) : 0.0;
      w[i] = presence[i] * robust_w[i];
    }
    z = weighted_fit(w, z);
  }
  return z;
}

}  // namespace sfca
