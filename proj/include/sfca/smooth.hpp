#pragma once

#include <span>
#include <vector>

namespace sfca {

/// Orthonormal type-II DCT and its inverse (type-III). O(n^2), cached
/// cosine tables per length.
std::vector<double> dct2(std::span<const double> x);
std::vector<double> idct2(std::span<const double> c);

/// Eigenvalue of the reflective second-difference operator for DCT index
/// i (0-based): -2 + 2 cos(i pi / n).
double difference_eigenvalue(int i, int n);

struct SmoothOptions {
  double penalty = 1.0;
  bool robust = false;
  int robust_iterations = 3;
  double bisquare_constant = 4.685;
  double tolerance = 1e-11;
  int max_iterations = 20000;
};

/// Penalized least-squares smoother evaluated in the DCT basis
/// (Garcia 2010). Missing entries (NaN) get weight zero and are filled by
/// the smooth. With `robust`, residuals are reweighted with Tukey's
/// bisquare for a fixed number of passes.
std::vector<double> garcia_smooth(std::span<const double> series, const SmoothOptions& opts);

inline std::vector<double> garcia_smooth(std::span<const double> series, double penalty,
                                         bool robust = false) {
  SmoothOptions o;
  o.penalty = penalty;
  o.robust = robust;
  return garcia_smooth(series, o);
}

}  // namespace sfca
