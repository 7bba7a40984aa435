#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sfca {

/// Orthogonal symlet filter bank. Only the decomposition low-pass filter is
/// stored; the others follow from the quadrature-mirror relations.
class Wavelet {
 public:
  /// Supported: "sym3", "sym8".
  static Wavelet symlet(int order);
  static Wavelet named(std::string_view name);

  std::string_view name() const { return name_; }
  int length() const { return static_cast<int>(dec_lo_.size()); }
  const std::vector<double>& dec_lo() const { return dec_lo_; }
  const std::vector<double>& dec_hi() const { return dec_hi_; }
  const std::vector<double>& rec_lo() const { return rec_lo_; }
  const std::vector<double>& rec_hi() const { return rec_hi_; }

 private:
  Wavelet(std::string name, std::vector<double> dec_lo);

  std::string name_;
  std::vector<double> dec_lo_, dec_hi_, rec_lo_, rec_hi_;
};

/// Length of one decomposition level's output under half-point symmetric
/// extension: floor((len + flen - 1) / 2).
int dwt_output_length(int input_length, int filter_length);

struct DwtLevel {
  std::vector<double> approx;
  std::vector<double> detail;
};

/// Single-level DWT with half-point symmetric boundary extension.
DwtLevel dwt(std::span<const double> x, const Wavelet& w);

/// Inverse of `dwt`. Returns 2*len - flen + 2 samples; callers trim to the
/// original length. An empty `detail` is treated as zeros.
std::vector<double> idwt(std::span<const double> approx, std::span<const double> detail,
                         const Wavelet& w);

/// Level-`level` approximation coefficients of a multi-level DWT.
/// Throws when some level's input is shorter than the filter.
std::vector<double> wavelet_compress(std::span<const double> series, const Wavelet& w, int level);

/// Zeroes the level-1 detail band and reconstructs (same length as input).
std::vector<double> wavelet_denoise_level1(std::span<const double> series, const Wavelet& w);

/// Level-1 soft thresholding at the universal threshold sigma*sqrt(2 ln n),
/// sigma estimated from the detail band's MAD.
std::vector<double> wavelet_denoise_soft(std::span<const double> series, const Wavelet& w);

}  // namespace sfca
