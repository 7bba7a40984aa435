#include "sfca/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sfca/common.hpp"

namespace sfca {
namespace {

const std::vector<double> kSym3 = {0.035226291882100656, -0.08544127388224149,
                                   -0.13501102001039084, 0.4598775021193313,
                                   0.8068915093133388,   0.3326705529509569};

const std::vector<double> kSym8 = {
    -0.0033824159510061256, -0.0005421323317911481, 0.03169508781149298,
    0.007607487324917605,   -0.1432942383508097,    -0.061273359067658524,
    0.4813596512583722,     0.7771857517005235,     0.3644418948353314,
    -0.05194583810770904,   -0.027219029917056003,  0.049137179673607506,
    0.003808752013890615,   -0.01495225833704823,   -0.0003029205147213668,
    0.0018899503327594609};

// Half-point symmetric reflection: x[-1] = x[0], x[N] = x[N-1].
long reflect(long i, long n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return i;
}

std::vector<double> analysis(std::span<const double> x, const std::vector<double>& filter) {
  const long n = static_cast<long>(x.size());
  const long f = static_cast<long>(filter.size());
  const int out_len = dwt_output_length(static_cast<int>(n), static_cast<int>(f));
  std::vector<double> out(out_len, 0.0);
  for (long k = 0; k < out_len; ++k) {
    const long centre = 2 * k + 1;
    double s = 0.0;
    for (long j = 0; j < f; ++j) s += filter[j] * x[reflect(centre - j, n)];
    out[k] = s;
  }
  return out;
}

void synthesis(std::span<const double> c, const std::vector<double>& filter,
               std::vector<double>& out) {
  const long f = static_cast<long>(filter.size());
  const long len = static_cast<long>(out.size());
  for (long k = 0; k < static_cast<long>(c.size()); ++k) {
    // full[m] = sum_k c[k] rec[m - 2k]; output i maps to m = i + f - 2.
    for (long j = 0; j < f; ++j) {
      const long i = 2 * k + j - (f - 2);
      if (i >= 0 && i < len) out[i] += c[k] * filter[j];
    }
  }
}

}  // namespace

Wavelet::Wavelet(std::string name, std::vector<double> dec_lo)
    : name_(std::move(name)), dec_lo_(std::move(dec_lo)) {
  const std::size_t f = dec_lo_.size();
  rec_lo_.assign(dec_lo_.rbegin(), dec_lo_.rend());
  rec_hi_.resize(f);
  for (std::size_t i = 0; i < f; ++i) rec_hi_[i] = (i % 2 == 0 ? 1.0 : -1.0) * dec_lo_[i];
  dec_hi_.assign(rec_hi_.rbegin(), rec_hi_.rend());
}

Wavelet Wavelet::symlet(int order) {
  switch (order) {
    case 3:
      return Wavelet("sym3", kSym3);
    case 8:
      return Wavelet("sym8", kSym8);
    default:
      throw Error("unsupported symlet order " + std::to_string(order));
  }
}

Wavelet Wavelet::named(std::string_view name) {
  if (name == "sym3") return symlet(3);
  if (name == "sym8") return symlet(8);
  throw Error("unsupported wavelet '" + std::string(name) + "'");
}

int dwt_output_length(int input_length, int filter_length) {
  return (input_length + filter_length - 1) / 2;
}

DwtLevel dwt(std::span<const double> x, const Wavelet& w) {
  if (x.empty()) throw Error("dwt of empty signal");
  return {analysis(x, w.dec_lo()), analysis(x, w.dec_hi())};
}

std::vector<double> idwt(std::span<const double> approx, std::span<const double> detail,
                         const Wavelet& w) {
  if (!detail.empty() && detail.size() != approx.size())
    throw Error("idwt: approximation and detail lengths differ");
  const long len = 2 * static_cast<long>(approx.size()) - w.length() + 2;
  if (len <= 0) throw Error("idwt: too few coefficients for filter length");
  std::vector<double> out(len, 0.0);
  synthesis(approx, w.rec_lo(), out);
  if (!detail.empty()) synthesis(detail, w.rec_hi(), out);
  return out;
}

std::vector<double> wavelet_compress(std::span<const double> series, const Wavelet& w,
                                     int level) {
  if (level < 1) throw Error("wavelet level must be positive");
  std::vector<double> cur(series.begin(), series.end());
  for (int l = 1; l <= level; ++l) {
    if (static_cast<int>(cur.size()) < w.length())
      throw Error("wavelet level " + std::to_string(level) + " infeasible for length " +
                  std::to_string(series.size()) + " with " + std::string(w.name()));
    cur = analysis(cur, w.dec_lo());
  }
  return cur;
}

std::vector<double> wavelet_denoise_level1(std::span<const double> series, const Wavelet& w) {
  if (static_cast<int>(series.size()) < 2) throw Error("denoise needs at least two samples");
  auto approx = analysis(series, w.dec_lo());
  auto rec = idwt(approx, {}, w);
  rec.resize(series.size());
  return rec;
}

std::vector<double> wavelet_denoise_soft(std::span<const double> series, const Wavelet& w) {
  if (static_cast<int>(series.size()) < 2) throw Error("denoise needs at least two samples");
  auto level = dwt(series, w);
  std::vector<double> mag;
  mag.reserve(level.detail.size());
  for (double d : level.detail) mag.push_back(std::abs(d));
  std::nth_element(mag.begin(), mag.begin() + mag.size() / 2, mag.end());
  const double sigma = mag[mag.size() / 2] / 0.6745;
  const double thr = sigma * std::sqrt(2.0 * std::log(static_cast<double>(series.size())));
  for (double& d : level.detail) {
    const double a = std::abs(d) - thr;
    d = a > 0 ? std::copysign(a, d) : 0.0;
  }
  auto rec = idwt(level.approx, level.detail, w);
  rec.resize(series.size());
  return rec;
}

}  // namespace sfca
