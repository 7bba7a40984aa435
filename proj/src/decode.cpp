#include "sfca/decode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sfca/smooth.hpp"
#include "sfca/spline.hpp"
#include "sfca/wavelet.hpp"

namespace sfca {

double duration(double start_min, double stop_min, Activity activity) {
  if (activity == Activity::sleep) return wrap_minutes(stop_min - start_min);
  return stop_min - start_min;
}

double duration(const DecodedTimes& t, Activity activity) {
  return duration(t.start_min, t.stop_min, activity);
}

namespace {

struct Extremum {
  double minute = 0;
  double value = 0;
};

// Extremum of the spline on integer minutes in [lo, hi); ties go to the
// candidate nearest the centre of the range.
Extremum section_extremum(const CubicSpline& spline, double lo, double hi, bool maximum) {
  const double first = std::ceil(lo);
  const double centre = 0.5 * (lo + hi);
  Extremum best{first, maximum ? -INFINITY : INFINITY};
  bool any = false;
  for (double m = first; m < hi; m += 1.0) {
    const double v = spline(m);
    const bool better = maximum ? v > best.value : v < best.value;
    const bool tie = v == best.value && std::abs(m - centre) < std::abs(best.minute - centre);
    if (!any || better || tie) best = {m, v};
    any = true;
  }
  if (!any) throw Error("decode section is empty");
  return best;
}

}  // namespace

DecodedTimes decode_times(const ScoreTrace& trace, const SegmentGrid& grid, Activity activity,
                          const DecodeOptions& opts, DecodeAudit* audit) {
  grid.validate();
  const int n = grid.segments_per_day;
  const double w = grid.segment_minutes();
  if (static_cast<int>(trace.scores.size()) != n)
    throw Error("score trace has " + std::to_string(trace.scores.size()) + " segments, grid has " +
                std::to_string(n));
  int present = 0;
  double lo = INFINITY, hi = -INFINITY;
  for (double v : trace.scores) {
    if (is_missing(v)) continue;
    if (v < 0.0 || v > 1.0) throw Error("score outside [0, 1]");
    ++present;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (present < opts.min_scores)
    throw Error("decode needs at least " + std::to_string(opts.min_scores) + " scores, got " +
                std::to_string(present));
  if (hi - lo < opts.flat_tolerance) throw Error("no transition found");

  const int offset = activity == Activity::sleep ? grid.day_start_offset : opts.work_day_start_offset;
  if (offset < 1 || offset > n) throw Error("day start offset outside the grid");
  const double origin = (offset - 1) * w;

  std::vector<double> rotated(n);
  for (int k = 0; k < n; ++k) {
    const double v = trace.scores[(offset - 1 + k) % n];
    rotated[k] = is_missing(v) ? kMissing : (v - lo) / (hi - lo);
  }
  auto clock_of = [&](double u) { return wrap_minutes(u); };
  if (audit)
    for (int k = 0; k < n; ++k)
      audit->rows.push_back({"raw", k, clock_of(origin + (k + 0.5) * w), rotated[k]});

  const auto smoothed = garcia_smooth(rotated, opts.smooth_penalty);
  if (audit)
    for (int k = 0; k < n; ++k)
      audit->rows.push_back({"smoothed", k, clock_of(origin + (k + 0.5) * w), smoothed[k]});

  // Differences sit on the boundary between consecutive segments.
  std::vector<double> diff(n - 1), knots(n - 1);
  for (int k = 1; k < n; ++k) {
    diff[k - 1] = smoothed[k] - smoothed[k - 1];
    knots[k - 1] = origin + k * w;
  }
  if (audit)
    for (int k = 0; k < n - 1; ++k) audit->rows.push_back({"difference", k, clock_of(knots[k]), diff[k]});

  const Wavelet wav = Wavelet::named(opts.wavelet);
  // Two-phase cycle spin: a decimated transform moves odd-indexed edges by
  // half a knot, averaging both phases removes that parity dependence.
  auto denoise = [&](std::span<const double> v) {
    return opts.denoise == DenoiseRule::zero_detail ? wavelet_denoise_level1(v, wav)
                                                    : wavelet_denoise_soft(v, wav);
  };
  auto denoised = denoise(diff);
  const auto shifted = denoise(std::span<const double>(diff).subspan(1));
  for (std::size_t k = 1; k < denoised.size(); ++k) denoised[k] = 0.5 * (denoised[k] + shifted[k - 1]);
  if (audit)
    for (int k = 0; k < n - 1; ++k)
      audit->rows.push_back({"denoised", k, clock_of(knots[k]), denoised[k]});

  double peak = 0;
  for (double v : denoised) peak = std::max(peak, std::abs(v));
  if (peak < opts.flat_tolerance) throw Error("no transition found");

  const double split_clock = activity == Activity::sleep ? opts.sleep_split : opts.work_split;
  const double split = split_clock >= origin ? split_clock : split_clock + kMinutesPerDay;
  if (split <= knots.front() || split > knots.back())
    throw Error("decode split lies outside the rotated day");

  const CubicSpline spline(knots, denoised);
  const Extremum rise = section_extremum(spline, knots.front(), split, true);
  const Extremum fall = section_extremum(spline, split, knots.back() + 0.5, false);

  DecodedTimes out;
  out.start_min = clock_of(rise.minute);
  out.stop_min = clock_of(fall.minute);
  out.duration_min = duration(out, activity);
  if (audit) {
    audit->rows.push_back({"extrema", 0, out.start_min, rise.value});
    audit->rows.push_back({"extrema", 1, out.stop_min, fall.value});
  }
  return out;
}

std::string audit_csv(const DecodeAudit& audit) {
  std::ostringstream os;
  os.precision(17);
  os << "stage,index,clock_min,value\n";
  for (const auto& r : audit.rows) os << r.stage << ',' << r.index << ',' << r.clock_min << ',' << r.value << '\n';
  return os.str();
}

}  // namespace sfca
