#pragma once

#include <string>
#include <vector>

#include "sfca/common.hpp"
#include "sfca/grid.hpp"

namespace sfca {

/// Per-segment class-1 scores for one city-year on the unshifted 1..S
/// grid. Segments without a prediction hold kMissing.
struct ScoreTrace {
  std::string city_id;
  int year = 0;
  Activity activity = Activity::sleep;
  std::vector<double> scores;
};

struct DecodedTimes {
  double start_min = 0;
  double stop_min = 0;
  double duration_min = 0;
};

enum class DenoiseRule { zero_detail, soft_universal };

struct DecodeOptions {
  double smooth_penalty = 0.06;
  std::string wavelet = "sym8";
  DenoiseRule denoise = DenoiseRule::zero_detail;
  int min_scores = 90;
  double flat_tolerance = 1e-6;
  /// Clock minute separating the two sections: sleep 03:00, work 12:00.
  double sleep_split = 180.0;
  double work_split = 720.0;
  /// Work traces are not rotated (the day starts at midnight).
  int work_day_start_offset = 1;
};

struct AuditRow {
  std::string stage;
  int index = 0;
  double clock_min = 0;
  double value = 0;
};

/// Intermediate signals of one decode, in processing order: raw, smoothed,
/// difference, denoised, extrema (index 0 start, 1 stop).
struct DecodeAudit {
  std::vector<AuditRow> rows;
};

/// Rotates, rescales and smooths the scores, differences them, removes the
/// finest wavelet band (averaged over both sample phases so the result
/// does not depend on edge parity) and reads the transition times off a 1-minute
/// spline of each section: the maximum before the split is the start, the
/// minimum after it the stop.
DecodedTimes decode_times(const ScoreTrace& scores, const SegmentGrid& grid, Activity activity,
                          const DecodeOptions& opts = {}, DecodeAudit* audit = nullptr);

/// Sleep wraps over midnight; work is the plain difference.
double duration(const DecodedTimes& times, Activity activity);
double duration(double start_min, double stop_min, Activity activity);

std::string audit_csv(const DecodeAudit& audit);

}  // namespace sfca
