#pragma once

#include "sfca/common.hpp"

namespace sfca {

/// The discretised day: `segments_per_day` equal segments, 1-based.
///
/// Segment s covers minutes [(s-1)*w, s*w) and is represented by its
/// midpoint. `day_start_offset` is the segment that becomes the first one
/// when a score trace is rotated for decoding.
struct SegmentGrid {
  int segments_per_day = 96;
  int day_start_offset = 64;

  static SegmentGrid make(int segments_per_day, int day_start_offset);

  double segment_minutes() const { return kMinutesPerDay / segments_per_day; }

  /// Midpoint of segment s (1-based) in minutes after midnight.
  double midpoint(int s) const { return (s - 0.5) * segment_minutes(); }

  /// Segment (1-based) containing minute-of-day m.
  int segment_of(double minute) const;

  void validate() const;
};

/// Day-of-week index, Monday = 1 .. Sunday = 7.
inline constexpr int kDaysPerWeek = 7;
std::string_view dow_name(int dow);

}  // namespace sfca
