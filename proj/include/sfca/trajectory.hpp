#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sfca/common.hpp"
#include "sfca/grid.hpp"

namespace sfca {

/// Online/offline counts for one city and segment.
struct ScanAggregate {
  std::string city_id;
  int segment = 0;
  std::uint64_t count_online = 0;
  std::uint64_t count_offline = 0;
};

/// One responsive-address observation.
struct ScanRecord {
  std::string city_id;
  double minute = 0;  // minute of day
  bool online = false;
};

/// One day's values on the segment grid. Missing segments hold kMissing.
struct DailyTrace {
  std::string city_id;
  int year = 0;
  std::string date;
  int dow = 1;  // Monday = 1
  std::vector<double> values;
};

/// Representative Monday..Sunday for one city-year.
struct SyntheticWeek {
  std::string city_id;
  int year = 0;
  std::array<std::vector<double>, kDaysPerWeek> days;  // index 0 = Monday

  const std::vector<double>& day(int dow) const { return days.at(dow - 1); }
  /// Monday..Sunday concatenated (7 * segments_per_day values).
  std::vector<double> concatenated() const;
  void validate(int segments_per_day) const;
};

struct ActivityOutcome {
  Activity activity = Activity::sleep;
  double start_min = 0;  // 0->1 transition into the activity
  double stop_min = 0;   // 1->0 transition out of it
  int respondents = 1;
  std::int64_t population = 1;

  void validate() const;
};

struct CityYearRecord {
  std::string city_id;
  int year = 0;
  SyntheticWeek week;
  std::vector<std::pair<std::string, double>> static_features;
  std::vector<ActivityOutcome> outcomes;

  const ActivityOutcome* outcome(Activity a) const;
  std::optional<double> static_feature(std::string_view name) const;
  void set_static(std::string name, double value);
  /// Population from the first outcome; 0 when no outcome is attached.
  std::int64_t population() const;
};

/// Per-segment online/offline counts, grouped per city in ascending
/// city_id and segment order. Empty segments are not emitted.
std::vector<ScanAggregate> aggregate_scans(std::span<const ScanRecord> records,
                                           const SegmentGrid& grid);

/// Fraction online per segment for each city; empty segments are missing.
/// The input must cover a single calendar day per city.
std::vector<DailyTrace> aggregate_online_fraction(std::span<const ScanRecord> records,
                                                  const SegmentGrid& grid);

/// Affine map of the present values onto [0, 1]. Constant traces map to 0.5.
DailyTrace normalize_unit_interval(DailyTrace trace);
std::vector<double> normalize_unit_interval(std::span<const double> values);

struct WeekOptions {
  double penalty = 500.0;
  bool robust = true;
};

/// Segment-wise mean per day of week (missing values excluded), then each
/// day is smoothed. Inputs are already normalised daily traces.
SyntheticWeek build_synthetic_week(std::span<const DailyTrace> days, int segments_per_day,
                                   const WeekOptions& opts = {});

/// Hourly series (24 values) to segment midpoints: light smoothing, then a
/// natural cubic spline through the hour midpoints.
std::vector<double> downscale_hourly(std::span<const double> hourly, const SegmentGrid& grid,
                                     double penalty = 1.0);
/// Same, with the neighbouring days' 24 hours (either may be empty) as
/// extra smoothing and spline context so the day's edges are interpolated
/// rather than extrapolated.
std::vector<double> downscale_hourly(std::span<const double> hourly, const SegmentGrid& grid,
                                     double penalty, std::span<const double> before,
                                     std::span<const double> after);

/// Mean per segment per day of week of down-scaled demand, then
/// normalisation of each day-of-week average to [0, 1].
SyntheticWeek register_dow_average(std::span<const DailyTrace> days, int segments_per_day);

}  // namespace sfca
