#include "sfca/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "sfca/smooth.hpp"
#include "sfca/spline.hpp"

namespace sfca {

std::vector<double> SyntheticWeek::concatenated() const {
  std::vector<double> out;
  for (const auto& d : days) out.insert(out.end(), d.begin(), d.end());
  return out;
}

void SyntheticWeek::validate(int segments_per_day) const {
  for (int d = 1; d <= kDaysPerWeek; ++d) {
    const auto& v = day(d);
    if (static_cast<int>(v.size()) != segments_per_day)
      throw Error("synthetic week " + city_id + "/" + std::to_string(year) + " has " +
                  std::to_string(v.size()) + " values for " + std::string(dow_name(d)));
    for (double x : v)
      if (!std::isfinite(x))
        throw Error("synthetic week " + city_id + "/" + std::to_string(year) +
                    " has a non-finite value on " + std::string(dow_name(d)));
  }
}

void ActivityOutcome::validate() const {
  auto in_day = [](double m) { return m >= 0.0 && m < kMinutesPerDay; };
  if (!in_day(start_min) || !in_day(stop_min))
    throw Error("activity times must lie in [0, 1440)");
  if (start_min == stop_min) throw Error("zero-width activity");
  if (activity == Activity::work && !(start_min < stop_min))
    throw Error("work must start before it stops");
  if (activity == Activity::sleep && !(stop_min < start_min))
    throw Error("sleep must wrap over midnight (stop before start)");
  if (respondents < 1) throw Error("respondents must be positive");
  if (population < 1) throw Error("population must be positive");
}

const ActivityOutcome* CityYearRecord::outcome(Activity a) const {
  for (const auto& o : outcomes)
    if (o.activity == a) return &o;
  return nullptr;
}

std::optional<double> CityYearRecord::static_feature(std::string_view name) const {
  for (const auto& [k, v] : static_features)
    if (k == name) return v;
  return std::nullopt;
}

void CityYearRecord::set_static(std::string name, double value) {
  for (auto& [k, v] : static_features) {
    if (k == name) {
      v = value;
      return;
    }
  }
  static_features.emplace_back(std::move(name), value);
}

std::int64_t CityYearRecord::population() const {
  return outcomes.empty() ? 0 : outcomes.front().population;
}

std::vector<ScanAggregate> aggregate_scans(std::span<const ScanRecord> records,
                                           const SegmentGrid& grid) {
  std::map<std::pair<std::string, int>, ScanAggregate> acc;
  for (const auto& r : records) {
    const int s = grid.segment_of(r.minute);
    auto& a = acc[{r.city_id, s}];
    a.city_id = r.city_id;
    a.segment = s;
    (r.online ? a.count_online : a.count_offline) += 1;
  }
  std::vector<ScanAggregate> out;
  out.reserve(acc.size());
  for (auto& [key, a] : acc) out.push_back(std::move(a));
  return out;
}

std::vector<DailyTrace> aggregate_online_fraction(std::span<const ScanRecord> records,
                                                  const SegmentGrid& grid) {
  std::vector<DailyTrace> out;
  for (const auto& a : aggregate_scans(records, grid)) {
    if (out.empty() || out.back().city_id != a.city_id) {
      DailyTrace t;
      t.city_id = a.city_id;
      t.values.assign(grid.segments_per_day, kMissing);
      out.push_back(std::move(t));
    }
    const double total = static_cast<double>(a.count_online + a.count_offline);
    out.back().values[a.segment - 1] = static_cast<double>(a.count_online) / total;
  }
  return out;
}

std::vector<double> normalize_unit_interval(std::span<const double> values) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : values) {
    if (is_missing(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (lo > hi) throw Error("empty trace");
  std::vector<double> out(values.begin(), values.end());
  const double range = hi - lo;
  for (double& v : out) {
    if (is_missing(v)) continue;
    v = range > 0.0 ? (v - lo) / range : 0.5;
  }
  return out;
}

DailyTrace normalize_unit_interval(DailyTrace trace) {
  trace.values = normalize_unit_interval(trace.values);
  return trace;
}

namespace {

// Segment-wise mean per day of week; missing values are skipped and a
// segment with no observation stays missing.
SyntheticWeek dow_means(std::span<const DailyTrace> days, int segments_per_day) {
  if (days.empty()) throw Error("no daily traces supplied");
  SyntheticWeek week;
  week.city_id = days.front().city_id;
  week.year = days.front().year;
  std::array<std::vector<double>, kDaysPerWeek> sum, count;
  for (auto& v : sum) v.assign(segments_per_day, 0.0);
  for (auto& v : count) v.assign(segments_per_day, 0.0);
  std::array<int, kDaysPerWeek> seen{};
  for (const auto& d : days) {
    if (d.city_id != week.city_id || d.year != week.year)
      throw Error("daily traces mix city-years (" + week.city_id + "/" +
                  std::to_string(week.year) + " vs " + d.city_id + "/" + std::to_string(d.year) +
                  ")");
    if (static_cast<int>(d.values.size()) != segments_per_day)
      throw Error("daily trace for " + d.city_id + " " + d.date + " has wrong length");
    const int idx = d.dow - 1;
    if (idx < 0 || idx >= kDaysPerWeek) throw Error("day of week out of range in " + d.date);
    ++seen[idx];
    for (int s = 0; s < segments_per_day; ++s) {
      if (is_missing(d.values[s])) continue;
      sum[idx][s] += d.values[s];
      count[idx][s] += 1.0;
    }
  }
  for (int i = 0; i < kDaysPerWeek; ++i) {
    if (seen[i] == 0)
      throw Error("no traces for " + std::string(dow_name(i + 1)) + " in " + week.city_id + "/" +
                  std::to_string(week.year));
    week.days[i].resize(segments_per_day);
    for (int s = 0; s < segments_per_day; ++s)
      week.days[i][s] = count[i][s] > 0 ? sum[i][s] / count[i][s] : kMissing;
  }
  return week;
}

}  // namespace

SyntheticWeek build_synthetic_week(std::span<const DailyTrace> days, int segments_per_day,
                                   const WeekOptions& opts) {
  const SyntheticWeek means = dow_means(days, segments_per_day);
  SyntheticWeek week = means;
  // Each day is smoothed inside the cyclic week, flanked by its neighbours,
  // so midnight is interior to the fit.
  const std::size_t n = static_cast<std::size_t>(segments_per_day);
  for (int i = 0; i < kDaysPerWeek; ++i) {
    std::vector<double> context;
    context.reserve(3 * n);
    for (int k : {i + kDaysPerWeek - 1, i, i + 1}) {
      const auto& d = means.days[k % kDaysPerWeek];
      context.insert(context.end(), d.begin(), d.end());
    }
    const auto z = garcia_smooth(context, opts.penalty, opts.robust);
    week.days[i].assign(z.begin() + static_cast<std::ptrdiff_t>(n), z.begin() + static_cast<std::ptrdiff_t>(2 * n));
  }
  return week;
}

std::vector<double> downscale_hourly(std::span<const double> hourly, const SegmentGrid& grid,
                                     double penalty) {
  return downscale_hourly(hourly, grid, penalty, {}, {});
}

std::vector<double> downscale_hourly(std::span<const double> hourly, const SegmentGrid& grid,
                                     double penalty, std::span<const double> before,
                                     std::span<const double> after) {
  if (hourly.size() != 24) throw Error("hourly series must have 24 values");
  if (!before.empty() && before.size() != 24) throw Error("previous day must have 24 values");
  if (!after.empty() && after.size() != 24) throw Error("next day must have 24 values");
  std::vector<double> series(before.begin(), before.end());
  series.insert(series.end(), hourly.begin(), hourly.end());
  series.insert(series.end(), after.begin(), after.end());
  for (double v : series)
    if (!std::isfinite(v)) throw Error("hourly series contains a non-finite value");
  const auto smoothed = garcia_smooth(series, penalty, false);
  const double first = before.empty() ? 30.0 : 30.0 - kMinutesPerDay;
  std::vector<double> knots(series.size());
  for (std::size_t h = 0; h < knots.size(); ++h) knots[h] = first + 60.0 * static_cast<double>(h);
  const CubicSpline spline(std::move(knots), smoothed);
  std::vector<double> out(grid.segments_per_day);
  for (int s = 1; s <= grid.segments_per_day; ++s) out[s - 1] = spline(grid.midpoint(s));
  return out;
}

SyntheticWeek register_dow_average(std::span<const DailyTrace> days, int segments_per_day) {
  SyntheticWeek week = dow_means(days, segments_per_day);
  for (int i = 0; i < kDaysPerWeek; ++i) {
    for (double v : week.days[i])
      if (is_missing(v))
        throw Error("segment never observed on " + std::string(dow_name(i + 1)) + " in " +
                    week.city_id + "/" + std::to_string(week.year));
    week.days[i] = normalize_unit_interval(week.days[i]);
  }
  return week;
}

}  // namespace sfca
