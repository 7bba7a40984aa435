#include "sfca/pipeline.hpp"

#include <map>

namespace sfca {
namespace {

using Groups = std::map<std::pair<std::string, int>, std::vector<DailyTrace>>;

Groups group_city_year(std::span<const DailyTrace> traces) {
  Groups g;
  for (const auto& t : traces) g[{t.city_id, t.year}].push_back(t);
  return g;
}

template <class Fn>
std::vector<SyntheticWeek> per_group(const Groups& groups, Fn&& build) {
  std::vector<const std::vector<DailyTrace>*> items;
  for (const auto& [k, v] : groups) items.push_back(&v);
  std::vector<SyntheticWeek> out(items.size());
  std::vector<std::string> errors(items.size());
  const int n = static_cast<int>(items.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      out[i] = build(*items[i]);
    } catch (const std::exception& e) {
      errors[i] = items[i]->front().city_id + "/" + std::to_string(items[i]->front().year) + ": " + e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw Error(e);
  return out;
}

}  // namespace

std::vector<SyntheticWeek> preprocess_internet(std::span<const DailyTrace> traces,
                                               const SegmentGrid& grid,
                                               const PreprocessOptions& opts) {
  grid.validate();
  return per_group(group_city_year(traces), [&](const std::vector<DailyTrace>& days) {
    std::vector<DailyTrace> normalized;
    normalized.reserve(days.size());
    for (const auto& d : days) {
      if (static_cast<int>(d.values.size()) != grid.segments_per_day)
        throw Error("trace length differs from the grid");
      normalized.push_back(normalize_unit_interval(d));
    }
    return build_synthetic_week(normalized, grid.segments_per_day, opts.week);
  });
}

std::vector<SyntheticWeek> preprocess_electricity(std::span<const DailyTrace> hourly,
                                                  const SegmentGrid& grid,
                                                  const PreprocessOptions& opts) {
  grid.validate();
  return per_group(group_city_year(hourly), [&](const std::vector<DailyTrace>& days) {
    std::map<long, const DailyTrace*> by_day;
    for (const auto& d : days) {
      if (d.values.size() != 24) throw Error("hourly day " + d.date + " must have 24 values");
      by_day[day_number(d.date)] = &d;
    }
    auto complete = [&](long day) -> std::span<const double> {
      const auto it = by_day.find(day);
      if (it == by_day.end()) return {};
      for (double v : it->second->values)
        if (!std::isfinite(v)) return {};
      return it->second->values;
    };
    std::vector<DailyTrace> scaled;
    scaled.reserve(days.size());
    for (const auto& [day, d] : by_day) {
      DailyTrace t = *d;
      t.values = downscale_hourly(d->values, grid, opts.hourly_penalty, complete(day - 1), complete(day + 1));
      scaled.push_back(std::move(t));
    }
    return register_dow_average(scaled, grid.segments_per_day);
  });
}

}  // namespace sfca
