#pragma once

#include <span>
#include <vector>

#include "sfca/csv_io.hpp"
#include "sfca/grid.hpp"
#include "sfca/trajectory.hpp"

namespace sfca {

struct PreprocessOptions {
  WeekOptions week;
  double hourly_penalty = 1.0;
};

/// Daily online-fraction traces to one synthetic week per city-year: each
/// day is normalised to [0, 1], then averaged per day of week and smoothed.
std::vector<SyntheticWeek> preprocess_internet(std::span<const DailyTrace> traces,
                                               const SegmentGrid& grid,
                                               const PreprocessOptions& opts = {});

/// Hourly demand to one registered week per city-year: each day is
/// smoothed and down-scaled to the grid, averaged per day of week and the
/// averages normalised to [0, 1].
std::vector<SyntheticWeek> preprocess_electricity(std::span<const DailyTrace> hourly,
                                                  const SegmentGrid& grid,
                                                  const PreprocessOptions& opts = {});

}  // namespace sfca
