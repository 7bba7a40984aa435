#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sfca/features.hpp"
#include "sfca/grid.hpp"
#include "sfca/trajectory.hpp"

namespace sfca {

struct RowKey {
  std::string city_id;
  int year = 0;
  int segment = 0;
  bool operator==(const RowKey&) const = default;
};

/// Tall design: one row per (record, usable segment), per-segment columns
/// followed by the broadcast statics.
struct StackedDesign {
  std::vector<RowKey> rows;
  Eigen::MatrixXd x;
  std::vector<std::string> columns;
  std::size_t segment_column_count = 0;
};

struct LabelVector {
  Activity activity = Activity::sleep;
  std::vector<std::uint8_t> y;
};

struct InclusionReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Every outcome time must lie in the day covered by the grid.
InclusionReport check_inclusion(std::span<const CityYearRecord> records, const SegmentGrid& grid);
/// Generic form: every value in `outcomes` lies within [lo, hi].
InclusionReport check_inclusion(std::span<const double> outcomes, double lo, double hi);

/// Wide-to-tall: concatenates the per-record blocks and broadcasts each
/// record's statics over its rows. All tables must share column names.
StackedDesign stack(std::span<const FeatureTable> tables);

/// Inverse of `stack`.
std::vector<FeatureTable> unstack(const StackedDesign& design);

/// Class-1 labels for every segment 1..S (midpoint convention, inclusive
/// comparisons). Sleep: t <= stop or t >= start. Work: start <= t <= stop.
std::vector<std::uint8_t> threshold_day(const ActivityOutcome& outcome, const SegmentGrid& grid);

/// Same rule restricted to the given segments (e.g. a FeatureTable's rows).
std::vector<std::uint8_t> threshold_labels(const ActivityOutcome& outcome, const SegmentGrid& grid,
                                           std::span<const int> segments);

/// Scalar rule: 1 where t_s <= y.
std::vector<std::uint8_t> threshold_below(double y, std::span<const double> times);

/// Labels aligned with `design` rows, taken from each record's outcome.
LabelVector label_design(const StackedDesign& design, std::span<const CityYearRecord> records,
                         Activity activity, const SegmentGrid& grid);

struct BalanceEntry {
  std::string city_id;
  int year = 0;
  double fraction = 0;
  bool warning = false;
};

inline constexpr double kBalanceLow = 0.1;
inline constexpr double kBalanceHigh = 0.9;

std::vector<BalanceEntry> balance_report(std::span<const RowKey> rows, const LabelVector& labels);
BalanceEntry balance_of(std::span<const std::uint8_t> labels);

}  // namespace sfca
