#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "sfca/common.hpp"
#include "sfca/trajectory.hpp"

namespace sfca {

enum class FeatureKind { level, diff1, diff2, peak_dummy, trough_dummy, wavelet_static, scalar_static };

std::string_view to_string(FeatureKind k);

struct FeatureDescriptor {
  std::string name;
  FeatureKind kind = FeatureKind::level;
  int dow = 0;  // 1..7 for per-day kinds, 0 otherwise
};

/// Ordered feature list: per-segment columns first (kind-major, Monday to
/// Sunday within a kind), then statics.
struct FeatureSchema {
  SignalSource source = SignalSource::internet;
  int segments_per_day = 96;
  std::string wavelet = "sym3";
  int wavelet_level = 7;
  bool latitude = true;
  std::vector<FeatureDescriptor> features;

  /// 35 per-segment columns; 10 weekly wavelet statics (sym3, level 7 on
  /// the 672-long week) plus latitude.
  static FeatureSchema internet(int segments_per_day = 96);
  /// 35 per-segment columns; 6 wavelet statics per day of week (sym3,
  /// level 6 on each 96-long day), latitude optional.
  static FeatureSchema electricity(bool latitude = false, int segments_per_day = 96);

  std::vector<std::string> segment_columns() const;
  std::vector<std::string> static_columns() const;
  /// Number of wavelet coefficients each compression yields.
  int wavelet_coefficients() const;
  void validate() const;
};

/// Per-record engineered features. `block` has one row per usable segment
/// (segments 3..S, the first two being lost to differencing) and one
/// column per per-segment feature; statics are broadcast at stack time.
struct FeatureTable {
  std::string city_id;
  int year = 0;
  std::vector<int> segments;
  Eigen::MatrixXd block;
  std::vector<double> statics;
  std::vector<std::string> segment_columns;
  std::vector<std::string> static_columns;

  /// Builds a table from a wide array (one row per dimension, one column
  /// per segment): each row becomes a column.
  static FeatureTable from_wide(std::string city_id, int year, const Eigen::MatrixXd& wide,
                                std::vector<std::string> names, std::vector<int> segments = {},
                                std::vector<double> statics = {},
                                std::vector<std::string> static_names = {});
};

/// d[s] = v[s] - v[s-1]; d[0] is marked missing.
std::vector<double> first_difference(std::span<const double> values);
/// Difference of the first difference; the first two entries are missing.
std::vector<double> second_difference(std::span<const double> values);

struct PeakTrough {
  std::vector<double> peak;
  std::vector<double> trough;
};

/// One-hot at the argmax and argmin (earliest segment on ties).
PeakTrough peak_trough_dummies(std::span<const double> values);

FeatureTable assemble_features(const CityYearRecord& record, const FeatureSchema& schema,
                               SignalSource source);

/// Flat regression row: the full week of levels, the per-segment
/// engineered block (row-major) and the statics.
std::vector<double> wide_row(const CityYearRecord& record, const FeatureTable& table);
std::vector<std::string> wide_columns(const FeatureTable& table, int segments_per_day);

}  // namespace sfca
