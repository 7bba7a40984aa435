#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sfca/features.hpp"
#include "sfca/trajectory.hpp"
#include "sfca/transform.hpp"

namespace sfca {
namespace csv {

/// Plain comma split; fields never contain commas or quotes.
std::vector<std::string> split_line(std::string_view line);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;  // 1-based source line of each row
};

/// Parses text with a header row. When `expected` is non-empty the header
/// must start with exactly those names.
Table parse(std::string_view text, std::span<const std::string_view> expected = {});

/// Shortest text that reads back to the same double; missing values are
/// written as an empty field.
std::string format(double v);
double to_double(std::string_view s, std::string_view what);
std::int64_t to_int(std::string_view s, std::string_view what);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace csv

/// ISO day of week (Monday = 1) of a YYYY-MM-DD date.
int day_of_week(std::string_view date);
/// Days since 1970-01-01.
long day_number(std::string_view date);

/// `city_id,year,date,dow,segment,value`; empty value = missing.
std::string write_traces(std::span<const DailyTrace> traces);
std::vector<DailyTrace> read_traces(std::string_view text, int segments_per_day);

/// `city_id,year,date,hour,megawatts` with hour 0..23; traces hold 24 values.
std::string write_hourly(std::span<const DailyTrace> days);
std::vector<DailyTrace> read_hourly(std::string_view text);

struct OutcomeRow {
  std::string city_id;
  int year = 0;
  ActivityOutcome outcome;
};

/// `city_id,year,activity,start_min,stop_min,respondents,population`.
std::string write_outcomes(std::span<const OutcomeRow> rows);
std::vector<OutcomeRow> read_outcomes(std::string_view text);

struct StaticRow {
  std::string city_id;
  double latitude = 0;
};

/// `city_id,latitude`.
std::string write_static(std::span<const StaticRow> rows);
std::vector<StaticRow> read_static(std::string_view text);

/// `city_id,year,dow,segment,value`.
std::string write_weeks(std::span<const SyntheticWeek> weeks, int segments_per_day);
std::vector<SyntheticWeek> read_weeks(std::string_view text, int segments_per_day);

/// `city_id,year,segment,<segment columns>,<static columns>`.
std::string write_features(std::span<const FeatureTable> tables);
std::vector<FeatureTable> read_features(std::string_view text, const FeatureSchema& schema);

/// `city_id,year,segment,label,<features>`.
std::string write_stacked(const StackedDesign& design, const LabelVector& labels);
std::pair<StackedDesign, LabelVector> read_stacked(std::string_view text,
                                                   std::size_t segment_column_count,
                                                   Activity activity);

/// Joins weeks, outcomes and statics into records (ordered by city, year).
std::vector<CityYearRecord> join_records(std::span<const SyntheticWeek> weeks,
                                         std::span<const OutcomeRow> outcomes,
                                         std::span<const StaticRow> statics);

}  // namespace sfca
