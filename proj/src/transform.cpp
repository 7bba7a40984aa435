#include "sfca/transform.hpp"

#include <map>

namespace sfca {

InclusionReport check_inclusion(std::span<const CityYearRecord> records, const SegmentGrid& grid) {
  grid.validate();
  InclusionReport rep;
  for (const auto& r : records) {
    for (const auto& o : r.outcomes) {
      for (double m : {o.start_min, o.stop_min}) {
        if (!(m >= 0.0 && m < kMinutesPerDay)) {
          rep.violations.push_back(r.city_id + "/" + std::to_string(r.year) + " " +
                                   std::string(to_string(o.activity)) + " time " +
                                   std::to_string(m) + " outside [0, 1440)");
        }
      }
    }
  }
  return rep;
}

InclusionReport check_inclusion(std::span<const double> outcomes, double lo, double hi) {
  InclusionReport rep;
  for (std::size_t i = 0; i < outcomes.size(); ++i)
    if (!(outcomes[i] >= lo && outcomes[i] <= hi))
      rep.violations.push_back("outcome " + std::to_string(i) + " = " +
                               std::to_string(outcomes[i]) + " outside the predictor domain");
  return rep;
}

StackedDesign stack(std::span<const FeatureTable> tables) {
  StackedDesign d;
  if (tables.empty()) return d;
  const auto& first = tables.front();
  Eigen::Index rows = 0;
  for (const auto& t : tables) {
    if (t.segment_columns != first.segment_columns || t.static_columns != first.static_columns)
      throw Error("feature schema mismatch between " + first.city_id + " and " + t.city_id);
    if (t.block.rows() != static_cast<Eigen::Index>(t.segments.size()) ||
        t.block.cols() != static_cast<Eigen::Index>(t.segment_columns.size()) ||
        t.statics.size() != t.static_columns.size())
      throw Error("malformed feature table for " + t.city_id);
    rows += t.block.rows();
  }
  const Eigen::Index seg_cols = static_cast<Eigen::Index>(first.segment_columns.size());
  const Eigen::Index cols = seg_cols + static_cast<Eigen::Index>(first.static_columns.size());
  d.columns = first.segment_columns;
  d.columns.insert(d.columns.end(), first.static_columns.begin(), first.static_columns.end());
  d.segment_column_count = static_cast<std::size_t>(seg_cols);
  d.x.resize(rows, cols);
  d.rows.reserve(static_cast<std::size_t>(rows));
  Eigen::Index at = 0;
  for (const auto& t : tables) {
    const Eigen::Index n = t.block.rows();
    d.x.block(at, 0, n, seg_cols) = t.block;
    for (std::size_t j = 0; j < t.statics.size(); ++j)
      d.x.col(seg_cols + static_cast<Eigen::Index>(j)).segment(at, n).setConstant(t.statics[j]);
    for (int s : t.segments) d.rows.push_back({t.city_id, t.year, s});
    at += n;
  }
  return d;
}

std::vector<FeatureTable> unstack(const StackedDesign& design) {
  std::vector<FeatureTable> out;
  const Eigen::Index seg_cols = static_cast<Eigen::Index>(design.segment_column_count);
  const Eigen::Index stat_cols = design.x.cols() - seg_cols;
  const std::vector<std::string> seg_names(design.columns.begin(), design.columns.begin() + seg_cols);
  const std::vector<std::string> stat_names(design.columns.begin() + seg_cols, design.columns.end());
  std::size_t i = 0;
  while (i < design.rows.size()) {
    std::size_t j = i;
    while (j < design.rows.size() && design.rows[j].city_id == design.rows[i].city_id &&
           design.rows[j].year == design.rows[i].year)
      ++j;
    FeatureTable t;
    t.city_id = design.rows[i].city_id;
    t.year = design.rows[i].year;
    const Eigen::Index n = static_cast<Eigen::Index>(j - i);
    const Eigen::Index at = static_cast<Eigen::Index>(i);
    t.block = design.x.block(at, 0, n, seg_cols);
    for (Eigen::Index c = 0; c < stat_cols; ++c) t.statics.push_back(design.x(at, seg_cols + c));
    for (std::size_t k = i; k < j; ++k) t.segments.push_back(design.rows[k].segment);
    t.segment_columns = seg_names;
    t.static_columns = stat_names;
    out.push_back(std::move(t));
    i = j;
  }
  return out;
}

namespace {
bool class_one(const ActivityOutcome& o, double t) {
  if (o.activity == Activity::sleep) return t <= o.stop_min || t >= o.start_min;
  return t >= o.start_min && t <= o.stop_min;
}
}  // namespace

std::vector<std::uint8_t> threshold_labels(const ActivityOutcome& outcome, const SegmentGrid& grid,
                                           std::span<const int> segments) {
  if (outcome.start_min == outcome.stop_min) throw Error("zero-width activity");
  std::vector<std::uint8_t> y;
  y.reserve(segments.size());
  for (int s : segments) {
    if (s < 1 || s > grid.segments_per_day) throw Error("segment index out of range");
    y.push_back(class_one(outcome, grid.midpoint(s)) ? 1 : 0);
  }
  return y;
}

std::vector<std::uint8_t> threshold_day(const ActivityOutcome& outcome, const SegmentGrid& grid) {
  std::vector<int> all(grid.segments_per_day);
  for (int s = 1; s <= grid.segments_per_day; ++s) all[s - 1] = s;
  return threshold_labels(outcome, grid, all);
}

std::vector<std::uint8_t> threshold_below(double y, std::span<const double> times) {
  std::vector<std::uint8_t> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(t <= y ? 1 : 0);
  return out;
}

LabelVector label_design(const StackedDesign& design, std::span<const CityYearRecord> records,
                         Activity activity, const SegmentGrid& grid) {
  std::map<std::pair<std::string, int>, const ActivityOutcome*> lookup;
  for (const auto& r : records) lookup[{r.city_id, r.year}] = r.outcome(activity);
  LabelVector lv;
  lv.activity = activity;
  lv.y.reserve(design.rows.size());
  const ActivityOutcome* cur = nullptr;
  const RowKey* cur_key = nullptr;
  for (const auto& row : design.rows) {
    if (!cur_key || row.city_id != cur_key->city_id || row.year != cur_key->year) {
      auto it = lookup.find({row.city_id, row.year});
      if (it == lookup.end() || it->second == nullptr)
        throw Error("no " + std::string(to_string(activity)) + " outcome for " + row.city_id +
                    "/" + std::to_string(row.year));
      cur = it->second;
      cur_key = &row;
    }
    const int s = row.segment;
    lv.y.push_back(threshold_labels(*cur, grid, std::span<const int>(&s, 1)).front());
  }
  return lv;
}

BalanceEntry balance_of(std::span<const std::uint8_t> labels) {
  BalanceEntry e;
  if (labels.empty()) {
    e.warning = true;
    return e;
  }
  std::size_t ones = 0;
  for (auto v : labels) ones += v ? 1 : 0;
  e.fraction = static_cast<double>(ones) / static_cast<double>(labels.size());
  e.warning = e.fraction < kBalanceLow || e.fraction > kBalanceHigh;
  return e;
}

std::vector<BalanceEntry> balance_report(std::span<const RowKey> rows, const LabelVector& labels) {
  if (rows.size() != labels.y.size()) throw Error("labels and rows differ in length");
  std::vector<BalanceEntry> out;
  std::size_t i = 0;
  while (i < rows.size()) {
    std::size_t j = i;
    while (j < rows.size() && rows[j].city_id == rows[i].city_id && rows[j].year == rows[i].year) ++j;
    auto e = balance_of(std::span<const std::uint8_t>(labels.y.data() + i, j - i));
    e.city_id = rows[i].city_id;
    e.year = rows[i].year;
    out.push_back(std::move(e));
    i = j;
  }
  return out;
}

}  // namespace sfca
