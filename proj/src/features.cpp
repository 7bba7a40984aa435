#include "sfca/features.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "sfca/wavelet.hpp"

namespace sfca {

namespace {
constexpr int kDroppedSegments = 2;
constexpr FeatureKind kSegmentKinds[] = {FeatureKind::level, FeatureKind::diff1,
                                         FeatureKind::diff2, FeatureKind::peak_dummy,
                                         FeatureKind::trough_dummy};

void add_segment_features(FeatureSchema& s) {
  for (FeatureKind k : kSegmentKinds)
    for (int d = 1; d <= kDaysPerWeek; ++d)
      s.features.push_back({std::string(to_string(k)) + "_" + std::string(dow_name(d)), k, d});
}
Eigen::Index column_of(const FeatureSchema& schema, FeatureKind kind, int dow) {
  Eigen::Index col = 0;
  for (const auto& f : schema.features) {
    if (f.kind == FeatureKind::wavelet_static || f.kind == FeatureKind::scalar_static) continue;
    if (f.kind == kind && f.dow == dow) return col;
    ++col;
  }
  throw Error("schema lacks a " + std::string(to_string(kind)) + " column");
}
}  // namespace

std::string_view to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::level: return "level";
    case FeatureKind::diff1: return "diff1";
    case FeatureKind::diff2: return "diff2";
    case FeatureKind::peak_dummy: return "peak";
    case FeatureKind::trough_dummy: return "trough";
    case FeatureKind::wavelet_static: return "wavelet";
    case FeatureKind::scalar_static: return "scalar";
  }
  return "?";
}

FeatureSchema FeatureSchema::internet(int segments_per_day) {
  FeatureSchema s;
  s.source = SignalSource::internet;
  s.segments_per_day = segments_per_day;
  s.wavelet = "sym3";
  s.wavelet_level = 7;
  s.latitude = true;
  add_segment_features(s);
  const int n = s.wavelet_coefficients();
  for (int i = 1; i <= n; ++i)
    s.features.push_back({"wavelet_" + std::to_string(i), FeatureKind::wavelet_static, 0});
  s.features.push_back({"latitude", FeatureKind::scalar_static, 0});
  return s;
}

FeatureSchema FeatureSchema::electricity(bool latitude, int segments_per_day) {
  FeatureSchema s;
  s.source = SignalSource::electricity;
  s.segments_per_day = segments_per_day;
  s.wavelet = "sym3";
  s.wavelet_level = 6;
  s.latitude = latitude;
  add_segment_features(s);
  const int n = s.wavelet_coefficients();
  for (int d = 1; d <= kDaysPerWeek; ++d)
    for (int i = 1; i <= n; ++i)
      s.features.push_back({"wavelet_" + std::string(dow_name(d)) + "_" + std::to_string(i),
                            FeatureKind::wavelet_static, d});
  if (latitude) s.features.push_back({"latitude", FeatureKind::scalar_static, 0});
  return s;
}

int FeatureSchema::wavelet_coefficients() const {
  const Wavelet w = Wavelet::named(wavelet);
  int len = source == SignalSource::internet ? kDaysPerWeek * segments_per_day : segments_per_day;
  for (int l = 0; l < wavelet_level; ++l) len = dwt_output_length(len, w.length());
  return len;
}

std::vector<std::string> FeatureSchema::segment_columns() const {
  std::vector<std::string> out;
  for (const auto& f : features)
    if (f.kind != FeatureKind::wavelet_static && f.kind != FeatureKind::scalar_static)
      out.push_back(f.name);
  return out;
}

std::vector<std::string> FeatureSchema::static_columns() const {
  std::vector<std::string> out;
  for (const auto& f : features)
    if (f.kind == FeatureKind::wavelet_static || f.kind == FeatureKind::scalar_static)
      out.push_back(f.name);
  return out;
}

void FeatureSchema::validate() const {
  std::set<std::string> names;
  for (const auto& f : features)
    if (!names.insert(f.name).second) throw Error("duplicate feature name '" + f.name + "'");
  for (FeatureKind k : kSegmentKinds) {
    for (int d = 1; d <= kDaysPerWeek; ++d) {
      const auto n = std::count_if(features.begin(), features.end(), [&](const auto& f) {
        return f.kind == k && f.dow == d;
      });
      if (n != 1)
        throw Error("schema needs exactly one " + std::string(to_string(k)) + " feature for " +
                    std::string(dow_name(d)));
    }
  }
}

FeatureTable FeatureTable::from_wide(std::string city_id, int year, const Eigen::MatrixXd& wide,
                                     std::vector<std::string> names, std::vector<int> segments,
                                     std::vector<double> statics,
                                     std::vector<std::string> static_names) {
  if (static_cast<Eigen::Index>(names.size()) != wide.rows())
    throw Error("from_wide: one name per wide row required");
  if (statics.size() != static_names.size()) throw Error("from_wide: static names mismatch");
  FeatureTable t;
  t.city_id = std::move(city_id);
  t.year = year;
  if (segments.empty()) {
    segments.resize(wide.cols());
    for (Eigen::Index s = 0; s < wide.cols(); ++s) segments[s] = static_cast<int>(s) + 1;
  }
  if (static_cast<Eigen::Index>(segments.size()) != wide.cols())
    throw Error("from_wide: one segment index per wide column required");
  t.segments = std::move(segments);
  t.block = wide.transpose();
  t.statics = std::move(statics);
  t.segment_columns = std::move(names);
  t.static_columns = std::move(static_names);
  return t;
}

std::vector<double> first_difference(std::span<const double> values) {
  if (values.size() < 2) throw Error("first_difference needs at least two values");
  std::vector<double> d(values.size());
  d[0] = kMissing;
  for (std::size_t s = 1; s < values.size(); ++s) d[s] = values[s] - values[s - 1];
  return d;
}

std::vector<double> second_difference(std::span<const double> values) {
  if (values.size() < 3) throw Error("second_difference needs at least three values");
  const auto d1 = first_difference(values);
  std::vector<double> d2(values.size());
  d2[0] = d2[1] = kMissing;
  for (std::size_t s = 2; s < values.size(); ++s) d2[s] = d1[s] - d1[s - 1];
  return d2;
}

PeakTrough peak_trough_dummies(std::span<const double> values) {
  if (values.empty()) throw Error("peak_trough_dummies of empty trace");
  std::size_t hi = 0, lo = 0;
  for (std::size_t s = 0; s < values.size(); ++s) {
    if (is_missing(values[s])) throw Error("peak_trough_dummies requires complete traces");
    if (values[s] > values[hi]) hi = s;
    if (values[s] < values[lo]) lo = s;
  }
  PeakTrough out{std::vector<double>(values.size(), 0.0), std::vector<double>(values.size(), 0.0)};
  out.peak[hi] = 1.0;
  out.trough[lo] = 1.0;
  return out;
}

FeatureTable assemble_features(const CityYearRecord& record, const FeatureSchema& schema,
                               SignalSource source) {
  if (schema.source != source)
    throw Error("feature schema is for " + std::string(to_string(schema.source)) +
                " data but the record source is " + std::string(to_string(source)));
  schema.validate();
  const int S = schema.segments_per_day;
  record.week.validate(S);
  const int usable = S - kDroppedSegments;
  if (usable < 1) throw Error("too few segments per day for differencing");

  FeatureTable t;
  t.city_id = record.city_id;
  t.year = record.year;
  t.segment_columns = schema.segment_columns();
  t.static_columns = schema.static_columns();
  t.segments.resize(usable);
  for (int r = 0; r < usable; ++r) t.segments[r] = r + 1 + kDroppedSegments;
  t.block.resize(usable, static_cast<Eigen::Index>(t.segment_columns.size()));

  for (int d = 1; d <= kDaysPerWeek; ++d) {
    const auto& v = record.week.day(d);
    const auto d1 = first_difference(v);
    const auto d2 = second_difference(v);
    const std::span<const double> kept(v.data() + kDroppedSegments, usable);
    const auto dummies = peak_trough_dummies(kept);
    for (int k = 0; k < 5; ++k) {
      const Eigen::Index col = column_of(schema, kSegmentKinds[k], d);
      for (int r = 0; r < usable; ++r) {
        const int s = r + kDroppedSegments;
        double x = 0;
        switch (kSegmentKinds[k]) {
          case FeatureKind::level: x = v[s]; break;
          case FeatureKind::diff1: x = d1[s]; break;
          case FeatureKind::diff2: x = d2[s]; break;
          case FeatureKind::peak_dummy: x = dummies.peak[r]; break;
          case FeatureKind::trough_dummy: x = dummies.trough[r]; break;
          default: break;
        }
        t.block(r, col) = x;
      }
    }
  }

  const Wavelet w = Wavelet::named(schema.wavelet);
  if (source == SignalSource::internet) {
    const auto c = wavelet_compress(record.week.concatenated(), w, schema.wavelet_level);
    t.statics.insert(t.statics.end(), c.begin(), c.end());
  } else {
    for (int d = 1; d <= kDaysPerWeek; ++d) {
      const auto c = wavelet_compress(record.week.day(d), w, schema.wavelet_level);
      t.statics.insert(t.statics.end(), c.begin(), c.end());
    }
  }
  if (schema.latitude) {
    const auto lat = record.static_feature("latitude");
    if (!lat) throw Error("record " + record.city_id + " lacks a latitude");
    t.statics.push_back(std::abs(*lat));
  }
  if (t.statics.size() != t.static_columns.size())
    throw Error("static feature count does not match the schema");
  for (Eigen::Index i = 0; i < t.block.size(); ++i)
    if (!std::isfinite(t.block.data()[i])) throw Error("non-finite feature in " + record.city_id);
  return t;
}

namespace {
// Per-segment columns other than the levels, which the wide row already
// carries as the full week.
std::vector<Eigen::Index> engineered_columns(const FeatureTable& table) {
  std::vector<Eigen::Index> cols;
  for (std::size_t c = 0; c < table.segment_columns.size(); ++c)
    if (!table.segment_columns[c].starts_with("level_")) cols.push_back(static_cast<Eigen::Index>(c));
  return cols;
}
}  // namespace

std::vector<double> wide_row(const CityYearRecord& record, const FeatureTable& table) {
  std::vector<double> row = record.week.concatenated();
  row.reserve(row.size() + table.block.size() + table.statics.size());
  const auto engineered = engineered_columns(table);
  for (Eigen::Index r = 0; r < table.block.rows(); ++r)
    for (Eigen::Index c : engineered) row.push_back(table.block(r, c));
  row.insert(row.end(), table.statics.begin(), table.statics.end());
  return row;
}

std::vector<std::string> wide_columns(const FeatureTable& table, int segments_per_day) {
  std::vector<std::string> names;
  for (int d = 1; d <= kDaysPerWeek; ++d)
    for (int s = 1; s <= segments_per_day; ++s)
      names.push_back("x_" + std::string(dow_name(d)) + "_" + std::to_string(s));
  const auto engineered = engineered_columns(table);
  for (Eigen::Index r = 0; r < table.block.rows(); ++r)
    for (Eigen::Index c : engineered)
      names.push_back(table.segment_columns[c] + "_s" + std::to_string(table.segments[r]));
  names.insert(names.end(), table.static_columns.begin(), table.static_columns.end());
  return names;
}

}  // namespace sfca
