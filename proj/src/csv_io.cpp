#include "sfca/csv_io.hpp"

#include <charconv>
#include <chrono>
#include <fstream>
#include <map>
#include <sstream>

namespace sfca {
namespace csv {

std::vector<std::string> split_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

Table parse(std::string_view text, std::span<const std::string_view> expected) {
  Table t;
  std::size_t pos = 0;
  int line_no = 0;
  bool have_header = false;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = split_line(line);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
      if (t.header.size() < expected.size())
        throw Error("csv header has " + std::to_string(t.header.size()) + " columns, expected at least " +
                    std::to_string(expected.size()));
      for (std::size_t i = 0; i < expected.size(); ++i)
        if (t.header[i] != expected[i])
          throw Error("csv header column " + std::to_string(i + 1) + " is '" + t.header[i] +
                      "', expected '" + std::string(expected[i]) + "'");
      continue;
    }
    if (fields.size() != t.header.size())
      throw Error("csv line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                  " fields, header has " + std::to_string(t.header.size()));
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(line_no);
  }
  if (!have_header) throw Error("csv input is empty");
  return t;
}

std::string format(double v) {
  if (is_missing(v)) return "";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double to_double(std::string_view s, std::string_view what) {
  if (s.empty()) return kMissing;
  double v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw Error("invalid number '" + std::string(s) + "' for " + std::string(what));
  return v;
}

std::int64_t to_int(std::string_view s, std::string_view what) {
  std::int64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw Error("invalid integer '" + std::string(s) + "' for " + std::string(what));
  return v;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace csv

namespace {

std::chrono::sys_days parse_date(std::string_view date) {
  if (date.size() != 10 || date[4] != '-' || date[7] != '-') throw Error("date '" + std::string(date) + "' is not YYYY-MM-DD");
  using namespace std::chrono;
  const year_month_day d{year{static_cast<int>(csv::to_int(date.substr(0, 4), "year"))},
                         month{static_cast<unsigned>(csv::to_int(date.substr(5, 2), "month"))},
                         day{static_cast<unsigned>(csv::to_int(date.substr(8, 2), "day"))}};
  if (!d.ok()) throw Error("invalid date '" + std::string(date) + "'");
  return sys_days{d};
}

}  // namespace

int day_of_week(std::string_view date) {
  return static_cast<int>(std::chrono::weekday{parse_date(date)}.iso_encoding());
}

long day_number(std::string_view date) {
  return static_cast<long>(parse_date(date).time_since_epoch().count());
}

namespace {

constexpr std::string_view kTraceHeader[] = {"city_id", "year", "date", "dow", "segment", "value"};
constexpr std::string_view kHourlyHeader[] = {"city_id", "year", "date", "hour", "megawatts"};
constexpr std::string_view kOutcomeHeader[] = {"city_id", "year", "activity", "start_min",
                                               "stop_min", "respondents", "population"};
constexpr std::string_view kStaticHeader[] = {"city_id", "latitude"};
constexpr std::string_view kWeekHeader[] = {"city_id", "year", "dow", "segment", "value"};
constexpr std::string_view kFeatureHeader[] = {"city_id", "year", "segment"};
constexpr std::string_view kStackedHeader[] = {"city_id", "year", "segment", "label"};

template <std::size_t N>
std::string header_line(const std::string_view (&names)[N]) {
  std::string s;
  for (std::size_t i = 0; i < N; ++i) {
    if (i) s += ',';
    s += names[i];
  }
  return s + '\n';
}

std::string at_line(const csv::Table& t, std::size_t r) {
  return " (line " + std::to_string(t.line_numbers[r]) + ")";
}

}  // namespace

std::string write_traces(std::span<const DailyTrace> traces) {
  std::string out = header_line(kTraceHeader);
  for (const auto& t : traces)
    for (std::size_t s = 0; s < t.values.size(); ++s)
      out += t.city_id + ',' + std::to_string(t.year) + ',' + t.date + ',' + std::to_string(t.dow) + ',' +
             std::to_string(s + 1) + ',' + csv::format(t.values[s]) + '\n';
  return out;
}

std::vector<DailyTrace> read_traces(std::string_view text, int segments_per_day) {
  const auto t = csv::parse(text, kTraceHeader);
  std::vector<DailyTrace> out;
  std::map<std::tuple<std::string, int, std::string>, std::size_t> index;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const int year = static_cast<int>(csv::to_int(row[1], "year"));
    const int dow = static_cast<int>(csv::to_int(row[3], "dow"));
    const auto seg = csv::to_int(row[4], "segment");
    if (dow < 1 || dow > 7) throw Error("dow outside 1..7" + at_line(t, r));
    if (seg < 1 || seg > segments_per_day) throw Error("segment outside the grid" + at_line(t, r));
    auto key = std::make_tuple(row[0], year, row[2]);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      out.push_back({row[0], year, row[2], dow, std::vector<double>(segments_per_day, kMissing)});
    }
    auto& tr = out[it->second];
    if (tr.dow != dow) throw Error("inconsistent dow for " + row[0] + " " + row[2] + at_line(t, r));
    tr.values[static_cast<std::size_t>(seg - 1)] = csv::to_double(row[5], "value");
  }
  return out;
}

std::string write_hourly(std::span<const DailyTrace> days) {
  std::string out = header_line(kHourlyHeader);
  for (const auto& d : days) {
    if (d.values.size() != 24) throw Error("hourly trace for " + d.city_id + " needs 24 values");
    for (int h = 0; h < 24; ++h)
      out += d.city_id + ',' + std::to_string(d.year) + ',' + d.date + ',' + std::to_string(h) + ',' +
             csv::format(d.values[static_cast<std::size_t>(h)]) + '\n';
  }
  return out;
}

std::vector<DailyTrace> read_hourly(std::string_view text) {
  const auto t = csv::parse(text, kHourlyHeader);
  std::vector<DailyTrace> out;
  std::map<std::tuple<std::string, int, std::string>, std::size_t> index;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const int year = static_cast<int>(csv::to_int(row[1], "year"));
    const auto hour = csv::to_int(row[3], "hour");
    if (hour < 0 || hour > 23) throw Error("hour outside 0..23" + at_line(t, r));
    auto key = std::make_tuple(row[0], year, row[2]);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      out.push_back({row[0], year, row[2], day_of_week(row[2]), std::vector<double>(24, kMissing)});
    }
    out[it->second].values[static_cast<std::size_t>(hour)] = csv::to_double(row[4], "megawatts");
  }
  return out;
}

std::string write_outcomes(std::span<const OutcomeRow> rows) {
  std::string out = header_line(kOutcomeHeader);
  for (const auto& r : rows)
    out += r.city_id + ',' + std::to_string(r.year) + ',' + std::string(to_string(r.outcome.activity)) +
           ',' + csv::format(r.outcome.start_min) + ',' + csv::format(r.outcome.stop_min) + ',' +
           std::to_string(r.outcome.respondents) + ',' + std::to_string(r.outcome.population) + '\n';
  return out;
}

std::vector<OutcomeRow> read_outcomes(std::string_view text) {
  const auto t = csv::parse(text, kOutcomeHeader);
  std::vector<OutcomeRow> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    OutcomeRow o;
    o.city_id = row[0];
    o.year = static_cast<int>(csv::to_int(row[1], "year"));
    o.outcome.activity = parse_activity(row[2]);
    o.outcome.start_min = csv::to_double(row[3], "start_min");
    o.outcome.stop_min = csv::to_double(row[4], "stop_min");
    o.outcome.respondents = static_cast<int>(csv::to_int(row[5], "respondents"));
    o.outcome.population = csv::to_int(row[6], "population");
    try {
      o.outcome.validate();
    } catch (const Error& e) {
      throw Error(std::string(e.what()) + at_line(t, r));
    }
    out.push_back(std::move(o));
  }
  return out;
}

std::string write_static(std::span<const StaticRow> rows) {
  std::string out = header_line(kStaticHeader);
  for (const auto& r : rows) out += r.city_id + ',' + csv::format(r.latitude) + '\n';
  return out;
}

std::vector<StaticRow> read_static(std::string_view text) {
  const auto t = csv::parse(text, kStaticHeader);
  std::vector<StaticRow> out;
  for (const auto& row : t.rows) out.push_back({row[0], csv::to_double(row[1], "latitude")});
  return out;
}

std::string write_weeks(std::span<const SyntheticWeek> weeks, int segments_per_day) {
  std::string out = header_line(kWeekHeader);
  for (const auto& w : weeks) {
    w.validate(segments_per_day);
    for (int d = 1; d <= kDaysPerWeek; ++d)
      for (int s = 0; s < segments_per_day; ++s)
        out += w.city_id + ',' + std::to_string(w.year) + ',' + std::to_string(d) + ',' +
               std::to_string(s + 1) + ',' + csv::format(w.day(d)[static_cast<std::size_t>(s)]) + '\n';
  }
  return out;
}

std::vector<SyntheticWeek> read_weeks(std::string_view text, int segments_per_day) {
  const auto t = csv::parse(text, kWeekHeader);
  std::vector<SyntheticWeek> out;
  std::map<std::pair<std::string, int>, std::size_t> index;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const int year = static_cast<int>(csv::to_int(row[1], "year"));
    const auto dow = csv::to_int(row[2], "dow");
    const auto seg = csv::to_int(row[3], "segment");
    if (dow < 1 || dow > 7) throw Error("dow outside 1..7" + at_line(t, r));
    if (seg < 1 || seg > segments_per_day) throw Error("segment outside the grid" + at_line(t, r));
    auto it = index.find({row[0], year});
    if (it == index.end()) {
      it = index.emplace(std::make_pair(row[0], year), out.size()).first;
      SyntheticWeek w;
      w.city_id = row[0];
      w.year = year;
      for (auto& d : w.days) d.assign(static_cast<std::size_t>(segments_per_day), kMissing);
      out.push_back(std::move(w));
    }
    out[it->second].days[static_cast<std::size_t>(dow - 1)][static_cast<std::size_t>(seg - 1)] =
        csv::to_double(row[4], "value");
  }
  for (const auto& w : out) w.validate(segments_per_day);
  return out;
}

std::string write_features(std::span<const FeatureTable> tables) {
  std::string out = "city_id,year,segment";
  if (!tables.empty()) {
    for (const auto& c : tables.front().segment_columns) out += ',' + c;
    for (const auto& c : tables.front().static_columns) out += ',' + c;
  }
  out += '\n';
  for (const auto& t : tables) {
    for (Eigen::Index r = 0; r < t.block.rows(); ++r) {
      out += t.city_id + ',' + std::to_string(t.year) + ',' + std::to_string(t.segments[static_cast<std::size_t>(r)]);
      for (Eigen::Index c = 0; c < t.block.cols(); ++c) out += ',' + csv::format(t.block(r, c));
      for (double v : t.statics) out += ',' + csv::format(v);
      out += '\n';
    }
  }
  return out;
}

std::vector<FeatureTable> read_features(std::string_view text, const FeatureSchema& schema) {
  const auto t = csv::parse(text, kFeatureHeader);
  const auto seg_cols = schema.segment_columns();
  const auto stat_cols = schema.static_columns();
  if (t.header.size() != 3 + seg_cols.size() + stat_cols.size())
    throw Error("feature file does not match the " + std::string(to_string(schema.source)) + " schema");
  for (std::size_t j = 0; j < seg_cols.size(); ++j)
    if (t.header[3 + j] != seg_cols[j]) throw Error("feature column '" + t.header[3 + j] + "' unexpected");
  for (std::size_t j = 0; j < stat_cols.size(); ++j)
    if (t.header[3 + seg_cols.size() + j] != stat_cols[j])
      throw Error("feature column '" + t.header[3 + seg_cols.size() + j] + "' unexpected");
  std::vector<FeatureTable> out;
  std::size_t r = 0;
  while (r < t.rows.size()) {
    std::size_t e = r;
    while (e < t.rows.size() && t.rows[e][0] == t.rows[r][0] && t.rows[e][1] == t.rows[r][1]) ++e;
    FeatureTable ft;
    ft.city_id = t.rows[r][0];
    ft.year = static_cast<int>(csv::to_int(t.rows[r][1], "year"));
    ft.segment_columns = seg_cols;
    ft.static_columns = stat_cols;
    ft.block.resize(static_cast<Eigen::Index>(e - r), static_cast<Eigen::Index>(seg_cols.size()));
    for (std::size_t k = r; k < e; ++k) {
      ft.segments.push_back(static_cast<int>(csv::to_int(t.rows[k][2], "segment")));
      for (std::size_t j = 0; j < seg_cols.size(); ++j)
        ft.block(static_cast<Eigen::Index>(k - r), static_cast<Eigen::Index>(j)) =
            csv::to_double(t.rows[k][3 + j], seg_cols[j]);
    }
    for (std::size_t j = 0; j < stat_cols.size(); ++j)
      ft.statics.push_back(csv::to_double(t.rows[r][3 + seg_cols.size() + j], stat_cols[j]));
    out.push_back(std::move(ft));
    r = e;
  }
  return out;
}

std::string write_stacked(const StackedDesign& design, const LabelVector& labels) {
  if (labels.y.size() != design.rows.size()) throw Error("labels and design rows differ");
  std::string out = header_line(kStackedHeader);
  out.pop_back();
  for (const auto& c : design.columns) out += ',' + c;
  out += '\n';
  for (std::size_t i = 0; i < design.rows.size(); ++i) {
    const auto& k = design.rows[i];
    out += k.city_id + ',' + std::to_string(k.year) + ',' + std::to_string(k.segment) + ',' +
           std::to_string(labels.y[i]);
    for (Eigen::Index c = 0; c < design.x.cols(); ++c)
      out += ',' + csv::format(design.x(static_cast<Eigen::Index>(i), c));
    out += '\n';
  }
  return out;
}

std::pair<StackedDesign, LabelVector> read_stacked(std::string_view text,
                                                   std::size_t segment_column_count,
                                                   Activity activity) {
  const auto t = csv::parse(text, kStackedHeader);
  StackedDesign d;
  LabelVector lv;
  lv.activity = activity;
  d.columns.assign(t.header.begin() + 4, t.header.end());
  if (segment_column_count > d.columns.size()) throw Error("stacked design has too few columns");
  d.segment_column_count = segment_column_count;
  d.x.resize(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(d.columns.size()));
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    d.rows.push_back({row[0], static_cast<int>(csv::to_int(row[1], "year")),
                      static_cast<int>(csv::to_int(row[2], "segment"))});
    const auto label = csv::to_int(row[3], "label");
    if (label != 0 && label != 1) throw Error("label must be 0 or 1" + at_line(t, r));
    lv.y.push_back(static_cast<std::uint8_t>(label));
    for (std::size_t c = 0; c < d.columns.size(); ++c)
      d.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = csv::to_double(row[4 + c], d.columns[c]);
  }
  return {std::move(d), std::move(lv)};
}

std::vector<CityYearRecord> join_records(std::span<const SyntheticWeek> weeks,
                                         std::span<const OutcomeRow> outcomes,
                                         std::span<const StaticRow> statics) {
  std::map<std::string, double> lat;
  for (const auto& s : statics) lat[s.city_id] = s.latitude;
  std::map<std::pair<std::string, int>, std::vector<ActivityOutcome>> outs;
  for (const auto& o : outcomes) outs[{o.city_id, o.year}].push_back(o.outcome);
  std::map<std::pair<std::string, int>, CityYearRecord> joined;
  for (const auto& w : weeks) {
    CityYearRecord r;
    r.city_id = w.city_id;
    r.year = w.year;
    r.week = w;
    auto it = outs.find({w.city_id, w.year});
    if (it == outs.end()) throw Error("no outcomes for " + w.city_id + "/" + std::to_string(w.year));
    r.outcomes = it->second;
    auto l = lat.find(w.city_id);
    if (l != lat.end()) r.set_static("latitude", l->second);
    joined[{w.city_id, w.year}] = std::move(r);
  }
  std::vector<CityYearRecord> out;
  for (auto& [k, v] : joined) out.push_back(std::move(v));
  return out;
}

}  // namespace sfca
