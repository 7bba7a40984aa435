#include <doctest.h>

#include <cmath>

#include "sfca/features.hpp"
#include "sfca/transform.hpp"
#include "sfca/wavelet.hpp"

using namespace sfca;

namespace {

CityYearRecord smooth_record(const std::string& id, double phase) {
  CityYearRecord r;
  r.city_id = id;
  r.year = 2010;
  r.week.city_id = id;
  r.week.year = 2010;
  for (int d = 0; d < 7; ++d) {
    r.week.days[d].resize(96);
    for (int s = 0; s < 96; ++s)
      r.week.days[d][s] = 0.5 + 0.4 * std::sin(2 * 3.14159265358979 * (s + phase + 3 * d) / 96.0);
  }
  r.set_static("latitude", -33.5);
  return r;
}

// Two records over times 7..14.
std::vector<FeatureTable> table_one() {
  const std::vector<int> times{7, 8, 9, 10, 11, 12, 13, 14};
  Eigen::MatrixXd a(2, 8), b(2, 8);
  a << 1, 0, 1, 3, 5, 3, 2, 1, 1, 3, 7, 5, 2, 1, 0, 1;
  b << -3, -4, -2, -1, 0, 1, 3, 4, 12, 13, 14, 15, 16, 16, 16, 16;
  return {FeatureTable::from_wide("1", 0, a, {"x1", "x2"}, times),
          FeatureTable::from_wide("2", 0, b, {"x1", "x2"}, times)};
}

}  // namespace

TEST_CASE("differences and extrema dummies") {
  const std::vector<double> v{1, 4, 9, 16};
  const auto d1 = first_difference(v);
  const auto d2 = second_difference(v);
  CHECK(is_missing(d1[0]));
  CHECK(d1[3] == 7.0);
  CHECK(is_missing(d2[0]));
  CHECK(is_missing(d2[1]));
  CHECK(d2[2] == 2.0);
  CHECK(d2[3] == 2.0);
  const std::vector<double> w{3, 5, 5, 1, 1, 2};
  const auto pt = peak_trough_dummies(w);
  CHECK(pt.peak == std::vector<double>{0, 1, 0, 0, 0, 0});
  CHECK(pt.trough == std::vector<double>{0, 0, 0, 1, 0, 0});
}

TEST_CASE("feature schemas have the documented widths") {
  const auto in = FeatureSchema::internet();
  CHECK(in.segment_columns().size() == 35);
  CHECK(in.static_columns().size() == 11);
  CHECK(in.wavelet_coefficients() == 10);
  const auto el = FeatureSchema::electricity();
  CHECK(el.segment_columns().size() == 35);
  CHECK(el.static_columns().size() == 42);
  CHECK(el.wavelet_coefficients() == 6);
  CHECK(FeatureSchema::electricity(true).static_columns().size() == 43);
}

TEST_CASE("assembled features line up with the week") {
  const auto rec = smooth_record("c001", 0.0);
  const auto schema = FeatureSchema::internet();
  const auto t = assemble_features(rec, schema, SignalSource::internet);
  CHECK(t.block.rows() == 94);
  CHECK(t.block.cols() == 35);
  CHECK(t.segments.front() == 3);
  CHECK(t.segments.back() == 96);
  CHECK(t.statics.size() == 11);
  CHECK(t.statics.back() == 33.5);

  const auto cols = schema.segment_columns();
  const auto col = [&](const std::string& name) {
    for (std::size_t i = 0; i < cols.size(); ++i)
      if (cols[i] == name) return static_cast<Eigen::Index>(i);
    FAIL("missing column " << name);
    return Eigen::Index{-1};
  };
  const auto& tue = rec.week.day(2);
  const Eigen::Index lv = col("level_tue");
  const Eigen::Index d1 = col("diff1_tue");
  const Eigen::Index d2 = col("diff2_tue");
  for (int r = 0; r < 94; ++r) {
    const int s = r + 2;
    CHECK(t.block(r, lv) == tue[s]);
    CHECK(t.block(r, d1) == doctest::Approx(tue[s] - tue[s - 1]));
    CHECK(t.block(r, d2) == doctest::Approx(tue[s] - 2 * tue[s - 1] + tue[s - 2]));
  }
  double peaks = 0;
  for (int r = 0; r < 94; ++r) peaks += t.block(r, col("peak_tue"));
  CHECK(peaks == 1.0);

  const auto c = wavelet_compress(rec.week.concatenated(), Wavelet::named("sym3"), 7);
  for (int i = 0; i < 10; ++i) CHECK(t.statics[i] == c[i]);

  CHECK_THROWS_AS(assemble_features(rec, schema, SignalSource::electricity), Error);
  auto bad = rec;
  bad.week.days[3][50] = kMissing;
  CHECK_THROWS_AS(assemble_features(bad, schema, SignalSource::internet), Error);
}

TEST_CASE("wide regression rows") {
  const auto rec = smooth_record("c001", 2.0);
  const auto t = assemble_features(rec, FeatureSchema::internet(), SignalSource::internet);
  const auto row = wide_row(rec, t);
  CHECK(row.size() == 672 + 94 * 28 + 11);
  CHECK(wide_columns(t, 96).size() == row.size());
  CHECK(row[96 + 4] == rec.week.day(2)[4]);
}

TEST_CASE("stacking the worked example gives the 16x2 design") {
  const auto tables = table_one();
  const auto d = stack(tables);
  REQUIRE(d.x.rows() == 16);
  REQUIRE(d.x.cols() == 2);
  Eigen::MatrixXd want(16, 2);
  want << 1, 1, 0, 3, 1, 7, 3, 5, 5, 2, 3, 1, 2, 0, 1, 1, -3, 12, -4, 13, -2, 14, -1, 15, 0, 16, 1, 16, 3, 16,
      4, 16;
  CHECK(d.x == want);
  CHECK(d.rows[0].city_id == "1");
  CHECK(d.rows[0].segment == 7);
  CHECK(d.rows[15].city_id == "2");
  CHECK(d.rows[15].segment == 14);

  const auto back = unstack(d);
  REQUIRE(back.size() == 2);
  for (int i = 0; i < 2; ++i) {
    CHECK(back[i].block == tables[i].block);
    CHECK(back[i].segments == tables[i].segments);
    CHECK(back[i].segment_columns == tables[i].segment_columns);
  }

  const std::vector<double> times{7, 8, 9, 10, 11, 12, 13, 14};
  CHECK(threshold_below(9, times) == std::vector<std::uint8_t>{1, 1, 1, 0, 0, 0, 0, 0});
  CHECK(threshold_below(13, times) == std::vector<std::uint8_t>{1, 1, 1, 1, 1, 1, 1, 0});
}

TEST_CASE("stack broadcasts statics and rejects mismatched columns") {
  const std::vector<int> segs{1, 2};
  Eigen::MatrixXd w(1, 2);
  w << 1, 2;
  const std::vector<FeatureTable> ok{FeatureTable::from_wide("a", 1, w, {"x"}, segs, {5.0}, {"lat"}),
                                     FeatureTable::from_wide("b", 1, w, {"x"}, segs, {6.0}, {"lat"})};
  const auto d = stack(ok);
  CHECK(d.segment_column_count == 1);
  CHECK(d.x(0, 1) == 5.0);
  CHECK(d.x(3, 1) == 6.0);
  const auto back = unstack(d);
  CHECK(back[1].statics == std::vector<double>{6.0});
  const std::vector<FeatureTable> bad{FeatureTable::from_wide("a", 1, w, {"x"}, segs),
                                      FeatureTable::from_wide("b", 1, w, {"z"}, segs)};
  CHECK_THROWS_AS(stack(bad), Error);
}

TEST_CASE("activity labels follow the midpoint rule") {
  const SegmentGrid g;
  const ActivityOutcome sleep{Activity::sleep, 22 * 60 + 15, 6 * 60 + 47, 10, 1000};
  const auto lab = threshold_day(sleep, g);
  REQUIRE(lab.size() == 96);
  for (int s = 1; s <= 96; ++s) {
    const bool want = s <= 27 || s >= 90;
    CHECK(lab[s - 1] == (want ? 1 : 0));
  }
  CHECK(balance_of(lab).fraction == doctest::Approx(34.0 / 96.0));

  // Brute force over many windows.
  for (double start = 1200; start < 1440; start += 37.3)
    for (double stop = 200; stop < 600; stop += 41.9) {
      const auto l = threshold_day({Activity::sleep, start, stop, 1, 1}, g);
      for (int s = 1; s <= 96; ++s) {
        const double t = g.midpoint(s);
        CHECK(l[s - 1] == ((t <= stop || t >= start) ? 1 : 0));
      }
    }
  for (double start = 400; start < 700; start += 33.1)
    for (double stop = 900; stop < 1200; stop += 47.7) {
      const auto l = threshold_day({Activity::work, start, stop, 1, 1}, g);
      for (int s = 1; s <= 96; ++s) {
        const double t = g.midpoint(s);
        CHECK(l[s - 1] == ((t >= start && t <= stop) ? 1 : 0));
      }
    }

  const ActivityOutcome work{Activity::work, 540, 1020, 1, 1};
  const std::vector<int> segs{36, 37, 68, 69};
  CHECK(threshold_labels(work, g, segs) == std::vector<std::uint8_t>{0, 1, 1, 0});
}

TEST_CASE("balance and inclusion checks") {
  const std::vector<std::uint8_t> skewed(20, 1);
  CHECK(balance_of(skewed).warning);
  std::vector<std::uint8_t> even(20, 0);
  for (int i = 0; i < 10; ++i) even[i] = 1;
  CHECK_FALSE(balance_of(even).warning);

  const std::vector<double> inside{0, 5, 10}, outside{-1, 5, 11};
  CHECK(check_inclusion(inside, 0, 10).ok());
  CHECK(check_inclusion(outside, 0, 10).violations.size() == 2);

  auto rec = smooth_record("c001", 0);
  rec.outcomes.push_back({Activity::work, 540, 1020, 1, 1});
  CHECK(check_inclusion(std::span<const CityYearRecord>(&rec, 1), SegmentGrid{}).ok());
  rec.outcomes[0].stop_min = 1500;
  CHECK_FALSE(check_inclusion(std::span<const CityYearRecord>(&rec, 1), SegmentGrid{}).ok());
}

TEST_CASE("design labels are aligned with rows") {
  auto a = smooth_record("a", 0), b = smooth_record("b", 5);
  a.outcomes.push_back({Activity::sleep, 1335, 407, 1, 1});
  b.outcomes.push_back({Activity::sleep, 1380, 360, 1, 1});
  const std::vector<CityYearRecord> recs{a, b};
  const auto schema = FeatureSchema::internet();
  const std::vector<FeatureTable> tables{assemble_features(a, schema, SignalSource::internet),
                                         assemble_features(b, schema, SignalSource::internet)};
  const auto d = stack(tables);
  const auto lv = label_design(d, recs, Activity::sleep, SegmentGrid{});
  REQUIRE(lv.y.size() == 188);
  const SegmentGrid g;
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    const auto& o = d.rows[i].city_id == "a" ? a.outcomes[0] : b.outcomes[0];
    const double t = g.midpoint(d.rows[i].segment);
    CHECK(lv.y[i] == ((t <= o.stop_min || t >= o.start_min) ? 1 : 0));
  }
  const auto rep = balance_report(d.rows, lv);
  REQUIRE(rep.size() == 2);
  CHECK(rep[0].city_id == "a");
  CHECK_THROWS_AS(label_design(d, recs, Activity::work, SegmentGrid{}), Error);
}
