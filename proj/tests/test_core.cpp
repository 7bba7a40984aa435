#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "sfca/csv_io.hpp"
#include "sfca/grid.hpp"
#include "sfca/parallel.hpp"
#include "sfca/smooth.hpp"
#include "sfca/spline.hpp"
#include "sfca/trajectory.hpp"
#include "sfca/wavelet.hpp"

using namespace sfca;

namespace {

std::vector<double> test_series(int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = std::sin(0.05 * i) + 0.3 * std::cos(0.17 * i) + 0.01 * i;
  return v;
}

// Reflective second-difference matrix whose DCT-II eigenvalues are -2 + 2cos(i pi / n).
Eigen::MatrixXd reflective_d2(int n) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    d(i, i) = -2.0;
    if (i > 0) d(i, i - 1) = 1.0;
    if (i + 1 < n) d(i, i + 1) = 1.0;
  }
  d(0, 0) = -1.0;
  d(n - 1, n - 1) = -1.0;
  return d;
}

}  // namespace

TEST_CASE("grid midpoints and segment lookup") {
  const SegmentGrid g;
  CHECK(g.segment_minutes() == 15.0);
  CHECK(g.midpoint(1) == 7.5);
  CHECK(g.midpoint(96) == 1432.5);
  CHECK(g.segment_of(0.0) == 1);
  CHECK(g.segment_of(14.999) == 1);
  CHECK(g.segment_of(15.0) == 2);
  CHECK(g.segment_of(1439.9) == 96);
  CHECK_THROWS_AS(SegmentGrid::make(0, 1), Error);
  CHECK_THROWS_AS(SegmentGrid::make(96, 97), Error);
  CHECK(wrap_minutes(-5.0) == 1435.0);
  CHECK(wrap_minutes(1445.0) == 5.0);
}

TEST_CASE("seed derivation is stable and stream dependent") {
  CHECK(derive_seed(42, std::uint64_t{1}) == derive_seed(42, std::uint64_t{1}));
  CHECK(derive_seed(42, std::uint64_t{1}) != derive_seed(42, std::uint64_t{2}));
  CHECK(derive_seed(42, "c001") != derive_seed(42, "c002"));
  CHECK(derive_seed(42, "c001") != derive_seed(43, "c001"));
}

TEST_CASE("orthonormal DCT matches the reference transform") {
  const auto x = test_series(10);
  const std::vector<double> want{1.4461831572194335,    -0.22972467339448882,  -0.07268660569981031,
                                 -0.03212911882999493,  -0.016210601161698413, -0.010642963524681217,
                                 -0.006160156796429561, -0.004317074578270384, -0.0023368644881602424,
                                 -0.001211776416006352};
  const auto c = dct2(x);
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(std::abs(c[i] - want[i]) < 1e-12);
  const auto back = idct2(c);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(back[i] - x[i]) < 1e-12);
}

TEST_CASE("smoother equals the dense penalised least-squares solution") {
  const int n = 20;
  const double s = 3.0;
  const auto y = test_series(n);
  const Eigen::MatrixXd d = reflective_d2(n);
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) + s * d.transpose() * d;
  const Eigen::VectorXd z = a.ldlt().solve(Eigen::Map<const Eigen::VectorXd>(y.data(), n));
  const auto got = garcia_smooth(y, s);
  for (int i = 0; i < n; ++i) CHECK(std::abs(got[i] - z[i]) < 1e-10);
}

TEST_CASE("smoother scales DCT basis vectors by their eigen-factor") {
  const int n = 96;
  for (int i : {0, 1, 5, 17, 48, 95}) {
    std::vector<double> c(n, 0.0);
    c[i] = 1.0;
    const auto basis = idct2(c);
    const double lam = -2.0 + 2.0 * std::cos(i * std::numbers::pi / n);
    const double gamma = 1.0 / (1.0 + 500.0 * lam * lam);
    const auto z = garcia_smooth(basis, 500.0);
    for (int k = 0; k < n; ++k) CHECK(std::abs(z[k] - gamma * basis[k]) < 1e-9);
  }
  CHECK(difference_eigenvalue(0, 96) == 0.0);
}

TEST_CASE("smoother is linear, keeps constants and fills gaps") {
  const auto x = test_series(40);
  std::vector<double> y(40), mix(40);
  for (int i = 0; i < 40; ++i) {
    y[i] = std::cos(0.3 * i);
    mix[i] = 2.0 * x[i] - 0.5 * y[i];
  }
  const auto sx = garcia_smooth(x, 7.0), sy = garcia_smooth(y, 7.0), sm = garcia_smooth(mix, 7.0);
  for (int i = 0; i < 40; ++i) CHECK(std::abs(sm[i] - (2.0 * sx[i] - 0.5 * sy[i])) < 1e-9);

  std::vector<double> c(30, 0.7);
  c[4] = kMissing;
  c[5] = kMissing;
  for (double v : garcia_smooth(c, 500.0)) CHECK(std::abs(v - 0.7) < 1e-10);
  for (double v : garcia_smooth(c, 500.0, true)) CHECK(std::abs(v - 0.7) < 1e-10);
}

TEST_CASE("robust smoothing resists a spike") {
  std::vector<double> y(60);
  for (int i = 0; i < 60; ++i) y[i] = std::sin(0.1 * i);
  auto spiked = y;
  spiked[30] += 5.0;
  const auto plain = garcia_smooth(spiked, 2.0, false);
  const auto robust = garcia_smooth(spiked, 2.0, true);
  const auto clean = garcia_smooth(y, 2.0, false);
  CHECK(std::abs(robust[30] - clean[30]) < 0.1 * std::abs(plain[30] - clean[30]));
}

TEST_CASE("natural cubic spline matches the reference interpolant") {
  const CubicSpline sp({0, 1, 2.5, 4, 7}, {1, 3, 2, 5, 4});
  CHECK(std::abs(sp(0.5) - 2.2818396226415096) < 1e-12);
  CHECK(std::abs(sp(1.7) - 2.58119357092942) < 1e-12);
  CHECK(std::abs(sp(3.3) - 3.329235499650593) < 1e-12);
  CHECK(std::abs(sp(6.0) - 5.348008385744235) < 1e-12);
  CHECK(std::abs(sp.derivative(3.3) - 2.4619916142557647) < 1e-12);
  CHECK(sp(2.5) == doctest::Approx(2.0));
  CHECK_THROWS_AS(CubicSpline({0, 0, 1}, {1, 2, 3}), Error);
}

TEST_CASE("wavelet coefficient counts follow the length recurrence") {
  const Wavelet sym3 = Wavelet::named("sym3");
  CHECK(sym3.length() == 6);
  CHECK(Wavelet::named("sym8").length() == 16);
  std::vector<int> lens{672};
  for (int k = 0; k < 7; ++k) lens.push_back(dwt_output_length(lens.back(), 6));
  CHECK(lens == std::vector<int>{672, 338, 171, 88, 46, 25, 15, 10});
  CHECK(wavelet_compress(test_series(672), sym3, 7).size() == 10);
  CHECK(wavelet_compress(test_series(96), sym3, 6).size() == 6);
  CHECK_THROWS_AS(wavelet_compress(test_series(96), sym3, 8), Error);
  CHECK_THROWS_AS(Wavelet::named("db4"), Error);
}

TEST_CASE("wavelet coefficients match the reference implementation") {
  const Wavelet sym3 = Wavelet::named("sym3");
  const std::vector<double> l7{4.6908487799336225, 4.224451040177081, 3.9154197813059826,
                               4.855099949637056,  12.177006820396306, 26.707013806360187,
                               41.05853888428487,  54.936187193846436, 73.94880908522387,
                               87.28988223942567};
  const auto got7 = wavelet_compress(test_series(672), sym3, 7);
  for (std::size_t i = 0; i < l7.size(); ++i) CHECK(std::abs(got7[i] - l7[i]) < 1e-9 * (1 + std::abs(l7[i])));
  const std::vector<double> l6{2.9037788534417786, 2.9266409355150986, 2.6142049019536437,
                               5.104060860490799,  4.854820272099892,  -1.3288564228478248};
  const auto got6 = wavelet_compress(test_series(96), sym3, 6);
  for (std::size_t i = 0; i < l6.size(); ++i) CHECK(std::abs(got6[i] - l6[i]) < 1e-10);

  const Wavelet sym8 = Wavelet::named("sym8");
  const auto z = test_series(24);
  const auto lvl = dwt(z, sym8);
  REQUIRE(lvl.approx.size() == 19);
  REQUIRE(lvl.detail.size() == 19);
  const double a[] = {0.7045673023719952, 0.6367672266656772, 0.49687627527389006, 0.43049749387518615,
                      0.5629269332334759};
  const double d[] = {-0.0003836505654929213, 0.0021843896247698614, -0.0048033404861280455,
                      0.013323191046814307, -0.013984212398923508};
  for (int i = 0; i < 5; ++i) {
    CHECK(std::abs(lvl.approx[i] - a[i]) < 1e-12);
    CHECK(std::abs(lvl.detail[i] - d[i]) < 1e-12);
  }
  const double rec[] = {0.3023695796863865, 0.3435578321215687, 0.4059892369104295,
                        0.44608267558332626, 0.4702454223236114, 0.4938017296650937};
  const auto den = wavelet_denoise_level1(z, sym8);
  REQUIRE(den.size() == 24);
  for (int i = 0; i < 6; ++i) CHECK(std::abs(den[i] - rec[i]) < 1e-12);

  auto full = idwt(lvl.approx, lvl.detail, sym8);
  full.resize(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) CHECK(std::abs(full[i] - z[i]) < 1e-12);
}

TEST_CASE("scan aggregation and online fraction") {
  const SegmentGrid g;
  const std::vector<ScanRecord> scans{{"a", 1.0, true}, {"a", 2.0, false}, {"a", 3.0, true},
                                      {"a", 20.0, false}, {"b", 1439.0, true}};
  const auto agg = aggregate_scans(scans, g);
  REQUIRE(agg.size() == 3);
  CHECK(agg[0].city_id == "a");
  CHECK(agg[0].segment == 1);
  CHECK(agg[0].count_online == 2);
  CHECK(agg[0].count_offline == 1);
  const auto fr = aggregate_online_fraction(scans, g);
  REQUIRE(fr.size() == 2);
  CHECK(fr[0].values[0] == doctest::Approx(2.0 / 3.0));
  CHECK(fr[0].values[1] == 0.0);
  CHECK(is_missing(fr[0].values[2]));
  CHECK(fr[1].values[95] == 1.0);
  for (const auto& t : fr)
    for (double v : t.values)
      if (!is_missing(v)) CHECK((v >= 0.0 && v <= 1.0));
}

TEST_CASE("unit-interval normalisation") {
  const std::vector<double> v{2, 4, kMissing, 6};
  const auto n = normalize_unit_interval(std::span<const double>(v));
  CHECK(n[0] == 0.0);
  CHECK(n[1] == 0.5);
  CHECK(is_missing(n[2]));
  CHECK(n[3] == 1.0);
  const auto twice = normalize_unit_interval(std::span<const double>(n));
  for (int i : {0, 1, 3}) CHECK(twice[i] == n[i]);
  std::vector<double> affine;
  for (double x : v) affine.push_back(3.0 * x - 7.0);
  const auto na = normalize_unit_interval(std::span<const double>(affine));
  for (int i : {0, 1, 3}) CHECK(na[i] == doctest::Approx(n[i]));
  const std::vector<double> flat{3, 3, 3};
  for (double x : normalize_unit_interval(std::span<const double>(flat))) CHECK(x == 0.5);
}

TEST_CASE("synthetic week averages days of week") {
  std::vector<DailyTrace> days;
  for (int d = 1; d <= 7; ++d) {
    days.push_back({"c", 2010, "", d, std::vector<double>(8, 0.0)});
    days.push_back({"c", 2010, "", d, std::vector<double>(8, 1.0)});
  }
  WeekOptions raw;
  raw.penalty = 0.0;
  raw.robust = false;
  const auto w = build_synthetic_week(days, 8, raw);
  for (int d = 1; d <= 7; ++d)
    for (double v : w.day(d)) CHECK(v == doctest::Approx(0.5));

  std::vector<DailyTrace> missing_sunday(days.begin(), days.end() - 2);
  try {
    build_synthetic_week(missing_sunday, 8);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("sun") != std::string::npos);
  }
}

TEST_CASE("hourly down-scaling") {
  const SegmentGrid g;
  const std::vector<double> flat(24, 5.0);
  for (double v : downscale_hourly(flat, g)) CHECK(v == doctest::Approx(5.0));
  std::vector<double> before(24, 5.0), after(24, 1.0);
  const auto with_context = downscale_hourly(flat, g, 1.0, before, after);
  CHECK(with_context[0] == doctest::Approx(5.0).epsilon(1e-3));
  CHECK(with_context[95] < 5.0);
  CHECK_THROWS_AS(downscale_hourly(std::vector<double>(23, 1.0), g), Error);
}

TEST_CASE("day-of-week registration normalises after averaging") {
  std::vector<DailyTrace> days;
  for (int d = 1; d <= 7; ++d) {
    days.push_back({"c", 2010, "", d, {1, 2, 3}});
    days.push_back({"c", 2010, "", d, {3, 2, 1}});
  }
  const auto w = register_dow_average(days, 3);
  for (int d = 1; d <= 7; ++d)
    for (double v : w.day(d)) CHECK(v == 0.5);
  std::vector<DailyTrace> single;
  for (int d = 1; d <= 7; ++d) single.push_back({"c", 2010, "", d, {2, 4, 6}});
  const auto ws = register_dow_average(single, 3);
  CHECK(ws.day(3) == std::vector<double>{0.0, 0.5, 1.0});
}

TEST_CASE("csv number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 1e300, 1435.0}) CHECK(csv::to_double(csv::format(v), "v") == v);
  CHECK(csv::format(kMissing).empty());
  CHECK(is_missing(csv::to_double("", "v")));
  CHECK_THROWS_AS(csv::to_double("abc", "v"), Error);
  CHECK(day_of_week("2010-03-01") == 1);
  CHECK(day_of_week("2010-03-07") == 7);
  CHECK(day_number("1970-01-02") == 1);
  CHECK_THROWS_AS(day_of_week("2010-02-30"), Error);
}

TEST_CASE("trace, hourly, outcome, static and week files round-trip") {
  std::vector<DailyTrace> traces{{"c001", 2010, "2010-03-01", 1, {0.1, kMissing, 0.3}},
                                 {"c001", 2010, "2010-03-02", 2, {0.4, 0.5, 1.0 / 3.0}}};
  const auto back = read_traces(write_traces(traces), 3);
  REQUIRE(back.size() == 2);
  CHECK(back[1].dow == 2);
  CHECK(back[1].values[2] == 1.0 / 3.0);
  CHECK(is_missing(back[0].values[1]));
  CHECK(write_traces(back) == write_traces(traces));

  std::vector<DailyTrace> hourly{{"c001", 2010, "2010-03-01", 1, std::vector<double>(24, 12.5)}};
  CHECK(write_hourly(read_hourly(write_hourly(hourly))) == write_hourly(hourly));

  std::vector<OutcomeRow> outcomes{{"c001", 2010, {Activity::sleep, 1335, 407, 13, 268437}},
                                   {"c001", 2010, {Activity::work, 540, 1020, 13, 268437}}};
  const auto ob = read_outcomes(write_outcomes(outcomes));
  REQUIRE(ob.size() == 2);
  CHECK(ob[0].outcome.stop_min == 407);
  CHECK(ob[1].outcome.activity == Activity::work);
  CHECK(write_outcomes(ob) == write_outcomes(outcomes));

  std::vector<StaticRow> st{{"c001", 31.25}};
  CHECK(write_static(read_static(write_static(st))) == write_static(st));

  SyntheticWeek w;
  w.city_id = "c001";
  w.year = 2010;
  for (int d = 0; d < 7; ++d) w.days[d] = {0.1 * d, 0.5, 1.0};
  const std::vector<SyntheticWeek> weeks{w};
  CHECK(write_weeks(read_weeks(write_weeks(weeks, 3), 3), 3) == write_weeks(weeks, 3));
}

TEST_CASE("csv readers reject malformed input") {
  CHECK_THROWS_AS(read_outcomes("city_id,year\nc,1\n"), Error);
  CHECK_THROWS_AS(read_traces("city_id,year,date,dow,segment,value\nc,2010,2010-03-01,1,99,0.5\n", 96), Error);
  CHECK_THROWS_AS(read_outcomes("city_id,year,activity,start_min,stop_min,respondents,population\n"
                                "c,2010,nap,1,2,3,4\n"),
                  Error);
}
