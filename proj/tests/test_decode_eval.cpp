#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "sfca/csv_io.hpp"
#include "sfca/decode.hpp"
#include "sfca/eval.hpp"
#include "sfca/pipeline.hpp"
#include "sfca/report.hpp"
#include "sfca/synth.hpp"
#include "sfca/transform.hpp"

using namespace sfca;

namespace {

ScoreTrace ideal(Activity a, double start, double stop) {
  const SegmentGrid g;
  const auto lab = threshold_day({a, start, stop, 1, 1}, g);
  ScoreTrace t{"c", 2010, a, std::vector<double>(lab.begin(), lab.end())};
  return t;
}

double circ(double a, double b) {
  const double d = std::abs(a - b);
  return std::min(d, 1440.0 - d);
}

struct Corpus {
  std::vector<CityYearRecord> records;
  std::vector<FeatureTable> tables;
};

Corpus small_corpus(int cities, double noise) {
  SynthOptions o;
  o.cities = cities;
  o.years = 1;
  o.days = 7;
  o.noise = noise;
  const auto c = generate_corpus(o);
  const auto weeks = preprocess_internet(c.traces, o.grid);
  Corpus out;
  out.records = join_records(weeks, c.outcomes, c.statics);
  const auto schema = FeatureSchema::internet();
  for (const auto& r : out.records) out.tables.push_back(assemble_features(r, schema, SignalSource::internet));
  return out;
}

}  // namespace

TEST_CASE("an ideal sleep step decodes to the true boundaries") {
  for (auto [start, stop] : {std::pair{1335.0, 407.0}, {1380.0, 360.0}, {1290.0, 450.0}, {1410.0, 330.0}}) {
    auto t = ideal(Activity::sleep, start, stop);
    const auto d = decode_times(t, SegmentGrid{}, Activity::sleep);
    CHECK(circ(d.start_min, start) <= 7.5);
    CHECK(circ(d.stop_min, stop) <= 7.5);
    CHECK(d.duration_min == doctest::Approx(duration(d, Activity::sleep)));
    t.scores[0] = kMissing;
    t.scores[1] = kMissing;
    const auto m = decode_times(t, SegmentGrid{}, Activity::sleep);
    CHECK(circ(m.start_min, start) <= 7.5);
    CHECK(circ(m.stop_min, stop) <= 7.5);
  }
}

TEST_CASE("an ideal work step decodes to the true boundaries") {
  for (auto [start, stop] : {std::pair{540.0, 1020.0}, {480.0, 1050.0}, {555.0, 990.0}}) {
    const auto d = decode_times(ideal(Activity::work, start, stop), SegmentGrid{}, Activity::work);
    CHECK(std::abs(d.start_min - start) <= 7.5);
    CHECK(std::abs(d.stop_min - stop) <= 7.5);
  }
}

TEST_CASE("decode rejects flat, sparse and out-of-range scores") {
  ScoreTrace flat{"c", 2010, Activity::sleep, std::vector<double>(96, 0.4)};
  try {
    decode_times(flat, SegmentGrid{}, Activity::sleep);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("no transition found") != std::string::npos);
  }
  auto sparse = ideal(Activity::sleep, 1335, 407);
  for (int i = 0; i < 10; ++i) sparse.scores[40 + i] = kMissing;
  CHECK_THROWS_AS(decode_times(sparse, SegmentGrid{}, Activity::sleep), Error);
  auto bad = ideal(Activity::sleep, 1335, 407);
  bad.scores[5] = 1.5;
  CHECK_THROWS_AS(decode_times(bad, SegmentGrid{}, Activity::sleep), Error);
  bad.scores.resize(95);
  CHECK_THROWS_AS(decode_times(bad, SegmentGrid{}, Activity::sleep), Error);
}

TEST_CASE("decode audit lists every stage") {
  DecodeAudit audit;
  decode_times(ideal(Activity::sleep, 1335, 407), SegmentGrid{}, Activity::sleep, {}, &audit);
  std::set<std::string> stages;
  for (const auto& r : audit.rows) stages.insert(r.stage);
  CHECK(stages == std::set<std::string>{"raw", "smoothed", "difference", "denoised", "extrema"});
  const auto csv = audit_csv(audit);
  CHECK(csv.find("extrema") != std::string::npos);
}

TEST_CASE("durations") {
  CHECK(duration(1335, 407, Activity::sleep) == 512);
  CHECK(duration(540, 1020, Activity::work) == 480);
  CHECK(duration(10, 400, Activity::sleep) == 390);
}

TEST_CASE("error metrics") {
  const std::vector<double> p{1, 2, 3}, o{1, 2, 6};
  CHECK(rmse(p, o, false) == doctest::Approx(std::sqrt(3.0)));
  const std::vector<double> a{1438}, b{2};
  CHECK(rmse(a, b, true) == doctest::Approx(4.0));
  CHECK(rmse(a, b, false) == doctest::Approx(1436.0));
  const std::vector<double> g{4, 16};
  CHECK(geometric_mean(g) == doctest::Approx(8.0));
  const std::vector<double> zero{0, 4};
  CHECK_THROWS_AS(geometric_mean(zero), Error);
  CHECK_THROWS_AS(rmse(p, b, false), Error);
}

TEST_CASE("population filter is strict") {
  std::vector<CityYearRecord> recs(3);
  const std::int64_t pops[] = {250000, 250001, 5000000};
  for (int i = 0; i < 3; ++i) {
    recs[i].city_id = "c" + std::to_string(i);
    recs[i].outcomes.push_back({Activity::work, 540, 1020, 1, pops[i]});
  }
  CHECK(population_filter(recs, 250000).size() == 2);
  CHECK_THROWS_AS(population_filter(recs, 5000000), Error);
  CHECK(population_filter(recs, 0).size() == 3);
}

TEST_CASE("problem keys round-trip") {
  const auto all = all_problems();
  CHECK(all.size() == 12);
  for (const auto& p : all) CHECK(ProblemSpec::parse(p.key()) == p);
  CHECK_THROWS_AS(ProblemSpec::parse("internet:nap:start"), Error);
}

TEST_CASE("loocv holds out whole cities and never leaks") {
  const auto c = small_corpus(5, 0.03);
  LoocvOptions opts;
  auto spec = ModelSpec::defaults(Family::c_tree_bag);
  spec.n_trees = 10;
  const auto res = loocv(c.records, c.tables, spec, Activity::sleep, opts);
  CHECK(res.folds.size() == 5);
  CHECK(res.records.size() == 5);
  for (const auto& f : res.folds) {
    CHECK(f.leaked_rows == 0);
    CHECK(f.training_rows == 4u * 94u);
  }
  const auto again = loocv(c.records, c.tables, spec, Activity::sleep, opts);
  for (std::size_t i = 0; i < res.records.size(); ++i)
    for (int k = 0; k < 3; ++k) CHECK(res.records[i].predicted[k] == again.records[i].predicted[k]);

  CHECK_THROWS_AS(loocv(std::span(c.records).first(2), std::span(c.tables).first(2), spec, Activity::sleep, opts),
                  Error);
}

TEST_CASE("loocv on identical cities reproduces the outcome") {
  const auto c = small_corpus(3, 0.0);
  std::vector<CityYearRecord> recs;
  std::vector<FeatureTable> tabs;
  for (int i = 0; i < 4; ++i) {
    auto r = c.records[0];
    auto t = c.tables[0];
    r.city_id = t.city_id = "same" + std::to_string(i);
    recs.push_back(r);
    tabs.push_back(t);
  }
  LoocvOptions opts;
  const auto ols = loocv(recs, tabs, ModelSpec::defaults(Family::ols), Activity::work, opts);
  for (const auto& r : ols.records)
    for (int k = 0; k < 3; ++k) CHECK(r.predicted[k] == doctest::Approx(r.observed[k]).epsilon(1e-6));
  auto spec = ModelSpec::defaults(Family::c_tree_bag);
  spec.n_trees = 5;
  const auto tree = loocv(recs, tabs, spec, Activity::work, opts);
  // Out-of-bag boundary rows soften the vote, so allow one segment.
  for (const auto& r : tree.records) {
    CHECK(r.error.empty());
    CHECK(std::abs(r.predicted[0] - r.observed[0]) <= 15.0);
    CHECK(std::abs(r.predicted[1] - r.observed[1]) <= 15.0);
  }
}

TEST_CASE("resubstitution uses a single in-sample fold") {
  const auto c = small_corpus(3, 0.0);
  auto spec = ModelSpec::defaults(Family::c_tree_bag);
  spec.n_trees = 5;
  const auto res = resubstitute(c.records, c.tables, spec, Activity::sleep, {});
  REQUIRE(res.folds.size() == 1);
  CHECK(res.folds[0].held_out.empty());
  CHECK(res.folds[0].training_rows == 3u * 94u);
  CHECK(res.records.size() == 3);
}

TEST_CASE("annotation picks markers and report CSV round-trips") {
  EvaluationReport rep;
  rep.methods = {"ols", "c-tree(bg)", "lasso"};
  const ProblemSpec p{SignalSource::internet, Activity::sleep, Target::start};
  rep.problems = {p};
  rep.filters = {250000, 500000};
  const double v[3][2] = {{10, 20}, {5, 5}, {8, 8}};
  const char* types[] = {"REG", "SFCA-T", "pREG"};
  for (int m = 0; m < 3; ++m)
    for (int f = 0; f < 2; ++f) rep.cells.push_back({rep.methods[m], types[m], p, rep.filters[f], 10, v[m][f], 0, ""});
  annotate(rep);
  CHECK(rep.gm("ols", p)->gm == doctest::Approx(std::sqrt(200.0)));
  CHECK(rep.gm("lasso", p)->markers == "^");
  CHECK(rep.gm("c-tree(bg)", p)->markers == "*_");
  CHECK(rep.gm("ols", p)->markers.empty());

  const auto csv = report_csv(rep);
  const auto back = parse_report_csv(csv);
  CHECK(report_csv(back) == csv);
  CHECK(back.gm("c-tree(bg)", p)->markers == "*_");
  CHECK(report_table(rep).find("c-tree(bg)") != std::string::npos);

  rep.cells[1].error = "decode failed";
  annotate(rep);
  CHECK_FALSE(rep.gm("ols", p)->defined);
}

TEST_CASE("survey interval and scatter output") {
  CHECK(ci_half_width(16, 60) == doctest::Approx(29.4));
  EvaluationReport rep;
  const ProblemSpec p{SignalSource::internet, Activity::work, Target::stop};
  rep.scatter = {{"ols", p, "c001", 2010, 1020, 1030, 16}, {"ols", p, "c002", 2010, 990, 985, 25}};
  const auto csv = scatter_csv(rep, 60);
  const auto pts = parse_scatter_csv(csv);
  REQUIRE(pts.size() == 2);
  CHECK(pts[1].predicted == 985);
  CHECK(pts[0].respondents == 16);
  const auto svg = scatter_svg(pts, "work stop", 60);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("<path") != std::string::npos);
}
