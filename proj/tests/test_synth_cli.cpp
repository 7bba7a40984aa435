#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sfca/config.hpp"
#include "sfca/csv_io.hpp"
#include "sfca/pipeline.hpp"
#include "sfca/synth.hpp"

using namespace sfca;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string err;
};

Run cli(const std::string& args, const fs::path& dir) {
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string(SFCA_CLI_PATH) + " " + args + " >" + (dir / "stdout.txt").string() +
                          " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(err);
  std::stringstream ss;
  ss << in.rdbuf();
  r.err = ss.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sfca_unit_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("corpus generation is seed deterministic") {
  SynthOptions o;
  o.cities = 4;
  o.years = 1;
  o.days = 7;
  const auto a = generate_corpus(o);
  const auto b = generate_corpus(o);
  CHECK(write_traces(a.traces) == write_traces(b.traces));
  CHECK(write_hourly(a.hourly) == write_hourly(b.hourly));
  CHECK(write_outcomes(a.outcomes) == write_outcomes(b.outcomes));
  o.seed = 7;
  const auto c = generate_corpus(o);
  CHECK(write_traces(a.traces) != write_traces(c.traces));
  CHECK(a.traces.size() == 4u * 7u);
  CHECK(a.hourly.size() == 4u * 7u);
  CHECK(a.outcomes.size() == 4u * 2u);
  CHECK(a.statics.size() == 4u);
}

TEST_CASE("clean curves do not depend on the noise seed") {
  const auto p = draw_city(0, 5, 42, 0.03);
  const auto a = generate_city(p, 2010, 7, 1);
  const auto b = generate_city(p, 2010, 7, 2);
  CHECK(write_traces(a.clean) == write_traces(b.clean));
  CHECK(write_traces(a.traces) != write_traces(b.traces));
  CHECK(a.traces.front().date == "2010-03-01");
  CHECK(a.traces.front().dow == day_of_week("2010-03-01"));
  CHECK_THROWS_AS(generate_city(p, 2010, 6, 1), Error);
}

TEST_CASE("a zero ramp without noise gives a step at the boundaries") {
  CityGenParams p;
  p.city_id = "step";
  p.ramp_minutes = 0;
  p.noise_sigma = 0;
  const auto d = generate_city(p, 2010, 7, 1);
  const SegmentGrid g;
  for (const auto& t : d.clean) {
    if (t.dow != 3) continue;
    for (int s = 1; s <= 96; ++s) {
      const double m = g.midpoint(s);
      const bool asleep = m >= p.sleep_start || m < p.sleep_stop;
      CHECK(awake_level(p, 3, m) == (asleep ? 0.0 : 1.0));
    }
  }
  CHECK(write_traces(d.clean) == write_traces(d.traces));
}

TEST_CASE("populations span every filter") {
  for (auto f : {250000, 500000, 1000000, 2500000, 5000000}) {
    int kept = 0;
    for (int i = 0; i < 60; ++i) kept += draw_city(i, 60, 42, 0.03).population > f;
    CHECK(kept >= 5);
  }
}

TEST_CASE("preprocessed synthetic weeks follow the generator curve") {
  SynthOptions o;
  o.cities = 3;
  o.years = 1;
  o.days = 14;
  const auto c = generate_corpus(o);
  const auto noisy = preprocess_internet(c.traces, o.grid);
  const auto clean = preprocess_internet(c.clean, o.grid);
  REQUIRE(noisy.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    for (int dow = 1; dow <= 7; ++dow) {
      std::vector<double> curve(96);
      for (int s = 1; s <= 96; ++s) curve[s - 1] = internet_curve(c.cities[i], dow, o.grid.midpoint(s));
      const auto& w = noisy[i].day(dow);
      const auto& ref = clean[i].day(dow);
      double gap = 0, mw = 0, mc = 0;
      for (int s = 0; s < 96; ++s) {
        gap += std::abs(w[s] - ref[s]);
        mw += w[s] / 96;
        mc += curve[s] / 96;
      }
      // Noise widens each day's range before normalisation, which mostly shrinks amplitude.
      CHECK(gap / 96 < 0.08);
      double sxy = 0, sxx = 0, syy = 0;
      for (int s = 0; s < 96; ++s) {
        sxy += (w[s] - mw) * (curve[s] - mc);
        sxx += (w[s] - mw) * (w[s] - mw);
        syy += (curve[s] - mc) * (curve[s] - mc);
      }
      CHECK(sxy / std::sqrt(sxx * syy) > 0.85);
    }
  }
}

TEST_CASE("config parsing and validation") {
  const auto cfg = RunConfig::parse(
      "# comment\nseed = 7\neval.methods = ols, lasso(w)\neval.filters = 250000,1000000\n"
      "learner.lasso.lambda = 0.5\ndecode.denoise = soft_universal\n");
  CHECK(cfg.seed == 7);
  CHECK(cfg.methods == std::vector<std::string>{"ols", "lasso(w)"});
  CHECK(cfg.filters.size() == 2);
  CHECK(cfg.spec_for("lasso").lambda == 0.5);
  CHECK(cfg.spec_for("lasso(w)").weighted);
  CHECK(cfg.decode.denoise == DenoiseRule::soft_universal);
  CHECK(RunConfig::parse(cfg.dump()).dump() == cfg.dump());

  const auto throws_with = [](const std::string& text, const std::string& fragment) {
    try {
      RunConfig::parse(text);
      FAIL("expected a config error for: " << text);
    } catch (const Error& e) {
      CHECK_MESSAGE(std::string(e.what()).find(fragment) != std::string::npos, e.what());
    }
  };
  throws_with("bogus = 1\n", "unknown config key");
  throws_with("seed = 1\nseed = 2\n", "repeated");
  throws_with("seed\n", "line 1");
  throws_with("synth.noise = loud\n", "synth.noise");
  throws_with("learner.lasso.depth = 3\n", "learner");
  throws_with("grid.segments_per_day = 96\ngrid.day_start_offset = 200\n", "day_start_offset");
  CHECK(RunConfig::known_keys().size() > 20);
}

TEST_CASE("CLI exit codes and outputs") {
  const auto dir = scratch("cli");
  const std::string io = " --data " + (dir / "data").string() + " --out " + (dir / "out").string();
  REQUIRE(cli("synth --cities 3 --days 7 --years 1" + io, dir).code == 0);
  for (const char* f : {"traces.csv", "clean_traces.csv", "hourly.csv", "outcomes.csv", "static.csv"})
    CHECK(fs::exists(dir / "data" / f));
  REQUIRE(cli("preprocess" + io, dir).code == 0);
  CHECK(fs::exists(dir / "data" / "weeks_internet.csv"));
  CHECK(fs::exists(dir / "data" / "weeks_electricity.csv"));
  REQUIRE(cli("features --source both --stack" + io, dir).code == 0);
  CHECK(fs::exists(dir / "data" / "features_internet.csv"));

  std::ofstream(dir / "small.cfg") << "learner.c-tree-bag.n_trees = 5\n";
  const std::string cfg = " -c " + (dir / "small.cfg").string();
  REQUIRE(cli("train --method 'c-tree(bg)' --activity sleep" + cfg + io, dir).code == 0);
  const auto d = cli("decode --city c001 --year 2010 --activity sleep" + cfg + io, dir);
  CHECK(d.code == 0);
  CHECK(fs::exists(dir / "out" / "decode_c001_2010_sleep.csv"));

  const auto bad_flag = cli("synth --frobnicate" + io, dir);
  CHECK(bad_flag.code == 2);
  CHECK(bad_flag.err.find("kind=usage") != std::string::npos);

  std::ofstream(dir / "bad.cfg") << "no_such_key = 1\n";
  const auto bad_cfg = cli("preprocess -c " + (dir / "bad.cfg").string() + io, dir);
  CHECK(bad_cfg.code == 2);
  CHECK(bad_cfg.err.find("kind=config") != std::string::npos);

  const auto missing = cli("preprocess --data " + (dir / "nowhere").string() + " --out " + (dir / "out").string(), dir);
  CHECK(missing.code == 1);
  CHECK(missing.err.find("kind=runtime") != std::string::npos);
  fs::remove_all(dir);
}
