#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sfca/csv_io.hpp"
#include "sfca/grid.hpp"
#include "sfca/trajectory.hpp"

namespace sfca {

enum class NoiseMode { gaussian, burst };

NoiseMode parse_noise_mode(std::string_view s);
std::string_view to_string(NoiseMode m);

struct CityGenParams {
  std::string city_id;
  std::int64_t population = 1000000;
  double latitude = 40;
  double sleep_start = 1365;  // onset, minutes after midnight
  double sleep_stop = 405;    // wake
  double work_start = 510;
  double work_stop = 1035;
  double floor = 0.3;         // always-on share of the internet signal
  double amplitude = 0.6;     // floor + amplitude <= 1
  double work_dip = 0.25;     // weekday home-activity dip while at work
  double demand_bump = 0.3;   // weekday electricity rise while at work
  double weekend_shift = 45;  // minutes; Saturday/Sunday wake and Friday/Saturday onset
  double noise_sigma = 0.03;
  double ramp_minutes = 12;   // logistic scale; 0 gives a step
  int respondents = 50;

  void validate() const;
};

/// Minutes of the noise-free awake indicator for one calendar day.
/// `dow` shifts the windows on weekends; work only applies Monday..Friday.
double awake_level(const CityGenParams& p, int dow, double minute);
double work_level(const CityGenParams& p, int dow, double minute);

/// Noise-free internet online fraction and electricity demand shapes.
double internet_curve(const CityGenParams& p, int dow, double minute);
double demand_curve(const CityGenParams& p, int dow, double minute);

struct CityYearData {
  std::vector<DailyTrace> traces;  // noisy internet online fraction
  std::vector<DailyTrace> clean;   // the analytic curve at segment midpoints
  std::vector<DailyTrace> hourly;  // electricity megawatts, 24 per day
  std::vector<OutcomeRow> outcomes;
};

/// `n_days` consecutive days from 1 March of `year`. `seed` only drives
/// the noise: the clean curves depend on `params` alone.
CityYearData generate_city(const CityGenParams& params, int year, int n_days, std::uint64_t seed,
                           const SegmentGrid& grid = {}, NoiseMode mode = NoiseMode::gaussian);

struct SynthOptions {
  int cities = 60;
  int years = 2;
  int first_year = 2010;
  int days = 28;  // per city-year
  double noise = 0.03;
  NoiseMode mode = NoiseMode::gaussian;
  std::uint64_t seed = 42;
  SegmentGrid grid;
};

struct SynthCorpus {
  std::vector<CityGenParams> cities;
  std::vector<DailyTrace> traces;
  std::vector<DailyTrace> clean;
  std::vector<DailyTrace> hourly;
  std::vector<OutcomeRow> outcomes;
  std::vector<StaticRow> statics;
};

/// City `index` of `count`: populations are log-spaced from 260 thousand
/// to 12 million so every population filter keeps some cities; the other
/// parameters are drawn from the city's own seed stream.
CityGenParams draw_city(int index, int count, std::uint64_t seed, double noise);

/// Per city-year windows get independent jitter so years differ.
SynthCorpus generate_corpus(const SynthOptions& opts);

/// Uniform double in [0, 1) from the top 53 bits.
double uniform01(std::mt19937_64& rng);
/// Standard normal by Box-Muller.
double standard_normal(std::mt19937_64& rng);

}  // namespace sfca
