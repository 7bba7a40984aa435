#include "sfca/synth.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "sfca/parallel.hpp"

namespace sfca {

NoiseMode parse_noise_mode(std::string_view s) {
  if (s == "gaussian") return NoiseMode::gaussian;
  if (s == "burst") return NoiseMode::burst;
  throw Error("unknown noise mode '" + std::string(s) + "' (gaussian or burst)");
}

std::string_view to_string(NoiseMode m) { return m == NoiseMode::gaussian ? "gaussian" : "burst"; }

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double standard_normal(std::mt19937_64& rng) {
  const double u1 = 1.0 - uniform01(rng);  // (0, 1]
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void CityGenParams::validate() const {
  auto bad = [&](const std::string& what) { throw Error("city " + city_id + ": " + what); };
  ActivityOutcome sleep{Activity::sleep, sleep_start, sleep_stop, respondents, population};
  ActivityOutcome work{Activity::work, work_start, work_stop, respondents, population};
  sleep.validate();
  work.validate();
  if (!(noise_sigma >= 0)) bad("noise sigma must be >= 0");
  if (!(floor >= 0 && floor < 1)) bad("floor must lie in [0, 1)");
  if (!(amplitude > 0) || floor + amplitude > 1 + 1e-12) bad("floor + amplitude must not exceed 1");
  if (!(ramp_minutes >= 0)) bad("ramp must be >= 0");
  if (!(work_dip >= 0 && work_dip < 1)) bad("work dip must lie in [0, 1)");
  if (!(weekend_shift >= 0)) bad("weekend shift must be >= 0");
  if (work_start <= sleep_stop || work_stop >= sleep_start) bad("work window must lie inside the waking day");
}

namespace {

double ramp(double x, double scale) {
  if (scale == 0.0) return x > 0 ? 1.0 : (x < 0 ? 0.0 : 0.5);
  return 1.0 / (1.0 + std::exp(-x / scale));
}

bool weekend_morning(int dow) { return dow == 6 || dow == 7; }
bool weekend_evening(int dow) { return dow == 5 || dow == 6; }

std::string iso_date(std::chrono::sys_days d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace

double awake_level(const CityGenParams& p, int dow, double minute) {
  const double wake = p.sleep_stop + (weekend_morning(dow) ? p.weekend_shift : 0.0);
  const double onset = p.sleep_start + (weekend_evening(dow) ? p.weekend_shift : 0.0);
  // The previous evening's onset may run past midnight.
  const int prev = dow == 1 ? 7 : dow - 1;
  const double carried = p.sleep_start + (weekend_evening(prev) ? p.weekend_shift : 0.0) - kMinutesPerDay;
  const double level = ramp(minute - wake, p.ramp_minutes) * ramp(onset - minute, p.ramp_minutes) +
                       ramp(carried - minute, p.ramp_minutes);
  return std::min(1.0, level);
}

double work_level(const CityGenParams& p, int dow, double minute) {
  if (dow > 5) return 0.0;
  return ramp(minute - p.work_start, p.ramp_minutes) * ramp(p.work_stop - minute, p.ramp_minutes);
}

double internet_curve(const CityGenParams& p, int dow, double minute) {
  return p.floor + p.amplitude * awake_level(p, dow, minute) * (1.0 - p.work_dip * work_level(p, dow, minute));
}

double demand_curve(const CityGenParams& p, int dow, double minute) {
  const double cooling = 0.15 * (48.0 - p.latitude) / 23.0;
  const double afternoon = std::exp(-0.5 * std::pow((minute - 900.0) / 150.0, 2));
  return 0.35 + 0.4 * awake_level(p, dow, minute) + p.demand_bump * work_level(p, dow, minute) +
         cooling * afternoon;
}

CityYearData generate_city(const CityGenParams& params, int year, int n_days, std::uint64_t seed,
                           const SegmentGrid& grid, NoiseMode mode) {
  params.validate();
  grid.validate();
  if (n_days < 7) throw Error("generate_city needs at least 7 days");
  std::mt19937_64 rng(seed);
  const int n = grid.segments_per_day;
  const double scale = static_cast<double>(params.population) / 1000.0;
  CityYearData out;
  const auto first = std::chrono::sys_days{std::chrono::year{year} / std::chrono::March / 1};
  for (int d = 0; d < n_days; ++d) {
    const auto day = first + std::chrono::days{d};
    const int dow = static_cast<int>(std::chrono::weekday{day}.iso_encoding());
    const std::string date = iso_date(day);
    DailyTrace clean{params.city_id, year, date, dow, std::vector<double>(n)};
    DailyTrace noisy = clean;
    for (int s = 1; s <= n; ++s) {
      const double v = internet_curve(params, dow, grid.midpoint(s));
      clean.values[s - 1] = v;
      noisy.values[s - 1] = std::clamp(v + params.noise_sigma * standard_normal(rng), 0.0, 1.0);
    }
    if (mode == NoiseMode::burst && uniform01(rng) < 0.25) {
      const int len = 4 + static_cast<int>(rng() % 9);
      const int at = static_cast<int>(rng() % static_cast<std::uint64_t>(n - len));
      for (int k = at; k < at + len; ++k) noisy.values[k] *= 0.3 * uniform01(rng);
    }
    DailyTrace hourly{params.city_id, year, date, dow, std::vector<double>(24)};
    for (int h = 0; h < 24; ++h) {
      double mean = 0;
      for (int m = 0; m < 60; ++m) mean += demand_curve(params, dow, h * 60.0 + m + 0.5);
      mean /= 60.0;
      hourly.values[h] = scale * mean * (1.0 + params.noise_sigma * standard_normal(rng));
    }
    if (mode == NoiseMode::burst && uniform01(rng) < 0.1) hourly.values[rng() % 24] *= 0.5;
    out.clean.push_back(std::move(clean));
    out.traces.push_back(std::move(noisy));
    out.hourly.push_back(std::move(hourly));
  }
  out.outcomes.push_back({params.city_id, year,
                          {Activity::sleep, params.sleep_start, params.sleep_stop, params.respondents,
                           params.population}});
  out.outcomes.push_back({params.city_id, year,
                          {Activity::work, params.work_start, params.work_stop, params.respondents,
                           params.population}});
  return out;
}

CityGenParams draw_city(int index, int count, std::uint64_t seed, double noise) {
  if (count < 1 || index < 0 || index >= count) throw Error("city index out of range");
  char id[16];
  std::snprintf(id, sizeof id, "c%03d", index + 1);
  CityGenParams p;
  p.city_id = id;
  std::mt19937_64 rng(derive_seed(seed, std::string("city:") + id));
  const double frac = (index + 0.5) / count;
  p.population = static_cast<std::int64_t>(std::llround(260000.0 * std::pow(12e6 / 260e3, frac)));
  p.respondents = static_cast<int>(std::max<std::int64_t>(10, p.population / 20000));
  p.latitude = 25.0 + 23.0 * uniform01(rng);
  p.sleep_start = std::clamp(1365.0 + 25.0 * standard_normal(rng), 1290.0, 1410.0);
  p.sleep_stop = std::clamp(405.0 + 25.0 * standard_normal(rng), 330.0, 480.0);
  p.work_start = std::clamp(510.0 + 20.0 * standard_normal(rng), p.sleep_stop + 45.0, 600.0);
  p.work_stop = std::clamp(1035.0 + 25.0 * standard_normal(rng), 960.0, 1110.0);
  p.floor = 0.15 + 0.3 * uniform01(rng);
  p.amplitude = (1.0 - p.floor) * (0.7 + 0.3 * uniform01(rng));
  p.work_dip = 0.15 + 0.25 * uniform01(rng);
  p.demand_bump = 0.2 + 0.2 * uniform01(rng);
  p.ramp_minutes = 8.0 + 12.0 * uniform01(rng);
  p.weekend_shift = 30.0 + 45.0 * uniform01(rng);
  p.noise_sigma = noise;
  p.validate();
  return p;
}

SynthCorpus generate_corpus(const SynthOptions& opts) {
  if (opts.cities < 1) throw Error("synth needs at least one city");
  if (opts.years < 1) throw Error("synth needs at least one year");
  SynthCorpus c;
  for (int i = 0; i < opts.cities; ++i) {
    const auto base = draw_city(i, opts.cities, opts.seed, opts.noise);
    c.cities.push_back(base);
    c.statics.push_back({base.city_id, base.latitude});
    for (int y = 0; y < opts.years; ++y) {
      const int year = opts.first_year + y;
      const std::string stream = base.city_id + ":" + std::to_string(year);
      std::mt19937_64 jitter(derive_seed(opts.seed, stream + ":windows"));
      CityGenParams p = base;
      p.sleep_start += 5.0 * standard_normal(jitter);
      p.sleep_stop += 5.0 * standard_normal(jitter);
      p.work_start += 5.0 * standard_normal(jitter);
      p.work_stop += 5.0 * standard_normal(jitter);
      auto data = generate_city(p, year, opts.days, derive_seed(opts.seed, stream + ":noise"), opts.grid,
                                opts.mode);
      for (auto& t : data.traces) c.traces.push_back(std::move(t));
      for (auto& t : data.clean) c.clean.push_back(std::move(t));
      for (auto& t : data.hourly) c.hourly.push_back(std::move(t));
      for (auto& o : data.outcomes) c.outcomes.push_back(std::move(o));
    }
  }
  return c;
}

}  // namespace sfca
