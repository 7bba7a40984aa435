#include "sfca/common.hpp"

#include <array>

#include "sfca/grid.hpp"
#include "sfca/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sfca {

std::string_view to_string(Activity a) { return a == Activity::sleep ? "sleep" : "work"; }

Activity parse_activity(std::string_view s) {
  if (s == "sleep") return Activity::sleep;
  if (s == "work") return Activity::work;
  throw Error("unknown activity '" + std::string(s) + "'");
}

std::string_view to_string(SignalSource s) {
  return s == SignalSource::internet ? "internet" : "electricity";
}

SignalSource parse_source(std::string_view s) {
  if (s == "internet") return SignalSource::internet;
  if (s == "electricity") return SignalSource::electricity;
  throw Error("unknown source '" + std::string(s) + "'");
}

SegmentGrid SegmentGrid::make(int segments_per_day, int day_start_offset) {
  SegmentGrid g{segments_per_day, day_start_offset};
  g.validate();
  return g;
}

void SegmentGrid::validate() const {
  if (segments_per_day <= 0 || 1440 % segments_per_day != 0)
    throw Error("segments_per_day must divide 1440, got " + std::to_string(segments_per_day));
  if (day_start_offset < 1 || day_start_offset > segments_per_day)
    throw Error("day_start_offset must lie in 1.." + std::to_string(segments_per_day));
}

int SegmentGrid::segment_of(double minute) const {
  int s = static_cast<int>(std::floor(wrap_minutes(minute) / segment_minutes())) + 1;
  return s > segments_per_day ? segments_per_day : s;
}

std::string_view dow_name(int dow) {
  static constexpr std::array<std::string_view, 7> names{"mon", "tue", "wed", "thu",
                                                         "fri", "sat", "sun"};
  if (dow < 1 || dow > 7) throw Error("day of week out of range: " + std::to_string(dow));
  return names[dow - 1];
}

namespace {
int g_thread_limit = 0;
}

void set_thread_limit(int threads) {
  g_thread_limit = threads < 0 ? 0 : threads;
#ifdef _OPENMP
  if (g_thread_limit > 0) {
    omp_set_num_threads(g_thread_limit);
  } else {
    omp_set_num_threads(omp_get_num_procs());
  }
#endif
}

int thread_limit() { return g_thread_limit; }

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return mix64(mix64(master) ^ (stream * 0xd1b54a32d192ed03ULL + 0x2545f4914f6cdd1dULL));
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view key) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : key) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return derive_seed(master, h);
}

}  // namespace sfca
