#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sfca {

/// Raised for contract violations and unrecoverable input problems.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-segment missing marker. Traces store it in place of a value.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

inline constexpr double kMinutesPerDay = 1440.0;

enum class Activity { sleep, work };

std::string_view to_string(Activity a);
Activity parse_activity(std::string_view s);

enum class SignalSource { internet, electricity };

std::string_view to_string(SignalSource s);
SignalSource parse_source(std::string_view s);

/// Wraps minutes into [0, 1440).
inline double wrap_minutes(double m) {
  double r = std::fmod(m, kMinutesPerDay);
  if (r < 0) r += kMinutesPerDay;
  return r;
}

}  // namespace sfca
