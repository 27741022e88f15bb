#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace quakealarm {

using Duration = std::chrono::microseconds;
using Instant = std::chrono::sys_time<Duration>;

inline constexpr double kSecondsPerDay = 86400.0;

/// Converts a (possibly fractional) number of seconds to a Duration,
/// rounding to the nearest microsecond.
Duration seconds_to_duration(double seconds);

/// Exactly 86400 s per day.
Duration days_to_duration(double days);

double to_seconds(Duration d);

/// Half-open time interval [start, end).
struct TimeInterval {
  Instant start;
  Instant end;

  bool contains(Instant t) const { return start <= t && t < end; }
  bool contains(const TimeInterval& other) const {
    return start <= other.start && other.end <= end;
  }
  Duration length() const { return end - start; }
  double seconds() const { return to_seconds(length()); }

  friend bool operator==(const TimeInterval&, const TimeInterval&) = default;
};

/// Parses `YYYY-MM-DDTHH:MM:SS[.ffffff][Z]`. Throws ArgumentError.
Instant parse_iso8601(std::string_view text);

/// Like parse_iso8601 but also accepts a bare `YYYY-MM-DD` (midnight UTC).
Instant parse_date_or_instant(std::string_view text);

/// `YYYY-MM-DDTHH:MM:SS[.f]Z`; fractional digits are printed only when
/// nonzero, with trailing zeros trimmed.
std::string format_iso8601(Instant t);

/// Midnight UTC on the given civil date.
Instant make_instant(int year, unsigned month, unsigned day,
                     int hour = 0, int minute = 0, double second = 0.0);

/// Midnight UTC at or before t.
Instant floor_to_day(Instant t);

}  // namespace quakealarm
