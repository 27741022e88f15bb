#include "quakealarm/time.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "quakealarm/errors.hpp"

namespace quakealarm {

namespace {

using namespace std::chrono;

int parse_digits(std::string_view text, std::size_t pos, std::size_t count,
                 std::string_view whole) {
  if (pos + count > text.size()) {
    throw ArgumentError("truncated timestamp: '" + std::string(whole) + "'");
  }
  int value = 0;
  for (std::size_t i = pos; i < pos + count; ++i) {
    const char c = text[i];
    if (c < '0' || c > '9') {
      throw ArgumentError("bad digit in timestamp: '" + std::string(whole) + "'");
    }
    value = value * 10 + (c - '0');
  }
  return value;
}

void expect_char(std::string_view text, std::size_t pos, char c,
                 std::string_view whole) {
  if (pos >= text.size() || text[pos] != c) {
    throw ArgumentError("malformed timestamp: '" + std::string(whole) + "'");
  }
}

sys_days checked_date(int y, int m, int d, std::string_view whole) {
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) {
    throw ArgumentError("invalid calendar date: '" + std::string(whole) + "'");
  }
  return sys_days{ymd};
}

}  // namespace

Duration seconds_to_duration(double seconds) {
  return Duration{static_cast<Duration::rep>(std::llround(seconds * 1e6))};
}

Duration days_to_duration(double days) {
  return seconds_to_duration(days * kSecondsPerDay);
}

double to_seconds(Duration d) { return static_cast<double>(d.count()) * 1e-6; }

Instant make_instant(int y, unsigned m, unsigned d, int hour, int minute,
                     double second) {
  const sys_days date{year_month_day{year{y}, month{m}, day{d}}};
  return Instant{duration_cast<Duration>(date.time_since_epoch())} + hours{hour} +
         minutes{minute} + seconds_to_duration(second);
}

Instant floor_to_day(Instant t) {
  return Instant{duration_cast<Duration>(
      floor<days>(t).time_since_epoch())};
}

Instant parse_iso8601(std::string_view text) {
  const std::string_view whole = text;
  if (!text.empty() && text.back() == 'Z') text.remove_suffix(1);

  const int y = parse_digits(text, 0, 4, whole);
  expect_char(text, 4, '-', whole);
  const int mo = parse_digits(text, 5, 2, whole);
  expect_char(text, 7, '-', whole);
  const int d = parse_digits(text, 8, 2, whole);
  expect_char(text, 10, 'T', whole);
  const int h = parse_digits(text, 11, 2, whole);
  expect_char(text, 13, ':', whole);
  const int mi = parse_digits(text, 14, 2, whole);
  expect_char(text, 16, ':', whole);
  const int s = parse_digits(text, 17, 2, whole);
  if (h > 23 || mi > 59 || s > 60) {
    throw ArgumentError("time of day out of range: '" + std::string(whole) + "'");
  }

  std::int64_t micros = 0;
  if (text.size() > 19) {
    expect_char(text, 19, '.', whole);
    const std::size_t digits = text.size() - 20;
    if (digits == 0 || digits > 6) {
      throw ArgumentError("bad fractional seconds: '" + std::string(whole) + "'");
    }
    micros = parse_digits(text, 20, digits, whole);
    for (std::size_t i = digits; i < 6; ++i) micros *= 10;
  }

  const sys_days date = checked_date(y, mo, d, whole);
  return Instant{duration_cast<Duration>(date.time_since_epoch())} + hours{h} +
         minutes{mi} + std::chrono::seconds{s} + Duration{micros};
}

Instant parse_date_or_instant(std::string_view text) {
  if (text.size() == 10) {
    const int y = parse_digits(text, 0, 4, text);
    expect_char(text, 4, '-', text);
    const int mo = parse_digits(text, 5, 2, text);
    expect_char(text, 7, '-', text);
    const int d = parse_digits(text, 8, 2, text);
    return Instant{duration_cast<Duration>(
        checked_date(y, mo, d, text).time_since_epoch())};
  }
  return parse_iso8601(text);
}

std::string format_iso8601(Instant t) {
  const auto day_start = floor<days>(t);
  const year_month_day ymd{day_start};
  const hh_mm_ss tod{t - day_start};

  char buf[48];
  int n = std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d",
                        static_cast<int>(ymd.year()),
                        static_cast<unsigned>(ymd.month()),
                        static_cast<unsigned>(ymd.day()),
                        static_cast<int>(tod.hours().count()),
                        static_cast<int>(tod.minutes().count()),
                        static_cast<int>(tod.seconds().count()));
  std::string out(buf, static_cast<std::size_t>(n));

  auto frac = tod.subseconds().count();
  if (frac != 0) {
    int width = 6;
    while (frac % 10 == 0) {
      frac /= 10;
      --width;
    }
    n = std::snprintf(buf, sizeof buf, ".%0*lld", width,
                      static_cast<long long>(frac));
    out.append(buf, static_cast<std::size_t>(n));
  }
  out.push_back('Z');
  return out;
}

}  // namespace quakealarm
