#include "quakealarm/catalog.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "quakealarm/errors.hpp"

namespace quakealarm {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

void validate_event(const Event& e) {
  if (!(e.depth_km >= 0.0)) throw ArgumentError("event depth must be >= 0");
  for (const auto& m : {e.mb, e.ms}) {
    if (m && !(*m > 0.0 && *m <= 10.0)) {
      throw ArgumentError("event magnitude must lie in (0, 10]");
    }
  }
}

std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

void append_number(std::string& out, double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  out.append(buf, ptr);
}

}  // namespace

Catalog::Catalog() : span_{GlobalSphere{}, {Instant{}, Instant{} + std::chrono::days{1}}} {}

Catalog::Catalog(std::vector<Event> events, StudyVolume span, MagnitudeKind selector)
    : events_(std::move(events)), span_(std::move(span)), selector_(selector) {
  validate(span_.region);
  if (!(span_.interval.start < span_.interval.end)) {
    throw ArgumentError("study span must have start < end");
  }
  for (const auto& e : events_) {
    validate_event(e);
    if (!span_.interval.contains(e.time)) {
      throw ArgumentError("event " + format_iso8601(e.time) +
                          " lies outside the catalog time span");
    }
    if (!contains(span_.region, e.epicenter)) {
      throw ArgumentError("event " + format_iso8601(e.time) +
                          " lies outside the catalog region");
    }
  }
  std::stable_sort(events_.begin(), events_.end(),
                   [](const Event& a, const Event& b) { return a.time < b.time; });
}

StudyVolume derived_span(const std::vector<Event>& events) {
  if (events.empty()) return Catalog{}.span();
  const auto [lo, hi] = std::minmax_element(
      events.begin(), events.end(),
      [](const Event& a, const Event& b) { return a.time < b.time; });
  return StudyVolume{GlobalSphere{},
                     {floor_to_day(lo->time),
                      floor_to_day(hi->time) + std::chrono::days{1}}};
}

Catalog Catalog::with_derived_span(std::vector<Event> events, MagnitudeKind selector) {
  StudyVolume span = derived_span(events);
  return Catalog(std::move(events), std::move(span), selector);
}

Catalog Catalog::with_selector(MagnitudeKind selector) const {
  Catalog copy = *this;
  copy.selector_ = selector;
  return copy;
}

Catalog parse_csv_text(std::string_view text, MagnitudeKind selector) {
  std::istringstream in{std::string(text)};
  return parse_csv(in, selector);
}

Catalog parse_csv(std::istream& in, MagnitudeKind selector) {
  const auto lines = read_lines(in);
  if (lines.empty() || trim(lines.front()) != kCsvHeader) {
    throw ParseError("line 1: expected header '" + std::string(kCsvHeader) + "'", 1);
  }

  std::vector<Event> events;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    const std::string_view line = lines[i];
    if (trim(line).empty()) continue;

    auto fail = [lineno](const std::string& why) -> ParseError {
      return ParseError("line " + std::to_string(lineno) + ": " + why, lineno);
    };

    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
      const auto comma = line.find(',', pos);
      fields.push_back(line.substr(pos, comma - pos));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (fields.size() != 7) {
      throw fail("expected 7 fields, found " + std::to_string(fields.size()));
    }

    Event e;
    try {
      e.time = parse_iso8601(trim(fields[0]));
    } catch (const ArgumentError& err) {
      throw fail(err.what());
    }
    const auto lat = parse_double(fields[1]);
    const auto lon = parse_double(fields[2]);
    if (!lat || !lon) throw fail("bad latitude/longitude");
    if (*lat < -90.0 || *lat > 90.0) throw fail("latitude out of range");
    if (*lon < -180.0 || *lon > 180.0) throw fail("longitude out of range");
    e.epicenter = GeoPoint(*lat, *lon);

    const auto depth = parse_double(fields[3]);
    if (!depth || *depth < 0.0) throw fail("bad depth");
    e.depth_km = *depth;

    for (auto [field, slot] : {std::pair{fields[4], &e.mb}, std::pair{fields[5], &e.ms}}) {
      if (trim(field).empty()) continue;
      const auto m = parse_double(field);
      if (!m || !(*m > 0.0 && *m <= 10.0)) throw fail("bad magnitude");
      *slot = *m;
    }
    if (!e.mb && !e.ms) throw fail("event has neither mb nor ms");
    e.source_id = std::string(trim(fields[6]));
    events.push_back(std::move(e));
  }
  return Catalog::with_derived_span(std::move(events), selector);
}

Catalog parse_ndk_text(std::string_view text, MagnitudeKind selector) {
  std::istringstream in{std::string(text)};
  return parse_ndk(in, selector);
}

Catalog parse_ndk(std::istream& in, MagnitudeKind selector) {
  auto lines = read_lines(in);
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.size() % 5 != 0) {
    throw FormatError("NDK input has " + std::to_string(lines.size()) +
                      " lines, not a multiple of 5");
  }

  std::vector<Event> events;
  events.reserve(lines.size() / 5);
  for (std::size_t rec = 0; rec < lines.size() / 5; ++rec) {
    const std::string& hypo = lines[rec * 5];
    auto fail = [rec](const std::string& why) -> ParseError {
      return ParseError("NDK record " + std::to_string(rec) + ": " + why, rec);
    };
    // 1-based inclusive column ranges of the hypocenter line.
    auto col = [&hypo](std::size_t first, std::size_t last) -> std::string_view {
      if (hypo.size() < first) return {};
      return std::string_view(hypo).substr(first - 1, last - first + 1);
    };

    const std::string_view date = trim(col(6, 15));
    const std::string_view clock = trim(col(17, 26));
    int y = 0, mo = 0, d = 0, h = 0, mi = 0;
    double sec = 0.0;
    {
      const std::string date_s(date), clock_s(clock);
      char tail = 0;
      if (std::sscanf(date_s.c_str(), "%d/%d/%d%c", &y, &mo, &d, &tail) != 3 ||
          std::sscanf(clock_s.c_str(), "%d:%d:%lf%c", &h, &mi, &sec, &tail) != 3) {
        throw fail("bad date/time '" + date_s + " " + clock_s + "'");
      }
    }
    const std::chrono::year_month_day ymd{std::chrono::year{y},
                                          std::chrono::month{static_cast<unsigned>(mo)},
                                          std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h < 0 || h > 24 || mi < 0 || mi > 59 || sec < 0.0 || sec > 61.0) {
      throw fail("date/time out of range");
    }

    const auto lat = parse_double(col(28, 33));
    const auto lon = parse_double(col(35, 41));
    const auto depth = parse_double(col(43, 47));
    if (!lat || !lon || !depth) throw fail("bad latitude/longitude/depth");
    if (*lat < -90.0 || *lat > 90.0 || *lon < -180.0 || *lon > 180.0) {
      throw fail("latitude/longitude out of range");
    }

    std::istringstream mags{std::string(col(49, 55))};
    std::string mb_s, ms_s;
    mags >> mb_s >> ms_s;
    const auto mb = parse_double(mb_s);
    const auto ms = parse_double(ms_s);
    if (!mb || !ms) throw fail("bad reported magnitudes");

    Event e;
    // Overflowing clock fields (hour 24, second 60) roll into the next unit.
    e.time = make_instant(y, static_cast<unsigned>(mo), static_cast<unsigned>(d), h, mi, sec);
    e.epicenter = GeoPoint(*lat, *lon);
    e.depth_km = std::max(0.0, *depth);
    if (*mb > 0.0) e.mb = *mb;
    if (*ms > 0.0) e.ms = *ms;
    for (const auto& m : {e.mb, e.ms}) {
      if (m && *m > 10.0) throw fail("magnitude above 10");
    }
    std::istringstream name{lines[rec * 5 + 1]};
    name >> e.source_id;
    events.push_back(std::move(e));
  }
  return Catalog::with_derived_span(std::move(events), selector);
}

void write_csv(std::ostream& out, const Catalog& catalog) {
  out << kCsvHeader << '\n';
  std::string row;
  for (const auto& e : catalog) {
    if (e.source_id.find_first_of(",\n\r") != std::string::npos) {
      throw ArgumentError("source id '" + e.source_id +
                          "' cannot be written to canonical CSV");
    }
    row.clear();
    row += format_iso8601(e.time);
    row += ',';
    append_number(row, e.epicenter.lat());
    row += ',';
    append_number(row, e.epicenter.lon());
    row += ',';
    append_number(row, e.depth_km);
    row += ',';
    if (e.mb) append_number(row, *e.mb);
    row += ',';
    if (e.ms) append_number(row, *e.ms);
    row += ',';
    row += e.source_id;
    row += '\n';
    out << row;
  }
}

std::string to_csv(const Catalog& catalog) {
  std::ostringstream out;
  write_csv(out, catalog);
  return out.str();
}

Catalog filter(const Catalog& catalog, double mag_min, const TimeInterval& window) {
  if (!std::isfinite(mag_min)) throw ArgumentError("magnitude threshold must be finite");
  if (!(window.start < window.end)) throw ArgumentError("filter window must have start < end");
  std::vector<Event> kept;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    const auto m = catalog.magnitude(i);
    if (m && *m >= mag_min && window.contains(catalog[i].time)) {
      kept.push_back(catalog[i]);
    }
  }
  return Catalog(std::move(kept), StudyVolume{catalog.span().region, window},
                 catalog.magnitude_selector());
}

}  // namespace quakealarm
