#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "quakealarm/geo.hpp"
#include "quakealarm/time.hpp"

namespace quakealarm {

enum class MagnitudeKind { Mb, Ms };

struct Event {
  Instant time;
  GeoPoint epicenter;
  double depth_km = 0.0;
  std::optional<double> mb;
  std::optional<double> ms;
  std::string source_id;

  std::optional<double> magnitude(MagnitudeKind kind) const {
    return kind == MagnitudeKind::Mb ? mb : ms;
  }

  friend bool operator==(const Event&, const Event&) = default;
};

/// Immutable, time-sorted collection of events inside a study volume.
///
/// Construction stable-sorts the events by time (equal times keep their input
/// order) and rejects events outside the span, negative depths, and
/// magnitudes outside (0, 10].
class Catalog {
 public:
  Catalog();
  Catalog(std::vector<Event> events, StudyVolume span,
          MagnitudeKind selector = MagnitudeKind::Mb);

  /// Span derived from the events: global region, from midnight of the first
  /// event's day to midnight after the last event's day.
  static Catalog with_derived_span(std::vector<Event> events,
                                   MagnitudeKind selector = MagnitudeKind::Mb);

  const std::vector<Event>& events() const { return events_; }
  const Event& operator[](std::size_t i) const { return events_[i]; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  auto begin() const { return events_.begin(); }
  auto end() const { return events_.end(); }

  const StudyVolume& span() const { return span_; }
  MagnitudeKind magnitude_selector() const { return selector_; }

  /// Authoritative magnitude of event i (absent if the selected field is).
  std::optional<double> magnitude(std::size_t i) const {
    return events_[i].magnitude(selector_);
  }

  Catalog with_selector(MagnitudeKind selector) const;

  friend bool operator==(const Catalog&, const Catalog&) = default;

 private:
  std::vector<Event> events_;
  StudyVolume span_;
  MagnitudeKind selector_ = MagnitudeKind::Mb;
};

StudyVolume derived_span(const std::vector<Event>& events);

/// Canonical CSV with header `time,lat,lon,depth_km,mb,ms,id`.
/// Throws ParseError carrying the 1-based line number.
Catalog parse_csv(std::istream& in, MagnitudeKind selector = MagnitudeKind::Mb);
Catalog parse_csv_text(std::string_view text,
                       MagnitudeKind selector = MagnitudeKind::Mb);

/// NDK (five 80-column lines per event). Only the hypocenter line is read for
/// time, location, depth and the two reported magnitudes (mb, then Ms); a
/// reported 0.0 means "not determined" and becomes absent. The event name on
/// the second line is kept as source_id.
/// Throws FormatError when the line count is not a multiple of five and
/// ParseError (with the 0-based record index) for bad fields.
Catalog parse_ndk(std::istream& in, MagnitudeKind selector = MagnitudeKind::Mb);
Catalog parse_ndk_text(std::string_view text,
                       MagnitudeKind selector = MagnitudeKind::Mb);

inline constexpr std::string_view kCsvHeader = "time,lat,lon,depth_km,mb,ms,id";

void write_csv(std::ostream& out, const Catalog& catalog);
std::string to_csv(const Catalog& catalog);

/// Events with authoritative magnitude >= mag_min and time in `window`.
/// Events whose authoritative magnitude is absent are dropped. The result's
/// span is `window` over the same region.
Catalog filter(const Catalog& catalog, double mag_min, const TimeInterval& window);

}  // namespace quakealarm
