#pragma once

#include <cstddef>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "quakealarm/catalog.hpp"

namespace quakealarm {

struct WindowRow {
  double mag_min = 0.0;
  double time_days = 0.0;
  double distance_km = 0.0;

  friend bool operator==(const WindowRow&, const WindowRow&) = default;
};

/// Magnitude-dependent declustering windows. Rows are sorted by strictly
/// increasing mag_min, the first row has mag_min = -inf, and every window has
/// positive extent. lookup(m) is the row with the largest mag_min <= m.
class WindowTable {
 public:
  explicit WindowTable(std::vector<WindowRow> rows);
  static WindowTable uniform(double time_days, double distance_km);

  const WindowRow& lookup(double magnitude) const;
  const std::vector<WindowRow>& rows() const { return rows_; }
  double max_time_days() const;

  /// Every row's time and distance multiplied by `factor` (> 0).
  WindowTable scaled(double factor) const;

 private:
  std::vector<WindowRow> rows_;
};

inline constexpr std::string_view kWindowCsvHeader = "mag_min,time_days,distance_km";

/// Three-column CSV; mag_min may be `-inf`. Throws ParseError with the line.
WindowTable parse_window_table(std::istream& in);

enum class HoleMode {
  AllEvents,    ///< every event punches a hole, deleted or not
  RetainedOnly  ///< only events that survive punch holes
};

struct DeclusterResult {
  Catalog retained;
  std::vector<std::size_t> deleted_indices;  ///< indices into the input catalog
  HoleMode mode = HoleMode::AllEvents;
};

/// Deletes every event lying in the window (t_i, t_i + T(M_i)] x
/// {distance <= D(M_i)} of an earlier event i with strictly larger
/// magnitude. Events without an authoritative magnitude are never deleted
/// and punch no holes.
DeclusterResult decluster(const Catalog& catalog, const WindowTable& windows,
                          HoleMode mode = HoleMode::AllEvents);

struct DeclusterStats {
  std::size_t n_deleted = 0;
  double fraction_deleted = 0.0;
};

/// Throws ArgumentError unless `after` is a sub-multiset of `before`.
DeclusterStats decluster_stats(const Catalog& before, const Catalog& after);

}  // namespace quakealarm
