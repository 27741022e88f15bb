#include "quakealarm/decluster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <limits>
#include <sstream>
#include <string>

#include "quakealarm/errors.hpp"

namespace quakealarm {

WindowTable::WindowTable(std::vector<WindowRow> rows) : rows_(std::move(rows)) {
  if (rows_.empty()) throw ArgumentError("window table needs at least one row");
  if (!(std::isinf(rows_.front().mag_min) && rows_.front().mag_min < 0)) {
    throw ArgumentError("first window row must have mag_min = -inf");
  }
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& r = rows_[i];
    if (!(r.time_days > 0.0) || !(r.distance_km > 0.0) || !std::isfinite(r.time_days) ||
        !std::isfinite(r.distance_km)) {
      throw ArgumentError("window rows need positive, finite time_days and distance_km");
    }
    if (i > 0 && !(rows_[i - 1].mag_min < r.mag_min)) {
      throw ArgumentError("window rows must have strictly increasing mag_min");
    }
  }
}

WindowTable WindowTable::uniform(double time_days, double distance_km) {
  return WindowTable({{-std::numeric_limits<double>::infinity(), time_days, distance_km}});
}

const WindowRow& WindowTable::lookup(double magnitude) const {
  auto it = std::upper_bound(rows_.begin(), rows_.end(), magnitude,
                             [](double m, const WindowRow& r) { return m < r.mag_min; });
  return *std::prev(it);
}

double WindowTable::max_time_days() const {
  double t = 0.0;
  for (const auto& r : rows_) t = std::max(t, r.time_days);
  return t;
}

WindowTable WindowTable::scaled(double factor) const {
  if (!(factor > 0.0)) throw ArgumentError("window scale factor must be > 0");
  std::vector<WindowRow> rows = rows_;
  for (auto& r : rows) {
    r.time_days *= factor;
    r.distance_km *= factor;
  }
  return WindowTable(std::move(rows));
}

WindowTable parse_window_table(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto strip = [](std::string& s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  };
  if (!std::getline(in, line)) throw ParseError("line 1: empty window table", 1);
  ++lineno;
  strip(line);
  if (line != kWindowCsvHeader) {
    throw ParseError("line 1: expected header '" + std::string(kWindowCsvHeader) + "'", 1);
  }
  std::vector<WindowRow> rows;
  while (std::getline(in, line)) {
    ++lineno;
    strip(line);
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(row, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0') {
        throw ParseError("line " + std::to_string(lineno) + ": bad number '" + cell + "'", lineno);
      }
      values.push_back(v);
    }
    if (values.size() != 3) {
      throw ParseError("line " + std::to_string(lineno) + ": expected 3 fields", lineno);
    }
    rows.push_back({values[0], values[1], values[2]});
  }
  try {
    return WindowTable(std::move(rows));
  } catch (const ArgumentError& e) {
    throw ParseError(std::string("window table: ") + e.what(), lineno);
  }
}

DeclusterResult decluster(const Catalog& catalog, const WindowTable& windows, HoleMode mode) {
  const std::size_t n = catalog.size();
  const Duration reach = days_to_duration(windows.max_time_days());
  std::vector<bool> deleted(n, false);

  // Events are time-sorted, so every hole that can cover event k comes from
  // an event i < k within the longest window.
  std::size_t first = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto mk = catalog.magnitude(k);
    if (!mk) continue;
    const Event& ek = catalog[k];
    while (first < k && catalog[first].time < ek.time - reach) ++first;
    for (std::size_t i = first; i < k; ++i) {
      if (mode == HoleMode::RetainedOnly && deleted[i]) continue;
      const auto mi = catalog.magnitude(i);
      if (!mi || !(*mi > *mk)) continue;
      const Event& ei = catalog[i];
      const WindowRow& w = windows.lookup(*mi);
      if (!(ei.time < ek.time && ek.time <= ei.time + days_to_duration(w.time_days))) continue;
      if (great_circle_km(ei.epicenter, ek.epicenter) <= w.distance_km) {
        deleted[k] = true;
        break;
      }
    }
  }

  DeclusterResult result;
  result.mode = mode;
  std::vector<Event> kept;
  for (std::size_t k = 0; k < n; ++k) {
    if (deleted[k]) {
      result.deleted_indices.push_back(k);
    } else {
      kept.push_back(catalog[k]);
    }
  }
  result.retained = Catalog(std::move(kept), catalog.span(), catalog.magnitude_selector());
  return result;
}

DeclusterStats decluster_stats(const Catalog& before, const Catalog& after) {
  std::vector<bool> used(before.size(), false);
  for (const Event& e : after) {
    // Both catalogs are time-sorted; scan the block of equal times.
    auto it = std::lower_bound(before.begin(), before.end(), e.time,
                               [](const Event& x, Instant t) { return x.time < t; });
    bool matched = false;
    for (; it != before.end() && it->time == e.time; ++it) {
      const auto idx = static_cast<std::size_t>(it - before.begin());
      if (!used[idx] && *it == e) {
        used[idx] = true;
        matched = true;
        break;
      }
    }
    if (!matched) {
      throw ArgumentError("declustered catalog is not a subset of the original (event at " +
                          format_iso8601(e.time) + ")");
    }
  }
  DeclusterStats stats;
  stats.n_deleted = before.size() - after.size();
  stats.fraction_deleted =
      before.empty() ? 0.0
                     : static_cast<double>(stats.n_deleted) / static_cast<double>(before.size());
  return stats;
}

}  // namespace quakealarm
