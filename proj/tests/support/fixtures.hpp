#pragma once

// Test-only builders and brute-force oracles. Nothing here calls the library
// routines it is used to check (AlarmLookup, PermutationScorer, decluster).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "quakealarm/alarm.hpp"
#include "quakealarm/catalog.hpp"
#include "quakealarm/rng.hpp"

namespace quakealarm::testing {

inline Event make_event(double lat, double lon, Instant t, std::optional<double> mb,
                        std::string id = "", std::optional<double> ms = std::nullopt) {
  Event e;
  e.time = t;
  e.epicenter = GeoPoint(lat, lon);
  e.depth_km = 10.0;
  e.mb = mb;
  e.ms = ms;
  e.source_id = std::move(id);
  return e;
}

inline Instant day(int y, unsigned m, unsigned d, int h = 0) { return make_instant(y, m, d, h); }

/// Point at `km` along bearing `bearing_deg` from (lat, lon), on the sphere.
inline GeoPoint offset_point(double lat, double lon, double km, double bearing_deg) {
  const double pi = std::numbers::pi;
  const double d = km / kEarthRadiusKm;
  const double b = bearing_deg * pi / 180.0;
  const double p1 = lat * pi / 180.0;
  const double l1 = lon * pi / 180.0;
  const double p2 = std::asin(std::sin(p1) * std::cos(d) + std::cos(p1) * std::sin(d) * std::cos(b));
  const double l2 = l1 + std::atan2(std::sin(b) * std::sin(d) * std::cos(p1),
                                    std::cos(d) - std::sin(p1) * std::sin(p2));
  return GeoPoint(p2 * 180.0 / pi, l2 * 180.0 / pi);
}

/// Chord-based distance through unit vectors; independent of the haversine
/// route in the library.
inline double vector_distance_km(const GeoPoint& a, const GeoPoint& b) {
  const double pi = std::numbers::pi;
  auto unit = [pi](const GeoPoint& p) {
    const double la = p.lat() * pi / 180.0, lo = p.lon() * pi / 180.0;
    return std::array<double, 3>{std::cos(la) * std::cos(lo), std::cos(la) * std::sin(lo),
                                 std::sin(la)};
  };
  const auto u = unit(a), v = unit(b);
  const double cx = u[1] * v[2] - u[2] * v[1];
  const double cy = u[2] * v[0] - u[0] * v[2];
  const double cz = u[0] * v[1] - u[1] * v[0];
  const double dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
  return kEarthRadiusKm * std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), dot);
}

/// Naive membership rule: scan every alarm, no index.
inline bool naive_is_predicted(const GeoPoint& p, Instant t, double mag,
                               std::optional<std::size_t> self, const AlarmSet& alarms) {
  bool covered = false;
  double max_floor = -1e300;
  for (const Alarm& a : alarms) {
    if (self && a.trigger_index == self) continue;
    if (!(a.t_start < t && t <= a.t_end)) continue;
    if (vector_distance_km(a.center, p) > a.radius_km) continue;
    covered = true;
    max_floor = std::max(max_floor, a.mag_floor);
  }
  return covered && mag >= max_floor;
}

/// Number of predicted events when event k is given time times[k].
inline std::size_t naive_count(const Catalog& c, const std::vector<Instant>& times,
                               const AlarmSet& alarms) {
  std::size_t n = 0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const auto m = c.magnitude(k);
    if (m && naive_is_predicted(c[k].epicenter, times[k], *m, k, alarms)) ++n;
  }
  return n;
}

/// The eligibility predicate stated in words: inside some alarm, and no
/// strictly larger event within radius in the preceding window.
inline bool eligibility_predicate(const Catalog& c, std::size_t k, double threshold,
                                  double window_days, double radius_km) {
  const auto mk = c.magnitude(k);
  if (!mk || *mk < threshold) return false;
  const Duration window = days_to_duration(window_days);
  bool inside = false;
  bool larger_before = false;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i == k) continue;
    const auto mi = c.magnitude(i);
    if (!mi) continue;
    const bool before = c[i].time < c[k].time && c[k].time - c[i].time <= window;
    if (!before) continue;
    if (vector_distance_km(c[i].epicenter, c[k].epicenter) > radius_km) continue;
    if (*mi >= threshold) inside = true;
    if (*mi > *mk) larger_before = true;
  }
  return inside && !larger_before;
}

/// Exact permutation p-value by brute force over std::next_permutation,
/// counting with naive_count.
inline double brute_force_permutation_p(const Catalog& c, const AlarmSet& alarms) {
  std::vector<Instant> times;
  for (const auto& e : c) times.push_back(e.time);
  const std::size_t observed = naive_count(c, times, alarms);
  std::vector<std::size_t> perm(c.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::size_t total = 0, geq = 0;
  std::vector<Instant> permuted(c.size());
  do {
    for (std::size_t k = 0; k < perm.size(); ++k) permuted[k] = times[perm[k]];
    ++total;
    if (naive_count(c, permuted, alarms) >= observed) ++geq;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(geq) / static_cast<double>(total);
}

/// Mainshock/aftershock catalog: `n_main` mainshocks at uniform times and
/// places within `lat_band` of the equator, each followed by a Poisson
/// number of smaller or larger events within `cluster_km` and
/// `cluster_days`. Magnitudes are Gutenberg-Richter (b = 1) above `m_min`.
struct ClusterSpec {
  std::size_t n_main = 60;
  double m_min = 5.5;
  double mean_children = 1.5;
  double cluster_km = 40.0;
  double cluster_days = 15.0;
  double lat_band = 60.0;
  /// Number of distinct hotspot centres mainshocks are drawn near (0 = none).
  std::size_t hotspots = 0;
};

inline double gr_magnitude(Rng& rng, double m_min) {
  const double m = m_min - std::log10(1.0 - rng.uniform01());
  return std::min(9.5, std::round(m * 10.0) / 10.0);
}

inline Catalog clustered_catalog(Rng& rng, const TimeInterval& span, const ClusterSpec& spec = {}) {
  std::vector<GeoPoint> hot;
  for (std::size_t h = 0; h < spec.hotspots; ++h) {
    hot.emplace_back(rng.uniform(-spec.lat_band, spec.lat_band), rng.uniform(-180.0, 180.0));
  }
  std::vector<Event> events;
  const double span_s = span.seconds();
  for (std::size_t i = 0; i < spec.n_main; ++i) {
    GeoPoint centre;
    if (hot.empty()) {
      centre = GeoPoint(rng.uniform(-spec.lat_band, spec.lat_band), rng.uniform(-180.0, 180.0));
    } else {
      const GeoPoint& h = hot[rng.uniform_index(hot.size())];
      centre = offset_point(h.lat(), h.lon(), rng.uniform(0.0, 60.0), rng.uniform(0.0, 360.0));
    }
    const Instant t0 = span.start + seconds_to_duration(rng.uniform01() * span_s);
    events.push_back(make_event(centre.lat(), centre.lon(), t0, gr_magnitude(rng, spec.m_min),
                                "m" + std::to_string(i)));
    const double u = rng.uniform01();
    std::size_t children = 0;
    double acc = std::exp(-spec.mean_children), cdf = acc;
    while (u > cdf && children < 20) {
      ++children;
      acc *= spec.mean_children / static_cast<double>(children);
      cdf += acc;
    }
    for (std::size_t c = 0; c < children; ++c) {
      const GeoPoint p = offset_point(centre.lat(), centre.lon(), rng.uniform(0.0, spec.cluster_km),
                                      rng.uniform(0.0, 360.0));
      const Instant t = t0 + seconds_to_duration(rng.uniform(1.0, spec.cluster_days * 86400.0));
      if (t >= span.end) continue;
      events.push_back(make_event(p.lat(), p.lon(), t, gr_magnitude(rng, spec.m_min),
                                  "a" + std::to_string(i) + "." + std::to_string(c)));
    }
  }
  return Catalog(std::move(events), StudyVolume{GlobalSphere{}, span});
}

inline TimeInterval year_2004() { return {day(2004, 1, 1), day(2005, 1, 1)}; }
inline TimeInterval years_2000_2004() { return {day(2000, 1, 1), day(2005, 1, 1)}; }

}  // namespace quakealarm::testing
