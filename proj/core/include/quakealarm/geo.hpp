#pragma once

#include <numbers>
#include <variant>

#include "quakealarm/rng.hpp"
#include "quakealarm/time.hpp"

namespace quakealarm {

/// IUGG mean Earth radius; the Earth is treated as a perfect sphere.
inline constexpr double kEarthRadiusKm = 6371.0088;

/// Surface point in degrees. Latitude lies in [-90, 90] and longitude is
/// normalized into [-180, 180).
class GeoPoint {
 public:
  GeoPoint() = default;
  /// Throws ArgumentError for a non-finite coordinate or |lat| > 90.
  GeoPoint(double lat_deg, double lon_deg);

  double lat() const { return lat_; }
  double lon() const { return lon_; }

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;

 private:
  double lat_ = 0.0;
  double lon_ = 0.0;
};

/// Great-circle distance on the sphere of radius kEarthRadiusKm (haversine).
double great_circle_km(const GeoPoint& a, const GeoPoint& b);

/// Area of a spherical cap of the given geodesic radius:
/// 2 pi R^2 (1 - cos(r / R)). Throws for radius outside [0, pi R].
double cap_area_km2(double radius_km);

double sphere_area_km2();

struct GlobalSphere {
  friend bool operator==(const GlobalSphere&, const GlobalSphere&) = default;
};

struct SphericalCap {
  GeoPoint center;
  double radius_km = 0.0;
  friend bool operator==(const SphericalCap&, const SphericalCap&) = default;
};

/// Latitude/longitude box, half-open in both coordinates
/// ([lat_min, lat_max) x [lon_min, lon_max)) except that lat_max = 90
/// includes the pole. Boxes do not wrap the antimeridian.
struct LatLonBox {
  double lat_min = -90.0;
  double lat_max = 90.0;
  double lon_min = -180.0;
  double lon_max = 180.0;
  friend bool operator==(const LatLonBox&, const LatLonBox&) = default;
};

using Region = std::variant<GlobalSphere, SphericalCap, LatLonBox>;

/// Throws ArgumentError if the descriptor is degenerate.
void validate(const Region& region);
bool contains(const Region& region, const GeoPoint& p);
double area_km2(const Region& region);
/// Area-uniform random point inside the region.
GeoPoint sample_uniform(const Region& region, Rng& rng);

bool contains(const LatLonBox& box, const GeoPoint& p);
double area_km2(const LatLonBox& box);
GeoPoint sample_uniform(const LatLonBox& box, Rng& rng);

/// Spatial region x time span; V = area x duration.
struct StudyVolume {
  Region region = GlobalSphere{};
  TimeInterval interval;

  double area_km2() const { return quakealarm::area_km2(region); }
  double duration_s() const { return interval.seconds(); }

  friend bool operator==(const StudyVolume&, const StudyVolume&) = default;
};

}  // namespace quakealarm
