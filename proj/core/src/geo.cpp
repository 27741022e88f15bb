#include "quakealarm/geo.hpp"

#include <algorithm>
#include <cmath>

#include "quakealarm/errors.hpp"

namespace quakealarm {

namespace {

constexpr double kPi = std::numbers::pi;

double to_rad(double deg) { return deg * kPi / 180.0; }
double to_deg(double rad) { return rad * 180.0 / kPi; }

double normalize_lon(double lon) {
  if (lon >= -180.0 && lon < 180.0) return lon;
  double x = std::fmod(lon + 180.0, 360.0);
  if (x < 0) x += 360.0;
  x -= 180.0;
  // fmod can round 180 - eps up to exactly 180.
  return x >= 180.0 ? -180.0 : x;
}

// Sampling in sin(latitude) makes the draw area-uniform.
GeoPoint sample_band(double lat_min, double lat_max, double lon_min,
                     double lon_max, Rng& rng) {
  const double z0 = std::sin(to_rad(lat_min));
  const double z1 = std::sin(to_rad(lat_max));
  const double z = rng.uniform(z0, z1);
  const double lat = to_deg(std::asin(std::clamp(z, -1.0, 1.0)));
  const double lon = rng.uniform(lon_min, lon_max);
  return GeoPoint(lat, lon);
}

}  // namespace

GeoPoint::GeoPoint(double lat_deg, double lon_deg) {
  if (!std::isfinite(lat_deg) || !std::isfinite(lon_deg)) {
    throw ArgumentError("non-finite coordinate");
  }
  if (lat_deg < -90.0 || lat_deg > 90.0) {
    throw ArgumentError("latitude out of range [-90, 90]");
  }
  lat_ = lat_deg;
  lon_ = normalize_lon(lon_deg);
}

double great_circle_km(const GeoPoint& a, const GeoPoint& b) {
  const double phi1 = to_rad(a.lat());
  const double phi2 = to_rad(b.lat());
  const double dphi = phi2 - phi1;
  const double dlambda = to_rad(b.lon() - a.lon());
  const double s1 = std::sin(dphi / 2);
  const double s2 = std::sin(dlambda / 2);
  const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

double cap_area_km2(double radius_km) {
  if (!(radius_km >= 0.0) || radius_km > kPi * kEarthRadiusKm * (1 + 1e-12)) {
    throw ArgumentError("cap radius must lie in [0, pi R_E]");
  }
  const double theta = std::min(radius_km / kEarthRadiusKm, kPi);
  // 1 - cos(x) = 2 sin^2(x/2) avoids cancellation for small caps.
  const double s = std::sin(theta / 2);
  return 2.0 * kPi * kEarthRadiusKm * kEarthRadiusKm * 2.0 * s * s;
}

double sphere_area_km2() { return 4.0 * kPi * kEarthRadiusKm * kEarthRadiusKm; }

bool contains(const LatLonBox& box, const GeoPoint& p) {
  const bool lat_ok = p.lat() >= box.lat_min &&
                      (p.lat() < box.lat_max ||
                       (box.lat_max >= 90.0 && p.lat() <= 90.0));
  const bool lon_ok = p.lon() >= box.lon_min && p.lon() < box.lon_max;
  return lat_ok && lon_ok;
}

double area_km2(const LatLonBox& box) {
  const double dz = std::sin(to_rad(box.lat_max)) - std::sin(to_rad(box.lat_min));
  const double dlon = to_rad(box.lon_max - box.lon_min);
  return kEarthRadiusKm * kEarthRadiusKm * dz * dlon;
}

GeoPoint sample_uniform(const LatLonBox& box, Rng& rng) {
  return sample_band(box.lat_min, box.lat_max, box.lon_min, box.lon_max, rng);
}

void validate(const Region& region) {
  struct Visitor {
    void operator()(const GlobalSphere&) const {}
    void operator()(const SphericalCap& cap) const {
      if (!(cap.radius_km > 0.0) || cap.radius_km > kPi * kEarthRadiusKm) {
        throw ArgumentError("spherical-cap region radius must lie in (0, pi R_E]");
      }
    }
    void operator()(const LatLonBox& box) const {
      if (!(box.lat_min >= -90.0 && box.lat_min < box.lat_max &&
            box.lat_max <= 90.0 && box.lon_min >= -180.0 &&
            box.lon_min < box.lon_max && box.lon_max <= 180.0)) {
        throw ArgumentError("degenerate lat/lon box");
      }
    }
  };
  std::visit(Visitor{}, region);
}

bool contains(const Region& region, const GeoPoint& p) {
  struct Visitor {
    const GeoPoint& p;
    bool operator()(const GlobalSphere&) const { return true; }
    bool operator()(const SphericalCap& cap) const {
      return great_circle_km(cap.center, p) <= cap.radius_km;
    }
    bool operator()(const LatLonBox& box) const { return contains(box, p); }
  };
  return std::visit(Visitor{p}, region);
}

double area_km2(const Region& region) {
  struct Visitor {
    double operator()(const GlobalSphere&) const { return sphere_area_km2(); }
    double operator()(const SphericalCap& cap) const {
      return cap_area_km2(cap.radius_km);
    }
    double operator()(const LatLonBox& box) const { return area_km2(box); }
  };
  return std::visit(Visitor{}, region);
}

GeoPoint sample_uniform(const Region& region, Rng& rng) {
  struct Visitor {
    Rng& rng;
    GeoPoint operator()(const GlobalSphere&) const {
      return sample_band(-90.0, 90.0, -180.0, 180.0, rng);
    }
    GeoPoint operator()(const SphericalCap& cap) const {
      // Uniform in the cap: the polar angle has cos uniform on [cos r, 1].
      const double theta_max = cap.radius_km / kEarthRadiusKm;
      const double cos_t = rng.uniform(std::cos(theta_max), 1.0);
      const double theta = std::acos(std::clamp(cos_t, -1.0, 1.0));
      const double bearing = rng.uniform(0.0, 2.0 * kPi);
      const double phi1 = to_rad(cap.center.lat());
      const double lam1 = to_rad(cap.center.lon());
      const double sin_phi2 = std::sin(phi1) * std::cos(theta) +
                              std::cos(phi1) * std::sin(theta) * std::cos(bearing);
      const double phi2 = std::asin(std::clamp(sin_phi2, -1.0, 1.0));
      const double lam2 =
          lam1 + std::atan2(std::sin(bearing) * std::sin(theta) * std::cos(phi1),
                            std::cos(theta) - std::sin(phi1) * sin_phi2);
      return GeoPoint(to_deg(phi2), to_deg(lam2));
    }
    GeoPoint operator()(const LatLonBox& box) const {
      return sample_uniform(box, rng);
    }
  };
  return std::visit(Visitor{rng}, region);
}

}  // namespace quakealarm
