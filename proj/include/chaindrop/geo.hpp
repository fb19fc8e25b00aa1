#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace chaindrop {

// Fixed-point micro-degree coordinates. Blocks and scenario files only ever
// see integers; floating point stays inside the distance computation.
struct GeoPoint {
  int64_t lat_e6 = 0;
  int64_t lon_e6 = 0;

  bool operator==(const GeoPoint&) const = default;
};

inline constexpr int64_t kLatE6Max = 90'000'000;
inline constexpr int64_t kLonE6Max = 180'000'000;
inline constexpr double kEarthRadiusM = 6'371'000.0;

inline bool geo_in_bounds(const GeoPoint& p) {
  return p.lat_e6 >= -kLatE6Max && p.lat_e6 <= kLatE6Max &&
         p.lon_e6 >= -kLonE6Max && p.lon_e6 <= kLonE6Max;
}

// Great-circle distance on a sphere of radius 6,371,000 m, rounded to the
// nearest integer meter.
inline int64_t haversine_distance(const GeoPoint& a, const GeoPoint& b) {
  constexpr double kDegToRad = M_PI / 180.0 / 1e6;
  const double lat1 = static_cast<double>(a.lat_e6) * kDegToRad;
  const double lat2 = static_cast<double>(b.lat_e6) * kDegToRad;
  const double dlat = lat2 - lat1;
  const double dlon = static_cast<double>(b.lon_e6 - a.lon_e6) * kDegToRad;
  const double s1 = std::sin(dlat / 2.0);
  const double s2 = std::sin(dlon / 2.0);
  const double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
  const double d = 2.0 * kEarthRadiusM * std::asin(std::sqrt(h));
  return static_cast<int64_t>(std::llround(d));
}

}  // namespace chaindrop
