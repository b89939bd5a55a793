#include "artgnss/geodesy.hpp"

#include <cmath>

namespace artgnss {

EcefPoint geodetic_to_ecef(const GeodeticPoint& p) {
  const double lat = p.latitude * kDegToRad;
  const double lon = p.longitude * kDegToRad;
  const double sin_lat = std::sin(lat);
  const double cos_lat = std::cos(lat);
  const double n = wgs84::kSemiMajorAxis / std::sqrt(1.0 - wgs84::kEccentricitySq * sin_lat * sin_lat);
  return {(n + p.height) * cos_lat * std::cos(lon),
          (n + p.height) * cos_lat * std::sin(lon),
          (n * (1.0 - wgs84::kEccentricitySq) + p.height) * sin_lat};
}

GeodeticPoint ecef_to_geodetic(const EcefPoint& p) {
  constexpr double a = wgs84::kSemiMajorAxis;
  constexpr double e2 = wgs84::kEccentricitySq;
  const double rho = std::hypot(p.x, p.y);
  double lat = std::atan2(p.z, rho * (1.0 - e2));
  double h = 0.0;
  for (int iter = 0; iter < 10; ++iter) {
    const double sin_lat = std::sin(lat);
    const double root = std::sqrt(1.0 - e2 * sin_lat * sin_lat);
    const double n = a / root;
    h = rho * std::cos(lat) + p.z * sin_lat - a * root;
    const double next = std::atan2(p.z, rho * (1.0 - e2 * n / (n + h)));
    const double delta = std::abs(next - lat);
    lat = next;
    if (delta < 1e-12) break;
  }
  const double sin_lat = std::sin(lat);
  h = rho * std::cos(lat) + p.z * sin_lat - a * std::sqrt(1.0 - e2 * sin_lat * sin_lat);
  return {lat * kRadToDeg, std::atan2(p.y, p.x) * kRadToDeg, h};
}

Eigen::Matrix3d enu_rotation(const GeodeticPoint& origin) {
  const double lat = origin.latitude * kDegToRad;
  const double lon = origin.longitude * kDegToRad;
  const double sl = std::sin(lat), cl = std::cos(lat);
  const double so = std::sin(lon), co = std::cos(lon);
  Eigen::Matrix3d r;
  r << -so, co, 0.0,
       -sl * co, -sl * so, cl,
       cl * co, cl * so, sl;
  return r;
}

EnuPoint ecef_to_enu(const EcefPoint& p, const GeodeticPoint& origin) {
  const Eigen::Vector3d d = p.vec() - geodetic_to_ecef(origin).vec();
  return EnuPoint::of(enu_rotation(origin) * d);
}

EcefPoint enu_to_ecef(const EnuPoint& p, const GeodeticPoint& origin) {
  return EcefPoint::of(geodetic_to_ecef(origin).vec() + enu_rotation(origin).transpose() * p.vec());
}

}  // namespace artgnss
