#pragma once

#include <Eigen/Core>

namespace artgnss {

namespace wgs84 {
inline constexpr double kSemiMajorAxis = 6378137.0;
inline constexpr double kFlattening = 1.0 / 298.257223563;
inline constexpr double kSemiMinorAxis = kSemiMajorAxis * (1.0 - kFlattening);
inline constexpr double kEccentricitySq = kFlattening * (2.0 - kFlattening);
}  // namespace wgs84

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDegToRad = kPi / 180.0;
inline constexpr double kRadToDeg = 180.0 / kPi;

/// Earth-centered Earth-fixed coordinates, meters.
struct EcefPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Eigen::Vector3d vec() const { return {x, y, z}; }
  static EcefPoint of(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }
};

/// Local east-north-up coordinates, meters. The anchoring origin travels
/// separately (scenario site / Ephemeris::origin()).
struct EnuPoint {
  double e = 0.0;
  double n = 0.0;
  double u = 0.0;

  Eigen::Vector3d vec() const { return {e, n, u}; }
  static EnuPoint of(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }
};

/// Geodetic latitude/longitude in degrees, ellipsoidal height in meters.
struct GeodeticPoint {
  double latitude = 0.0;
  double longitude = 0.0;
  double height = 0.0;
};

EcefPoint geodetic_to_ecef(const GeodeticPoint& p);

/// Fixed-point inverse: at most 10 iterations, stops when the latitude update
/// drops below 1e-12 rad.
GeodeticPoint ecef_to_geodetic(const EcefPoint& p);

/// Rows are the east, north and up unit vectors at `origin`, expressed in ECEF.
Eigen::Matrix3d enu_rotation(const GeodeticPoint& origin);

EnuPoint ecef_to_enu(const EcefPoint& p, const GeodeticPoint& origin);
EcefPoint enu_to_ecef(const EnuPoint& p, const GeodeticPoint& origin);

}  // namespace artgnss
