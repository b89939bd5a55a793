#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "artgnss/geodesy.hpp"

namespace artgnss {

enum class GnssSystem : std::uint8_t { GPS, BeiDou, Galileo, QZSS };

/// RINEX-style system letter: G, C, E, J.
char system_code(GnssSystem s) noexcept;
GnssSystem system_from_code(char c);

struct SatelliteId {
  GnssSystem system = GnssSystem::GPS;
  int index = 1;

  auto operator<=>(const SatelliteId&) const = default;
  /// "G07", "J02", ...
  std::string str() const;
};

SatelliteId parse_satellite_id(const std::string& text);

inline constexpr double kEarthGm = 3.986004418e14;  // m^3/s^2

/// Circular orbit. Angles in degrees; angular_rate in rad/s follows from the
/// semi-major axis by Kepler's third law (see kepler_rate).
struct OrbitSpec {
  SatelliteId id;
  double semi_major_axis = 0.0;
  double inclination = 0.0;
  double raan = 0.0;
  double phase_at_t0 = 0.0;
  double angular_rate = 0.0;
};

double kepler_rate(double semi_major_axis) noexcept;

struct SatelliteState {
  SatelliteId id;
  EcefPoint position;
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
};

struct ConstellationCounts {
  int gps = 0;
  int beidou = 0;
  int galileo = 0;
  int qzss = 0;

  /// Tuned for the default scenario site (see data/default_scenario.yaml).
  static ConstellationCounts defaults() noexcept;
};

/// Deterministic synthetic constellation. MEO systems get evenly spread
/// planes with seeded jitter; QZSS slots are placed over East Asia.
std::vector<OrbitSpec> build_constellation(std::uint64_t seed,
                                           const ConstellationCounts& counts = ConstellationCounts::defaults());

/// Inertial-approximation propagation: Earth rotation is ignored over
/// scenario lengths of a few minutes.
SatelliteState satellite_state_at(const OrbitSpec& orbit, double t);

struct LookAngles {
  double elevation = 0.0;  // degrees
  double azimuth = 0.0;    // degrees in [0, 360)
};

LookAngles elevation_azimuth(const SatelliteState& sat, const EcefPoint& receiver, const GeodeticPoint& origin);

struct VisibleSatellite {
  SatelliteId id;
  double elevation = 0.0;
  double azimuth = 0.0;
  SatelliteState state;
};

/// Visible satellites sorted by id.
using SkyView = std::vector<VisibleSatellite>;

/// Satellites strictly above `mask_deg` as seen from `receiver`.
SkyView visible_sky(std::span<const OrbitSpec> constellation, double t, const EcefPoint& receiver,
                    const GeodeticPoint& origin, double mask_deg);

/// Time average of the visible count at the origin over [0, duration] sampled at rate_hz.
double average_visible_count(std::span<const OrbitSpec> constellation, const GeodeticPoint& origin,
                             double duration, double rate_hz, double mask_deg);

/// Satellite states in the local ENU frame of a fixed origin. This is the
/// estimator's view of "broadcast orbits".
class Ephemeris {
 public:
  struct LocalState {
    Eigen::Vector3d position;
    Eigen::Vector3d velocity;
  };

  Ephemeris(std::vector<OrbitSpec> orbits, GeodeticPoint origin);

  /// Throws Error(InvalidArgument) for satellites not in the constellation.
  LocalState state(const SatelliteId& id, double t) const;
  LocalState state(const OrbitSpec& orbit, double t) const;
  const OrbitSpec& orbit(const SatelliteId& id) const;

  const GeodeticPoint& origin() const noexcept { return origin_; }
  std::span<const OrbitSpec> orbits() const noexcept { return orbits_; }

 private:
  std::vector<OrbitSpec> orbits_;  // sorted by id
  GeodeticPoint origin_;
  Eigen::Vector3d origin_ecef_;
  Eigen::Matrix3d rotation_;
};

}  // namespace artgnss
