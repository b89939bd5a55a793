#include "artgnss/sky_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "artgnss/error.hpp"
#include "artgnss/random.hpp"

namespace artgnss {

char system_code(GnssSystem s) noexcept {
  switch (s) {
    case GnssSystem::GPS: return 'G';
    case GnssSystem::BeiDou: return 'C';
    case GnssSystem::Galileo: return 'E';
    case GnssSystem::QZSS: return 'J';
  }
  return '?';
}

GnssSystem system_from_code(char c) {
  switch (c) {
    case 'G': return GnssSystem::GPS;
    case 'C': return GnssSystem::BeiDou;
    case 'E': return GnssSystem::Galileo;
    case 'J':
    case 'Q': return GnssSystem::QZSS;
    default: break;
  }
  throw Error(ErrorCode::InvalidArgument, std::string("unknown satellite system code '") + c + "'");
}

std::string SatelliteId::str() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%c%02d", system_code(system), index);
  return buf;
}

SatelliteId parse_satellite_id(const std::string& text) {
  if (text.size() < 2) throw Error(ErrorCode::InvalidArgument, "bad satellite id '" + text + "'");
  SatelliteId id;
  id.system = system_from_code(text[0]);
  try {
    id.index = std::stoi(text.substr(1));
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "bad satellite id '" + text + "'");
  }
  if (id.index < 1) throw Error(ErrorCode::InvalidArgument, "bad satellite id '" + text + "'");
  return id;
}

double kepler_rate(double semi_major_axis) noexcept {
  return std::sqrt(kEarthGm / (semi_major_axis * semi_major_axis * semi_major_axis));
}

ConstellationCounts ConstellationCounts::defaults() noexcept { return {18, 27, 21, 5}; }

namespace {

struct MeoLayout {
  GnssSystem system;
  double radius;
  double inclination;
  int planes;
};

double jitter(std::uint64_t seed, std::uint64_t salt, std::uint64_t a, std::uint64_t b, double half_width) {
  return (2.0 * rng::uniform(rng::hash({seed, salt, a, b})) - 1.0) * half_width;
}

void append_meo(std::vector<OrbitSpec>& out, std::uint64_t seed, const MeoLayout& layout, int count) {
  if (count <= 0) return;
  const auto sys = static_cast<std::uint64_t>(layout.system);
  const double raan0 = 360.0 * rng::uniform(rng::hash({seed, sys, 11}));
  const double phase0 = 360.0 * rng::uniform(rng::hash({seed, sys, 12}));
  const int per_plane = (count + layout.planes - 1) / layout.planes;
  for (int k = 0; k < count; ++k) {
    const int plane = k % layout.planes;
    const int slot = k / layout.planes;
    OrbitSpec o;
    o.id = {layout.system, k + 1};
    o.semi_major_axis = layout.radius;
    o.inclination = layout.inclination;
    o.raan = std::fmod(raan0 + 360.0 * plane / layout.planes + jitter(seed, sys, 21, k, 5.0), 360.0);
    o.phase_at_t0 = std::fmod(phase0 + 360.0 * slot / per_plane + 360.0 * plane / (layout.planes * per_plane) +
                                  jitter(seed, sys, 22, k, 12.0) + 360.0,
                              360.0);
    o.angular_rate = kepler_rate(o.semi_major_axis);
    out.push_back(o);
  }
}

}  // namespace

std::vector<OrbitSpec> build_constellation(std::uint64_t seed, const ConstellationCounts& counts) {
  std::vector<OrbitSpec> out;
  append_meo(out, seed, {GnssSystem::GPS, 26'560e3, 55.0, 6}, counts.gps);
  append_meo(out, seed, {GnssSystem::BeiDou, 27'900e3, 55.0, 3}, counts.beidou);
  append_meo(out, seed, {GnssSystem::Galileo, 29'600e3, 56.0, 3}, counts.galileo);

  // QZSS: circular geosynchronous-radius slots whose sub-satellite point at
  // t0 lies over the western Pacific around Japan (lat 15..42 N, lon 115..165 E);
  // the latitude stays below the inclination so the slot is on the orbit.
  const auto qsys = static_cast<std::uint64_t>(GnssSystem::QZSS);
  for (int k = 0; k < std::max(counts.qzss, 0); ++k) {
    constexpr double inc = 43.0;
    const double lat = 15.0 + 27.0 * rng::uniform(rng::hash({seed, qsys, 31, static_cast<std::uint64_t>(k)}));
    const double lon = 115.0 + 50.0 * rng::uniform(rng::hash({seed, qsys, 32, static_cast<std::uint64_t>(k)}));
    // Point on the orbit with argument of latitude u: sin(lat) = sin(inc) sin(u).
    const double u = std::asin(std::sin(lat * kDegToRad) / std::sin(inc * kDegToRad));
    const double lon_offset = std::atan2(std::cos(inc * kDegToRad) * std::sin(u), std::cos(u));
    OrbitSpec o;
    o.id = {GnssSystem::QZSS, k + 1};
    o.semi_major_axis = 42'164e3;
    o.inclination = inc;
    o.raan = std::fmod(lon - lon_offset * kRadToDeg + 360.0, 360.0);
    o.phase_at_t0 = u * kRadToDeg;
    o.angular_rate = kepler_rate(o.semi_major_axis);
    out.push_back(o);
  }
  return out;
}

SatelliteState satellite_state_at(const OrbitSpec& orbit, double t) {
  const double raan = orbit.raan * kDegToRad;
  const double inc = orbit.inclination * kDegToRad;
  const double u = orbit.phase_at_t0 * kDegToRad + orbit.angular_rate * t;
  const Eigen::Vector3d p(std::cos(raan), std::sin(raan), 0.0);
  const Eigen::Vector3d q(-std::cos(inc) * std::sin(raan), std::cos(inc) * std::cos(raan), std::sin(inc));
  const double a = orbit.semi_major_axis;
  SatelliteState s;
  s.id = orbit.id;
  s.position = EcefPoint::of(a * (std::cos(u) * p + std::sin(u) * q));
  s.velocity = a * orbit.angular_rate * (-std::sin(u) * p + std::cos(u) * q);
  return s;
}

LookAngles elevation_azimuth(const SatelliteState& sat, const EcefPoint& receiver, const GeodeticPoint& origin) {
  const Eigen::Vector3d los = enu_rotation(origin) * (sat.position.vec() - receiver.vec());
  LookAngles out;
  out.elevation = std::atan2(los.z(), std::hypot(los.x(), los.y())) * kRadToDeg;
  double az = std::atan2(los.x(), los.y()) * kRadToDeg;
  if (az < 0.0) az += 360.0;
  if (az >= 360.0) az -= 360.0;
  out.azimuth = az;
  return out;
}

SkyView visible_sky(std::span<const OrbitSpec> constellation, double t, const EcefPoint& receiver,
                    const GeodeticPoint& origin, double mask_deg) {
  if (!(mask_deg >= 0.0 && mask_deg < 90.0)) throw Error(ErrorCode::InvalidArgument, "mask must be in [0, 90)");
  SkyView view;
  for (const OrbitSpec& orbit : constellation) {
    SatelliteState state = satellite_state_at(orbit, t);
    const LookAngles look = elevation_azimuth(state, receiver, origin);
    if (look.elevation > mask_deg) view.push_back({orbit.id, look.elevation, look.azimuth, state});
  }
  std::sort(view.begin(), view.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return view;
}

double average_visible_count(std::span<const OrbitSpec> constellation, const GeodeticPoint& origin, double duration,
                             double rate_hz, double mask_deg) {
  const EcefPoint site = geodetic_to_ecef(origin);
  const auto epochs = static_cast<long>(std::floor(duration * rate_hz + 1e-9)) + 1;
  double total = 0.0;
  for (long k = 0; k < epochs; ++k) {
    total += static_cast<double>(visible_sky(constellation, static_cast<double>(k) / rate_hz, site, origin, mask_deg).size());
  }
  return total / static_cast<double>(epochs);
}

Ephemeris::Ephemeris(std::vector<OrbitSpec> orbits, GeodeticPoint origin)
    : orbits_(std::move(orbits)),
      origin_(origin),
      origin_ecef_(geodetic_to_ecef(origin).vec()),
      rotation_(enu_rotation(origin)) {
  std::sort(orbits_.begin(), orbits_.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
}

const OrbitSpec& Ephemeris::orbit(const SatelliteId& id) const {
  auto it = std::lower_bound(orbits_.begin(), orbits_.end(), id,
                             [](const OrbitSpec& o, const SatelliteId& key) { return o.id < key; });
  if (it == orbits_.end() || it->id != id) throw Error(ErrorCode::InvalidArgument, "no orbit for " + id.str());
  return *it;
}

Ephemeris::LocalState Ephemeris::state(const OrbitSpec& orbit, double t) const {
  const SatelliteState s = satellite_state_at(orbit, t);
  return {rotation_ * (s.position.vec() - origin_ecef_), rotation_ * s.velocity};
}

Ephemeris::LocalState Ephemeris::state(const SatelliteId& id, double t) const { return state(orbit(id), t); }

}  // namespace artgnss
