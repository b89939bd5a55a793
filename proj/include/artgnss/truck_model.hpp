#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "artgnss/geodesy.hpp"

namespace artgnss {

/// Antenna layout on the two truck sections.
///
/// Front offsets are body-frame vectors from the front axle center (ground
/// level); rear offsets are body-frame vectors from the articulation joint.
/// Body x points forward along each section's longitudinal axis, z up.
/// Antennas 1,2 sit on the front section with 2 ahead of 1; antennas 3,4 sit
/// on the rear section with 4 ahead of 3.
struct AntennaGeometry {
  std::array<Eigen::Vector3d, 2> front_offsets{Eigen::Vector3d(-1.5, 0.0, 3.5), Eigen::Vector3d(1.5, 0.0, 3.5)};
  std::array<Eigen::Vector3d, 2> rear_offsets{Eigen::Vector3d(-4.5, 0.0, 3.5), Eigen::Vector3d(-1.5, 0.0, 3.5)};
  double front_axle_to_joint = 2.0;  // m
  double joint_to_rear_axle = 3.5;   // m

  double l12() const { return (front_offsets[1] - front_offsets[0]).norm(); }
  double l34() const { return (rear_offsets[1] - rear_offsets[0]).norm(); }

  /// Throws Error(InvalidArgument) when a pair is shorter than 0.5 m or the
  /// section lengths are not positive.
  void validate() const;
};

struct TruckState {
  double t = 0.0;
  EnuPoint front_ref_position;  // front axle center, ground level
  double front_heading = 0.0;   // deg, atan2(north, east) of the front section axis
  double rear_heading = 0.0;    // deg
  double articulated_angle = 0.0;  // deg, wrap(front - rear)
  double speed = 0.0;              // m/s at the front axle
  double front_yaw_rate = 0.0;     // deg/s
  double rear_yaw_rate = 0.0;      // deg/s
};

struct AntennaSet {
  std::size_t epoch = 0;
  std::array<Eigen::Vector3d, 4> positions{};  // ENU, antennas 1..4
};

/// Wraps to (-180, 180].
double wrap_deg(double angle) noexcept;
/// Wrap-aware a - b.
double angle_diff_deg(double a, double b) noexcept;

AntennaSet antenna_positions(const TruckState& state, const AntennaGeometry& geom, std::size_t epoch = 0);
/// Rigid-body velocities of antennas 1..4 (ENU, m/s).
std::array<Eigen::Vector3d, 4> antenna_velocities(const TruckState& state, const AntennaGeometry& geom);

/// Midpoint of antennas 1 and 2.
EnuPoint truck_position(const AntennaSet& a);

/// Front pair heading minus rear pair heading on the horizontal plane, wrapped.
/// Throws Error(DegenerateGeometry) when a pair's horizontal separation < 1e-6 m.
double articulated_angle(const AntennaSet& a);
double pair_heading_deg(const Eigen::Vector3d& from, const Eigen::Vector3d& to);

struct SteeringSegment {
  double duration = 0.0;       // s
  double target_angle = 0.0;   // deg articulation approached at up to slew_rate, then held
};

struct TrajectorySpec {
  EnuPoint start;                  // front axle center at t = 0
  double initial_heading = 0.0;    // deg, front section
  double initial_articulation = 0.0;  // deg
  double speed = 10.0 / 3.6;       // m/s
  double slew_rate = 10.0;         // deg/s
  double max_articulation = 45.0;  // deg
  std::vector<SteeringSegment> segments;

  double duration() const;
};

/// Kinematic center-articulated model sampled at rate_hz over the segments' total
/// duration (inclusive of both ends). Articulation moves between targets on
/// raised-cosine ramps peaking at slew_rate, so the yaw rate stays continuous;
/// headings and position integrate with RK4 sub-steps.
/// Throws Error(InvalidPath) for empty, non-finite or out-of-limit specs.
std::vector<TruckState> simulate_trajectory(const TrajectorySpec& spec, const AntennaGeometry& geom, double rate_hz);

}  // namespace artgnss
