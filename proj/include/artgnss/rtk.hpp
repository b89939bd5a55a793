#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "artgnss/obs_sim.hpp"
#include "artgnss/sky_sim.hpp"

namespace artgnss {

struct RtkSettings {
  double ratio_threshold = 3.0;
  double phase_sigma = 0.005;    // m, zenith, per undifferenced phase
  double code_sigma = 0.5;       // m, zenith, per undifferenced pseudorange
  double doppler_sigma = 0.05;   // m/s, per range rate, equal weight
  int max_iterations = 20;
  double convergence = 1e-4;     // m, baseline update norm
  double max_condition = 1e12;
};

/// Double difference (rover - base) x (sat - ref) of one satellite pair.
struct DdObservation {
  SatelliteId ref;
  SatelliteId sat;
  int rover = 0;
  int base = 0;
  double dd_phase = 0.0;        // m
  double dd_pseudorange = 0.0;  // m
  double wavelength = 0.0;      // m
  double ref_elevation = 0.0;   // deg
  double sat_elevation = 0.0;   // deg
};

/// Differences are formed only within one constellation; each system's
/// reference is its highest-elevation common satellite. Output ordered by
/// system, then satellite. Throws Error(InsufficientSatellites) when no system
/// has two common satellites.
std::vector<DdObservation> form_double_differences(std::span<const GnssObservation> rover_obs,
                                                   std::span<const GnssObservation> base_obs);

struct FloatSolution {
  Eigen::Vector3d baseline = Eigen::Vector3d::Zero();  // rover - base, ENU m
  Eigen::VectorXd float_ambiguities;                   // DD cycles, same order as the DDs
  Eigen::MatrixXd covariance;                          // over (baseline, ambiguities)
  int iterations = 0;
};

/// Iterated weighted least squares on DD phase and DD pseudorange.
/// Throws Error(InsufficientSatellites) for fewer than 4 DDs,
/// Error(SingularGeometry) when the normal matrix condition exceeds the cap,
/// Error(NoConvergence) after max_iterations.
FloatSolution float_solution(std::span<const DdObservation> dds, const Ephemeris& eph, double t,
                             const Eigen::Vector3d& rover_approx, const Eigen::Vector3d& base_pos,
                             const RtkSettings& settings = {});

enum class FixStatus { None, Float, Fix };
const char* to_string(FixStatus s) noexcept;
char status_code(FixStatus s) noexcept;  // 'X' fix, 'F' float, 'N' none

struct RtkSolution {
  Eigen::Vector3d baseline = Eigen::Vector3d::Zero();  // rover - base, ENU m
  FixStatus status = FixStatus::None;
  double ratio = 0.0;
  Eigen::VectorXi fixed_ambiguities;                    // set when Fix
  std::vector<std::pair<SatelliteId, SatelliteId>> dd_pairs;  // (ref, sat) per ambiguity
  int n_sats = 0;
  std::string diagnostic;
};

/// Float stage, integer search, ratio test, then a phase-only fixed re-solve.
/// Never throws for estimation failures: they come back as status None with
/// a diagnostic.
RtkSolution rtk_solve(std::span<const GnssObservation> rover_obs, std::span<const GnssObservation> base_obs,
                      const Eigen::Vector3d& rover_approx, const Eigen::Vector3d& base_pos, const Ephemeris& eph,
                      const RtkSettings& settings = {});

/// The same pipeline with antenna `a` as a moving base at its approximate
/// position. The baseline is X_b - X_a.
RtkSolution moving_base_solve(std::span<const GnssObservation> obs_a, std::span<const GnssObservation> obs_b,
                              const Eigen::Vector3d& approx_a, const Eigen::Vector3d& approx_b,
                              const Ephemeris& eph, const RtkSettings& settings = {});

/// All 4C2 antenna pairs, base antenna first.
inline constexpr std::array<std::pair<int, int>, 6> kAntennaPairs{
    {{1, 2}, {1, 3}, {1, 4}, {2, 3}, {2, 4}, {3, 4}}};

struct VelocitySolution {
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();  // ENU m/s
  double clock_drift = 0.0;                            // m/s
  int n_sats = 0;
};

/// Least squares over (velocity, clock drift) from one antenna's range rates.
/// Throws Error(InsufficientSatellites) below 4 satellites.
VelocitySolution doppler_velocity(std::span<const GnssObservation> obs, const Ephemeris& eph,
                                  const Eigen::Vector3d& approx, const RtkSettings& settings = {});

}  // namespace artgnss

namespace artgnss {

/// Everything the single-epoch GNSS engine produces for one epoch of the
/// four-antenna truck: fixed-base RTK per antenna, moving-base RTK per pair
/// (kAntennaPairs order) and Doppler velocity per antenna.
struct EpochSolution {
  double t = 0.0;
  std::array<RtkSolution, 4> rtk;
  std::array<RtkSolution, 6> moving_base;
  std::array<std::optional<VelocitySolution>, 4> velocity;
};

}  // namespace artgnss
