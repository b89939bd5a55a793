#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "artgnss/sky_sim.hpp"

namespace artgnss {

/// Receiver ids: 0 is the fixed base station, 1..4 are the truck antennas.
inline constexpr int kBaseReceiver = 0;
inline constexpr double kSpeedOfLight = 299'792'458.0;

/// Observables snap to this grid (2^-27 m, about 7.5 nm). With every additive
/// term on the grid and magnitudes below 2^26 m, an observable is the exact
/// double sum of its parts, so differencing cancels common terms bit-exactly.
inline constexpr double kObservableQuantum = 0x1.0p-27;
double quantize(double meters) noexcept;

/// L1-class carrier wavelength, snapped to the observable grid.
double default_wavelength() noexcept;

struct ErrorBudget {
  double carrier_phase_noise_std = 0.005;  // m
  double pseudorange_noise_std = 0.5;      // m
  double doppler_noise_std = 0.05;         // m/s
  double iono_zenith_delay = 2.0;          // m
  double tropo_zenith_delay = 2.4;         // m
  double receiver_clock_walk_std = 1e-9;   // s/sqrt(s)
  double receiver_clock_bias_max = 3.0e4;  // m, initial offset drawn in +-max
  double satellite_clock_bias_max = 3.0e3; // m
  bool elevation_noise_inflation = false;  // noise std scaled by 1/sin(el)
  std::uint64_t seed = 1;

  static ErrorBudget zero();  // every term off; seed kept
  void validate() const;
};

struct GnssObservation {
  int receiver = kBaseReceiver;
  SatelliteId sat;
  double t = 0.0;
  double carrier_phase = 0.0;       // m (range units, includes lambda*N)
  double pseudorange = 0.0;         // m
  double doppler_range_rate = 0.0;  // m/s
  double wavelength = 0.0;          // m
  double elevation = 0.0;           // deg
};

/// Integer carrier-phase ambiguities (cycles) per (receiver, satellite), with
/// optional scripted cycle slips. Value type: slips return a new table.
class AmbiguityTable {
 public:
  /// All ambiguities zero.
  AmbiguityTable() = default;
  /// Seeded integers uniformly in [-max_abs, max_abs].
  static AmbiguityTable random(std::uint64_t seed, int max_abs = 1000);

  long at(int receiver, const SatelliteId& sat, double t) const;

  struct Slip {
    int receiver;
    SatelliteId sat;
    double t_slip;
    long delta;
  };
  std::span<const Slip> slips() const noexcept { return slips_; }

 private:
  friend AmbiguityTable inject_cycle_slip(const AmbiguityTable&, int, const SatelliteId&, double, long);
  std::optional<std::uint64_t> seed_;
  int max_abs_ = 0;
  std::vector<Slip> slips_;
};

/// Ambiguity of (receiver, sat) shifts by delta at every t >= t_slip.
/// Throws Error(InvalidArgument) for delta == 0.
AmbiguityTable inject_cycle_slip(const AmbiguityTable& table, int receiver, const SatelliteId& sat, double t_slip,
                                 long delta);

struct ReceiverTruth {
  int receiver = kBaseReceiver;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();  // ENU
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();  // ENU
};

/// Receiver clock offset (m) at an epoch: seeded initial bias plus a random
/// walk, accumulated from counter-based increments.
double receiver_clock(const ErrorBudget& budget, int receiver, std::size_t epoch, double dt);

/// One epoch of observations for every (receiver, visible satellite).
/// Atmospheric delays use the satellite elevation at the site origin so they
/// are identical for all receivers. Output ordered by receiver, then sat.
std::vector<GnssObservation> synthesize_epoch(const SkyView& sky, const Ephemeris& eph,
                                              std::span<const ReceiverTruth> receivers, const ErrorBudget& budget,
                                              const AmbiguityTable& ambiguities, std::size_t epoch, double t,
                                              double dt);

}  // namespace artgnss
