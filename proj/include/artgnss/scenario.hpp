#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "artgnss/graph.hpp"
#include "artgnss/obs_sim.hpp"
#include "artgnss/rtk.hpp"
#include "artgnss/sky_sim.hpp"
#include "artgnss/truck_model.hpp"

namespace artgnss {

inline constexpr int kScenarioVersion = 1;

/// Everything needed to regenerate a synthetic run: site, constellation,
/// truck geometry and path, error budget, and estimator settings.
struct ScenarioAsset {
  int version = kScenarioVersion;
  std::string name = "default";
  GeodeticPoint site{36.05, 140.12, 30.0};
  double duration = 60.0;  // s
  double rate_hz = 10.0;
  Eigen::Vector3d base_enu = Eigen::Vector3d::Zero();

  std::uint64_t constellation_seed = 42;
  ConstellationCounts counts = ConstellationCounts::defaults();
  std::vector<OrbitSpec> orbits;  // explicit table; overrides the generated one when non-empty

  AntennaGeometry geometry;
  TrajectorySpec trajectory;
  ErrorBudget errors;
  int ambiguity_max_abs = 1000;

  RtkSettings rtk;
  GraphSettings graph;
  OptimizerSettings optimizer;

  std::vector<OrbitSpec> constellation() const;
  /// Throws Error(ConfigError) on inconsistent fields.
  void validate() const;
};

/// Built-in default: 60 s at 10 Hz, S-curve with alternating +-20 deg
/// articulation at 10 km/h.
ScenarioAsset default_scenario();

/// YAML I/O. Missing keys keep their defaults; unknown top-level keys and
/// malformed values throw Error(ConfigError).
ScenarioAsset parse_scenario(const std::string& yaml_text);
ScenarioAsset load_scenario(const std::string& path);
std::string dump_scenario(const ScenarioAsset& asset);

/// One realization of a scenario at a given seed and elevation mask.
struct SimulatedRun {
  std::vector<double> times;
  std::vector<TruckState> truth;
  std::vector<AntennaSet> antennas;
  std::vector<GnssObservation> observations;  // base + antennas 1..4, ordered by epoch
  std::vector<std::size_t> visible_counts;    // per epoch, at the site origin
};

/// Truth is seed-independent. The seed drives noise, clocks, and ambiguities
/// through counter-based streams, so raising the mask only removes
/// observations and never changes the surviving values.
SimulatedRun simulate_scenario(const ScenarioAsset& asset, std::uint64_t seed, double mask_deg);

Ephemeris make_ephemeris(const ScenarioAsset& asset);

}  // namespace artgnss
