#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "artgnss/graph.hpp"
#include "artgnss/kernels.hpp"
#include "artgnss/scenario.hpp"

namespace artgnss {

enum class Estimator { Proposed, RtkOnly };
const char* to_string(Estimator e) noexcept;  // "proposed" / "rtk-only"
Estimator parse_estimator(const std::string& text);

/// Label used in outputs: the lowest (10 deg) mask is reported as open sky.
std::string mask_label(double mask_deg);

struct ExperimentConfig {
  std::string scenario_path;  // empty: built-in default scenario
  std::vector<double> masks{10.0, 35.0, 45.0};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::vector<Estimator> estimators{Estimator::Proposed, Estimator::RtkOnly};
  std::string output_dir = "out";
  bool parallel = true;

  /// Throws Error(ConfigError).
  void validate() const;
};

/// YAML config. Besides the fields above it accepts `overrides:` with the
/// same sections as a scenario file (rtk, graph, optimizer, errors), applied
/// on top of the loaded scenario.
struct LoadedConfig {
  ExperimentConfig config;
  ScenarioAsset scenario;
};
LoadedConfig parse_experiment_config(const std::string& yaml_text, const std::string& base_dir = ".");
LoadedConfig load_experiment_config(const std::string& path);

/// One estimator output epoch. Fields are absent when the estimator had no
/// solution for them at that epoch.
struct SeriesPoint {
  double t = 0.0;
  std::optional<EnuPoint> position;
  std::optional<double> articulated_angle;
  std::string status_flags;  // "XXFX" per antenna, plus "/" and six pair flags for the proposed method
};
using TruckSeries = std::vector<SeriesPoint>;

struct EstimateResult {
  TruckSeries series;
  std::vector<EpochSolution> solutions;
  std::optional<SolveReport> report;  // proposed only
  EpochStates states;                 // proposed only
};

/// Independent fixed-base RTK per antenna; FIX preferred, FLOAT used when no
/// fix exists. Position needs antennas 1 and 2, the angle all four.
EstimateResult run_rtk_only_baseline(std::span<const kernels::EpochObservations> epochs, const Ephemeris& eph,
                                     const Eigen::Vector3d& base_pos, const RtkSettings& settings,
                                     bool parallel = true);

/// RTK + moving-base RTK + Doppler per epoch, then the joint factor graph.
/// Graph errors propagate as Error with the offending epoch in the message.
EstimateResult run_proposed(std::span<const kernels::EpochObservations> epochs, const Ephemeris& eph,
                            const Eigen::Vector3d& base_pos, const AntennaGeometry& geom, const RtkSettings& rtk,
                            const GraphSettings& graph, const OptimizerSettings& optimizer, bool parallel = true);

EstimateResult run_estimator(Estimator which, std::span<const GnssObservation> observations,
                             const ScenarioAsset& asset, bool parallel = true);

/// Reference values the estimators are scored against: truck position
/// (antenna 1-2 midpoint) and articulated angle from the true antennas.
struct TruthPoint {
  double t = 0.0;
  EnuPoint position;
  double front_heading = 0.0;  // deg
  double rear_heading = 0.0;   // deg
  double articulated_angle = 0.0;
};
std::vector<TruthPoint> truth_points(std::span<const TruckState> truth, const AntennaGeometry& geom);

struct EpochError {
  double t = 0.0;
  double pos_err = 0.0;    // m, NaN when the estimator had no position
  double angle_err = 0.0;  // deg, wrapped, NaN when no angle
};

struct MetricsReport {
  std::string estimator;
  double mask = 0.0;
  double pos_rms = 0.0;    // NaN when no epoch carried a position
  double angle_rms = 0.0;  // NaN when no epoch carried an angle
  std::size_t epoch_count = 0;  // epochs present in both series and truth
  std::size_t pos_count = 0;
  std::size_t angle_count = 0;
  std::array<double, 4> fix_rate_antenna{};
  std::array<double, 6> fix_rate_pair{};  // proposed only; zeros otherwise
  double fix_rate = 0.0;                   // mean over antennas
  std::vector<EpochError> errors;
};

/// Timestamps match when within 1e-9 s. Throws Error(EmptyOverlap) when no
/// epoch has both an estimate and a truth entry.
MetricsReport evaluate(const TruckSeries& series, std::span<const TruthPoint> truth);

/// RMS over the non-NaN entries.
double rms_position(std::span<const EpochError> errors);
double rms_angle(std::span<const EpochError> errors);

struct SweepCell {
  double mask = 0.0;
  std::uint64_t seed = 0;
  Estimator estimator = Estimator::Proposed;
  bool ok = false;
  std::string error;
  MetricsReport metrics;
};

struct SweepRow {
  Estimator estimator = Estimator::Proposed;
  double mask = 0.0;
  double pos_rms = 0.0;    // pooled over all seeds' epoch errors
  double angle_rms = 0.0;  // pooled
  double fix_rate = 0.0;   // mean over seeds
  std::size_t failed_cells = 0;
};

struct SweepResult {
  std::vector<SweepCell> cells;  // mask-major, then seed, then estimator
  std::vector<SweepRow> rows;    // estimator-major, then mask
  bool any_failed() const;
};

/// Runs every (mask, seed, estimator) cell, in parallel when configured, and
/// reduces sequentially. Cell failures are recorded and the sweep continues.
SweepResult run_mask_sweep(const ExperimentConfig& config, const ScenarioAsset& asset);

/// metrics.csv, metrics_by_seed.csv, table_position.csv, table_angle.csv,
/// failures.csv and errors_<estimator>_mask<m>_seed<s>.csv under dir.
void write_sweep_outputs(const SweepResult& result, const std::string& dir);

}  // namespace artgnss
