#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "artgnss/rtk.hpp"
#include "artgnss/truck_model.hpp"

namespace artgnss {

/// Per-epoch node: antennas 1..4 stacked as x1 y1 z1 ... x4 y4 z4 (ENU, m).
using EpochNode = Eigen::Matrix<double, 12, 1>;
using EpochStates = std::vector<EpochNode>;

enum class FactorKind { Rtk, MovingBase, DopplerVelocity, BaselineLength };
inline constexpr std::array<FactorKind, 4> kFactorKinds{FactorKind::Rtk, FactorKind::MovingBase,
                                                        FactorKind::DopplerVelocity, FactorKind::BaselineLength};
const char* to_string(FactorKind k) noexcept;

/// Residual conventions (all with isotropic information 1/sigma^2):
///   Rtk             e = X_i^j - B             (B = base position + RTK baseline)
///   MovingBase      e = X_i^b - X_i^a - B     (B = moving-base vector a -> b)
///   DopplerVelocity e = X_i^j - X_{i-1}^j - V dt, sigma = sigma_v * dt
///   BaselineLength  e = (|X2-X1| - L12, |X4-X3| - L34), or their scalar sum in compat mode
struct Factor {
  FactorKind kind = FactorKind::Rtk;
  std::size_t epoch = 0;
  int antenna_a = 0;
  int antenna_b = 0;
  Eigen::Vector3d measurement = Eigen::Vector3d::Zero();
  double l12 = 0.0;
  double l34 = 0.0;
  double sigma = 1.0;
  bool scalar_sum = false;

  int residual_dim() const noexcept;
  Eigen::MatrixXd information() const;
};

struct GraphSettings {
  double rtk_sigma = 0.1;          // m
  double moving_base_sigma = 0.1;  // m
  double velocity_sigma = 0.1;     // m/s
  double baseline_sigma = 0.01;    // m
  bool summed_baseline_residual = false;        // single summed baseline-length residual
};

class FactorGraph {
 public:
  explicit FactorGraph(std::size_t num_epochs, GraphSettings settings = {});

  void add_rtk_factor(std::size_t epoch, int antenna, const Eigen::Vector3d& measured_position, double sigma);
  /// Throws Error(InvalidArgument) unless the solution is FIX.
  void add_rtk_factor(std::size_t epoch, int antenna, const RtkSolution& solution, const Eigen::Vector3d& base_pos);

  /// `vector` is X_b - X_a.
  void add_moving_base_factor(std::size_t epoch, int antenna_a, int antenna_b, const Eigen::Vector3d& vector,
                              double sigma);
  void add_moving_base_factor(std::size_t epoch, int antenna_a, int antenna_b, const RtkSolution& solution);

  /// Connects (epoch-1, epoch). Throws Error(MissingEpoch) when either is absent.
  void add_velocity_factor(std::size_t epoch, int antenna, const Eigen::Vector3d& velocity, double dt,
                           double sigma_velocity);

  void add_baseline_factor(std::size_t epoch, const AntennaGeometry& geom, double sigma);

  std::size_t num_epochs() const noexcept { return num_epochs_; }
  std::span<const Factor> factors() const noexcept { return factors_; }
  const GraphSettings& settings() const noexcept { return settings_; }
  std::size_t count(FactorKind kind) const noexcept;

  /// Every antenna-epoch node must reach a node carrying an RTK factor through
  /// full-rank (3D vector) factors. Throws Error(GaugeDeficient) otherwise.
  void check_gauge() const;

 private:
  void check_epoch(std::size_t epoch) const;
  static void check_antenna(int antenna);

  std::size_t num_epochs_;
  GraphSettings settings_;
  std::vector<Factor> factors_;
};

/// Whitened residual and Jacobian blocks of one factor.
struct FactorLinearization {
  int dim = 0;
  int num_blocks = 0;
  Eigen::Vector3d residual = Eigen::Vector3d::Zero();
  std::array<std::size_t, 4> variables{};      // epoch * 4 + antenna - 1
  std::array<Eigen::Matrix3d, 4> jacobians{};  // dim x 3 used
};

FactorLinearization linearize_factor(const Factor& f, const EpochStates& states);
/// Unwhitened residual.
Eigen::VectorXd factor_residual(const Factor& f, const EpochStates& states);
/// Sum over factors of e^T Omega e.
double objective(const FactorGraph& graph, const EpochStates& states);

/// Graph from per-epoch GNSS solutions: RTK factors for FIX
/// antennas, moving-base factors for FIX pairs, a baseline factor at every
/// epoch, and velocity factors between consecutive epochs whenever a Doppler
/// solution exists at the later epoch.
FactorGraph build_graph(std::span<const EpochSolution> solutions, const Eigen::Vector3d& base_pos,
                        const AntennaGeometry& geom, const GraphSettings& settings = {});

/// Initial node values: FIX RTK, else dead-reckoned from the previous epoch
/// with Doppler velocity, else the float/code RTK position, else the base.
EpochStates initial_states(std::span<const EpochSolution> solutions, const Eigen::Vector3d& base_pos);

struct OptimizerSettings {
  int max_iterations = 100;
  double relative_tolerance = 1e-10;
  double gradient_tolerance = 1e-8;
  double initial_radius = 1.0;
  bool parallel = true;
};

struct SolveReport {
  int iterations = 0;
  int rejected_steps = 0;
  double initial_objective = 0.0;
  double final_objective = 0.0;
  bool converged = false;
  std::string termination;
  std::array<double, 4> residual_rms{};  // per FactorKind, unwhitened
  std::array<std::size_t, 4> factor_counts{};
  std::vector<double> objective_history;  // accepted iterates
};

struct OptimizeResult {
  EpochStates states;
  SolveReport report;
};

/// Powell dogleg over the sparse normal equations of the joint objective.
/// Throws Error(GaugeDeficient) before solving and Error(NumericalFailure)
/// when the damped normal matrix still cannot be factored. Hitting the
/// iteration cap is reported through report.converged.
OptimizeResult optimize(const FactorGraph& graph, const EpochStates& initial, const OptimizerSettings& settings = {});

struct TruckEstimate {
  double t = 0.0;
  EnuPoint position;
  double articulated_angle = 0.0;
};

std::vector<TruckEstimate> extract_truck_series(const EpochStates& states, std::span<const double> times);

AntennaSet antenna_set(const EpochNode& node, std::size_t epoch = 0);
EpochNode to_node(const AntennaSet& set);

}  // namespace artgnss
