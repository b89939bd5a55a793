#pragma once

// Data-parallel kernels. Each has a serial reference kept for testing; the
// OpenMP variants write into per-item slots so results are bit-identical to
// the serial ones regardless of thread count.

#include <array>
#include <span>
#include <vector>

#include "artgnss/graph.hpp"
#include "artgnss/obs_sim.hpp"
#include "artgnss/rtk.hpp"

namespace artgnss::kernels {

struct EpochObservations {
  double t = 0.0;
  std::array<std::vector<GnssObservation>, 5> by_receiver;  // index 0 = base
};

/// Groups a flat observation stream by exact timestamp, in time order.
std::vector<EpochObservations> group_by_epoch(std::span<const GnssObservation> obs);

/// Fixed-base RTK for antennas 1..4 (linearized from the base position),
/// moving-base RTK for the six pairs (approximate positions from this epoch's
/// RTK), and Doppler velocity per antenna.
EpochSolution solve_epoch(const EpochObservations& epoch, const Ephemeris& eph, const Eigen::Vector3d& base_pos,
                          const RtkSettings& settings);

std::vector<EpochSolution> solve_epochs_serial(std::span<const EpochObservations> epochs, const Ephemeris& eph,
                                               const Eigen::Vector3d& base_pos, const RtkSettings& settings);
std::vector<EpochSolution> solve_epochs_parallel(std::span<const EpochObservations> epochs, const Ephemeris& eph,
                                                 const Eigen::Vector3d& base_pos, const RtkSettings& settings);

void linearize_serial(const FactorGraph& graph, const EpochStates& states, std::vector<FactorLinearization>& out);
void linearize_parallel(const FactorGraph& graph, const EpochStates& states, std::vector<FactorLinearization>& out);

/// Sum of squared whitened residuals over precomputed linearizations.
double whitened_cost(std::span<const FactorLinearization> lin);

}  // namespace artgnss::kernels
