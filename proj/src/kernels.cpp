#include "artgnss/kernels.hpp"

#include <map>

#include "artgnss/error.hpp"

namespace artgnss::kernels {

std::vector<EpochObservations> group_by_epoch(std::span<const GnssObservation> obs) {
  std::map<double, EpochObservations> by_time;
  for (const auto& o : obs) {
    if (o.receiver < 0 || o.receiver > 4) throw Error(ErrorCode::InvalidArgument, "receiver id out of range");
    auto& e = by_time[o.t];
    e.t = o.t;
    e.by_receiver[static_cast<std::size_t>(o.receiver)].push_back(o);
  }
  std::vector<EpochObservations> out;
  out.reserve(by_time.size());
  for (auto& [t, e] : by_time) out.push_back(std::move(e));
  return out;
}

EpochSolution solve_epoch(const EpochObservations& epoch, const Ephemeris& eph, const Eigen::Vector3d& base_pos,
                          const RtkSettings& settings) {
  EpochSolution out;
  out.t = epoch.t;
  const auto& base = epoch.by_receiver[0];
  std::array<Eigen::Vector3d, 4> approx;
  for (int j = 0; j < 4; ++j) {
    out.rtk[j] = rtk_solve(epoch.by_receiver[j + 1], base, base_pos, base_pos, eph, settings);
    approx[j] = out.rtk[j].status == FixStatus::None ? base_pos : Eigen::Vector3d(base_pos + out.rtk[j].baseline);
  }
  for (std::size_t m = 0; m < kAntennaPairs.size(); ++m) {
    const auto [a, b] = kAntennaPairs[m];
    out.moving_base[m] = moving_base_solve(epoch.by_receiver[a], epoch.by_receiver[b], approx[a - 1],
                                           approx[b - 1], eph, settings);
  }
  for (int j = 0; j < 4; ++j) {
    try {
      out.velocity[j] = doppler_velocity(epoch.by_receiver[j + 1], eph, approx[j], settings);
    } catch (const Error&) {
      out.velocity[j].reset();
    }
  }
  return out;
}

std::vector<EpochSolution> solve_epochs_serial(std::span<const EpochObservations> epochs, const Ephemeris& eph,
                                               const Eigen::Vector3d& base_pos, const RtkSettings& settings) {
  std::vector<EpochSolution> out(epochs.size());
  for (std::size_t i = 0; i < epochs.size(); ++i) out[i] = solve_epoch(epochs[i], eph, base_pos, settings);
  return out;
}

std::vector<EpochSolution> solve_epochs_parallel(std::span<const EpochObservations> epochs, const Ephemeris& eph,
                                                 const Eigen::Vector3d& base_pos, const RtkSettings& settings) {
  std::vector<EpochSolution> out(epochs.size());
  const auto n = static_cast<long>(epochs.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (long i = 0; i < n; ++i) out[i] = solve_epoch(epochs[i], eph, base_pos, settings);
  return out;
}

void linearize_serial(const FactorGraph& graph, const EpochStates& states, std::vector<FactorLinearization>& out) {
  const auto factors = graph.factors();
  out.resize(factors.size());
  for (std::size_t k = 0; k < factors.size(); ++k) out[k] = linearize_factor(factors[k], states);
}

void linearize_parallel(const FactorGraph& graph, const EpochStates& states, std::vector<FactorLinearization>& out) {
  const auto factors = graph.factors();
  out.resize(factors.size());
  const auto n = static_cast<long>(factors.size());
#pragma omp parallel for schedule(static)
  for (long k = 0; k < n; ++k) out[k] = linearize_factor(factors[k], states);
}

double whitened_cost(std::span<const FactorLinearization> lin) {
  double c = 0.0;
  for (const auto& l : lin) c += l.residual.head(l.dim).squaredNorm();
  return c;
}

}  // namespace artgnss::kernels
