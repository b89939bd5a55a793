#include "artgnss/graph.hpp"

#include <cmath>
#include <numeric>

#include "artgnss/error.hpp"

namespace artgnss {

const char* to_string(FactorKind k) noexcept {
  switch (k) {
    case FactorKind::Rtk: return "rtk";
    case FactorKind::MovingBase: return "moving_base";
    case FactorKind::DopplerVelocity: return "doppler_velocity";
    case FactorKind::BaselineLength: return "baseline_length";
  }
  return "unknown";
}

int Factor::residual_dim() const noexcept {
  if (kind == FactorKind::BaselineLength) return scalar_sum ? 1 : 2;
  return 3;
}

Eigen::MatrixXd Factor::information() const {
  const int d = residual_dim();
  return Eigen::MatrixXd::Identity(d, d) / (sigma * sigma);
}

FactorGraph::FactorGraph(std::size_t num_epochs, GraphSettings settings)
    : num_epochs_(num_epochs), settings_(settings) {}

void FactorGraph::check_epoch(std::size_t epoch) const {
  if (epoch >= num_epochs_) throw Error(ErrorCode::MissingEpoch, "epoch " + std::to_string(epoch) + " not in graph");
}

void FactorGraph::check_antenna(int antenna) {
  if (antenna < 1 || antenna > 4) throw Error(ErrorCode::InvalidArgument, "antenna must be 1..4");
}

namespace {
void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
}
}  // namespace

void FactorGraph::add_rtk_factor(std::size_t epoch, int antenna, const Eigen::Vector3d& measured_position,
                                 double sigma) {
  check_epoch(epoch);
  check_antenna(antenna);
  check_sigma(sigma);
  Factor f;
  f.kind = FactorKind::Rtk;
  f.epoch = epoch;
  f.antenna_a = antenna;
  f.measurement = measured_position;
  f.sigma = sigma;
  factors_.push_back(f);
}

void FactorGraph::add_rtk_factor(std::size_t epoch, int antenna, const RtkSolution& solution,
                                 const Eigen::Vector3d& base_pos) {
  if (solution.status != FixStatus::Fix) throw Error(ErrorCode::InvalidArgument, "RTK factor requires a FIX solution");
  add_rtk_factor(epoch, antenna, base_pos + solution.baseline, settings_.rtk_sigma);
}

void FactorGraph::add_moving_base_factor(std::size_t epoch, int antenna_a, int antenna_b,
                                         const Eigen::Vector3d& vector, double sigma) {
  check_epoch(epoch);
  check_antenna(antenna_a);
  check_antenna(antenna_b);
  check_sigma(sigma);
  if (antenna_a == antenna_b) throw Error(ErrorCode::InvalidArgument, "moving-base pair needs two antennas");
  Factor f;
  f.kind = FactorKind::MovingBase;
  f.epoch = epoch;
  f.antenna_a = antenna_a;
  f.antenna_b = antenna_b;
  f.measurement = vector;
  f.sigma = sigma;
  factors_.push_back(f);
}

void FactorGraph::add_moving_base_factor(std::size_t epoch, int antenna_a, int antenna_b,
                                         const RtkSolution& solution) {
  if (solution.status != FixStatus::Fix)
    throw Error(ErrorCode::InvalidArgument, "moving-base factor requires a FIX solution");
  add_moving_base_factor(epoch, antenna_a, antenna_b, solution.baseline, settings_.moving_base_sigma);
}

void FactorGraph::add_velocity_factor(std::size_t epoch, int antenna, const Eigen::Vector3d& velocity, double dt,
                                      double sigma_velocity) {
  if (epoch == 0) throw Error(ErrorCode::MissingEpoch, "velocity factor needs a previous epoch");
  check_epoch(epoch);
  check_antenna(antenna);
  check_sigma(sigma_velocity);
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  Factor f;
  f.kind = FactorKind::DopplerVelocity;
  f.epoch = epoch;
  f.antenna_a = antenna;
  f.measurement = velocity * dt;
  f.sigma = sigma_velocity * dt;
  factors_.push_back(f);
}

void FactorGraph::add_baseline_factor(std::size_t epoch, const AntennaGeometry& geom, double sigma) {
  check_epoch(epoch);
  check_sigma(sigma);
  if (!(geom.l12() > 0.0) || !(geom.l34() > 0.0)) throw Error(ErrorCode::InvalidArgument, "baseline lengths must be positive");
  Factor f;
  f.kind = FactorKind::BaselineLength;
  f.epoch = epoch;
  f.l12 = geom.l12();
  f.l34 = geom.l34();
  f.sigma = sigma;
  f.scalar_sum = settings_.summed_baseline_residual;
  factors_.push_back(f);
}

std::size_t FactorGraph::count(FactorKind kind) const noexcept {
  return static_cast<std::size_t>(
      std::count_if(factors_.begin(), factors_.end(), [kind](const Factor& f) { return f.kind == kind; }));
}

void FactorGraph::check_gauge() const {
  const std::size_t n = num_epochs_ * 4;
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto node = [](std::size_t epoch, int antenna) { return epoch * 4 + static_cast<std::size_t>(antenna - 1); };
  std::vector<char> anchored(n, 0);
  for (const Factor& f : factors_) {
    switch (f.kind) {
      case FactorKind::Rtk: anchored[node(f.epoch, f.antenna_a)] = 1; break;
      case FactorKind::MovingBase:
        parent[find(node(f.epoch, f.antenna_a))] = find(node(f.epoch, f.antenna_b));
        break;
      case FactorKind::DopplerVelocity:
        parent[find(node(f.epoch - 1, f.antenna_a))] = find(node(f.epoch, f.antenna_a));
        break;
      case FactorKind::BaselineLength: break;  // distance only; fixes no translation
    }
  }
  std::vector<char> root_anchored(n, 0);
  for (std::size_t k = 0; k < n; ++k)
    if (anchored[k]) root_anchored[find(k)] = 1;
  for (std::size_t k = 0; k < n; ++k) {
    if (!root_anchored[find(k)]) {
      throw Error(ErrorCode::GaugeDeficient, "antenna " + std::to_string(k % 4 + 1) + " at epoch " +
                                                 std::to_string(k / 4) + " is not connected to any RTK anchor");
    }
  }
}

namespace {

Eigen::Vector3d antenna(const EpochStates& states, std::size_t epoch, int j) {
  return states[epoch].segment<3>(3 * (j - 1));
}

std::size_t var(std::size_t epoch, int j) { return epoch * 4 + static_cast<std::size_t>(j - 1); }

}  // namespace

Eigen::VectorXd factor_residual(const Factor& f, const EpochStates& states) {
  switch (f.kind) {
    case FactorKind::Rtk: return antenna(states, f.epoch, f.antenna_a) - f.measurement;
    case FactorKind::MovingBase:
      return antenna(states, f.epoch, f.antenna_b) - antenna(states, f.epoch, f.antenna_a) - f.measurement;
    case FactorKind::DopplerVelocity:
      return antenna(states, f.epoch, f.antenna_a) - antenna(states, f.epoch - 1, f.antenna_a) - f.measurement;
    case FactorKind::BaselineLength: {
      const double front = (antenna(states, f.epoch, 2) - antenna(states, f.epoch, 1)).norm() - f.l12;
      const double rear = (antenna(states, f.epoch, 4) - antenna(states, f.epoch, 3)).norm() - f.l34;
      if (f.scalar_sum) return Eigen::VectorXd::Constant(1, front + rear);
      return Eigen::Vector2d(front, rear);
    }
  }
  return {};
}

FactorLinearization linearize_factor(const Factor& f, const EpochStates& states) {
  FactorLinearization out;
  out.dim = f.residual_dim();
  const double w = 1.0 / f.sigma;
  const Eigen::Matrix3d eye = Eigen::Matrix3d::Identity() * w;
  switch (f.kind) {
    case FactorKind::Rtk:
      out.residual = w * (antenna(states, f.epoch, f.antenna_a) - f.measurement);
      out.num_blocks = 1;
      out.variables[0] = var(f.epoch, f.antenna_a);
      out.jacobians[0] = eye;
      break;
    case FactorKind::MovingBase:
      out.residual =
          w * (antenna(states, f.epoch, f.antenna_b) - antenna(states, f.epoch, f.antenna_a) - f.measurement);
      out.num_blocks = 2;
      out.variables[0] = var(f.epoch, f.antenna_b);
      out.jacobians[0] = eye;
      out.variables[1] = var(f.epoch, f.antenna_a);
      out.jacobians[1] = -eye;
      break;
    case FactorKind::DopplerVelocity:
      out.residual =
          w * (antenna(states, f.epoch, f.antenna_a) - antenna(states, f.epoch - 1, f.antenna_a) - f.measurement);
      out.num_blocks = 2;
      out.variables[0] = var(f.epoch, f.antenna_a);
      out.jacobians[0] = eye;
      out.variables[1] = var(f.epoch - 1, f.antenna_a);
      out.jacobians[1] = -eye;
      break;
    case FactorKind::BaselineLength: {
      const Eigen::Vector3d d12 = antenna(states, f.epoch, 2) - antenna(states, f.epoch, 1);
      const Eigen::Vector3d d34 = antenna(states, f.epoch, 4) - antenna(states, f.epoch, 3);
      const double n12 = d12.norm(), n34 = d34.norm();
      // Coincident antennas (e.g. all initialized at the base): any unit
      // direction is a valid subgradient, take east.
      const Eigen::RowVector3d u12 = w * (n12 > 0.0 ? Eigen::RowVector3d(d12.transpose() / n12) : Eigen::RowVector3d::UnitX());
      const Eigen::RowVector3d u34 = w * (n34 > 0.0 ? Eigen::RowVector3d(d34.transpose() / n34) : Eigen::RowVector3d::UnitX());
      out.num_blocks = 4;
      for (int j = 1; j <= 4; ++j) {
        out.variables[j - 1] = var(f.epoch, j);
        out.jacobians[j - 1].setZero();
      }
      if (f.scalar_sum) {
        out.residual(0) = w * ((n12 - f.l12) + (n34 - f.l34));
        out.jacobians[0].row(0) = -u12;
        out.jacobians[1].row(0) = u12;
        out.jacobians[2].row(0) = -u34;
        out.jacobians[3].row(0) = u34;
      } else {
        out.residual(0) = w * (n12 - f.l12);
        out.residual(1) = w * (n34 - f.l34);
        out.jacobians[0].row(0) = -u12;
        out.jacobians[1].row(0) = u12;
        out.jacobians[2].row(1) = -u34;
        out.jacobians[3].row(1) = u34;
      }
      break;
    }
  }
  return out;
}

double objective(const FactorGraph& graph, const EpochStates& states) {
  double total = 0.0;
  for (const Factor& f : graph.factors()) {
    const Eigen::VectorXd e = factor_residual(f, states);
    total += e.dot(f.information() * e);
  }
  return total;
}

FactorGraph build_graph(std::span<const EpochSolution> solutions, const Eigen::Vector3d& base_pos,
                        const AntennaGeometry& geom, const GraphSettings& settings) {
  FactorGraph graph(solutions.size(), settings);
  for (std::size_t i = 0; i < solutions.size(); ++i) {
    const EpochSolution& s = solutions[i];
    for (int j = 1; j <= 4; ++j) {
      if (s.rtk[j - 1].status == FixStatus::Fix) graph.add_rtk_factor(i, j, s.rtk[j - 1], base_pos);
    }
    for (std::size_t m = 0; m < kAntennaPairs.size(); ++m) {
      if (s.moving_base[m].status == FixStatus::Fix)
        graph.add_moving_base_factor(i, kAntennaPairs[m].first, kAntennaPairs[m].second, s.moving_base[m]);
    }
    graph.add_baseline_factor(i, geom, settings.baseline_sigma);
    if (i > 0) {
      const double dt = s.t - solutions[i - 1].t;
      for (int j = 1; j <= 4; ++j) {
        if (s.velocity[j - 1]) graph.add_velocity_factor(i, j, s.velocity[j - 1]->velocity, dt, settings.velocity_sigma);
      }
    }
  }
  graph.check_gauge();
  return graph;
}

EpochStates initial_states(std::span<const EpochSolution> solutions, const Eigen::Vector3d& base_pos) {
  EpochStates out(solutions.size(), EpochNode::Zero());
  for (std::size_t i = 0; i < solutions.size(); ++i) {
    const EpochSolution& s = solutions[i];
    for (int j = 0; j < 4; ++j) {
      Eigen::Vector3d x;
      if (s.rtk[j].status == FixStatus::Fix) {
        x = base_pos + s.rtk[j].baseline;
      } else if (i > 0 && s.velocity[j]) {
        x = out[i - 1].segment<3>(3 * j) + s.velocity[j]->velocity * (s.t - solutions[i - 1].t);
      } else if (s.rtk[j].status == FixStatus::Float) {
        x = base_pos + s.rtk[j].baseline;
      } else {
        x = base_pos;
      }
      out[i].segment<3>(3 * j) = x;
    }
  }
  return out;
}

AntennaSet antenna_set(const EpochNode& node, std::size_t epoch) {
  AntennaSet a;
  a.epoch = epoch;
  for (int j = 0; j < 4; ++j) a.positions[j] = node.segment<3>(3 * j);
  return a;
}

EpochNode to_node(const AntennaSet& set) {
  EpochNode n;
  for (int j = 0; j < 4; ++j) n.segment<3>(3 * j) = set.positions[j];
  return n;
}

std::vector<TruckEstimate> extract_truck_series(const EpochStates& states, std::span<const double> times) {
  if (times.size() != states.size()) throw Error(ErrorCode::InvalidArgument, "times and states differ in length");
  std::vector<TruckEstimate> out;
  out.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const AntennaSet a = antenna_set(states[i], i);
    out.push_back({times[i], truck_position(a), articulated_angle(a)});
  }
  return out;
}

}  // namespace artgnss
