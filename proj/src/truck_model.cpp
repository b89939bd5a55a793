#include "artgnss/truck_model.hpp"

#include <cmath>

#include "artgnss/error.hpp"

namespace artgnss {

void AntennaGeometry::validate() const {
  if (!(l12() > 0.5) || !(l34() > 0.5)) throw Error(ErrorCode::InvalidArgument, "antenna pair separation must exceed 0.5 m");
  if (!(front_axle_to_joint > 0.0) || !(joint_to_rear_axle > 0.0))
    throw Error(ErrorCode::InvalidArgument, "section lengths must be positive");
}

double wrap_deg(double angle) noexcept {
  double w = std::fmod(angle, 360.0);
  if (w <= -180.0) w += 360.0;
  if (w > 180.0) w -= 360.0;
  return w;
}

double angle_diff_deg(double a, double b) noexcept { return wrap_deg(a - b); }

namespace {

Eigen::Vector3d rotate_z(const Eigen::Vector3d& v, double heading_deg) {
  const double c = std::cos(heading_deg * kDegToRad);
  const double s = std::sin(heading_deg * kDegToRad);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y(), v.z()};
}

// omega (rad/s) about +z crossed with r
Eigen::Vector3d yaw_cross(double omega, const Eigen::Vector3d& r) { return {-omega * r.y(), omega * r.x(), 0.0}; }

}  // namespace

AntennaSet antenna_positions(const TruckState& state, const AntennaGeometry& geom, std::size_t epoch) {
  AntennaSet out;
  out.epoch = epoch;
  const Eigen::Vector3d front = state.front_ref_position.vec();
  const Eigen::Vector3d joint = front + rotate_z({-geom.front_axle_to_joint, 0.0, 0.0}, state.front_heading);
  out.positions[0] = front + rotate_z(geom.front_offsets[0], state.front_heading);
  out.positions[1] = front + rotate_z(geom.front_offsets[1], state.front_heading);
  out.positions[2] = joint + rotate_z(geom.rear_offsets[0], state.rear_heading);
  out.positions[3] = joint + rotate_z(geom.rear_offsets[1], state.rear_heading);
  return out;
}

std::array<Eigen::Vector3d, 4> antenna_velocities(const TruckState& state, const AntennaGeometry& geom) {
  const double wf = state.front_yaw_rate * kDegToRad;
  const double wr = state.rear_yaw_rate * kDegToRad;
  const Eigen::Vector3d v_front = rotate_z({state.speed, 0.0, 0.0}, state.front_heading);
  const Eigen::Vector3d v_joint = v_front + yaw_cross(wf, rotate_z({-geom.front_axle_to_joint, 0.0, 0.0}, state.front_heading));
  return {v_front + yaw_cross(wf, rotate_z(geom.front_offsets[0], state.front_heading)),
          v_front + yaw_cross(wf, rotate_z(geom.front_offsets[1], state.front_heading)),
          v_joint + yaw_cross(wr, rotate_z(geom.rear_offsets[0], state.rear_heading)),
          v_joint + yaw_cross(wr, rotate_z(geom.rear_offsets[1], state.rear_heading))};
}

EnuPoint truck_position(const AntennaSet& a) { return EnuPoint::of(0.5 * (a.positions[0] + a.positions[1])); }

double pair_heading_deg(const Eigen::Vector3d& from, const Eigen::Vector3d& to) {
  const double dx = to.x() - from.x();
  const double dy = to.y() - from.y();
  if (std::hypot(dx, dy) < 1e-6) throw Error(ErrorCode::DegenerateGeometry, "antenna pair has no horizontal separation");
  return std::atan2(dy, dx) * kRadToDeg;
}

double articulated_angle(const AntennaSet& a) {
  return angle_diff_deg(pair_heading_deg(a.positions[0], a.positions[1]),
                        pair_heading_deg(a.positions[2], a.positions[3]));
}

double TrajectorySpec::duration() const {
  double total = 0.0;
  for (const auto& s : segments) total += s.duration;
  return total;
}

namespace {

class ArticulationProfile {
 public:
  // Each segment moves from its start angle toward the target along a
  // raised-cosine ramp whose peak rate equals the slew rate, then holds.
  // A segment too short for the full ramp ends part-way along it.
  explicit ArticulationProfile(const TrajectorySpec& spec) : spec_(spec) {
    double angle = spec.initial_articulation;
    double t0 = 0.0;
    for (const auto& seg : spec.segments) {
      starts_.push_back({t0, angle});
      angle = eval(angle, seg.target_angle, seg.duration).first;
      t0 += seg.duration;
    }
  }

  // (angle deg, rate deg/s)
  std::pair<double, double> at(double t) const {
    std::size_t k = 0;
    while (k + 1 < starts_.size() && t >= starts_[k + 1].first) ++k;
    const auto [t0, a0] = starts_[k];
    return eval(a0, spec_.segments[k].target_angle, t - t0);
  }

 private:
  std::pair<double, double> eval(double a0, double target, double dt) const {
    const double delta = target - a0;
    const double ramp = kPi * std::abs(delta) / (2.0 * spec_.slew_rate);
    if (dt >= ramp) return {target, 0.0};
    const double phase = kPi * dt / ramp;
    return {a0 + 0.5 * delta * (1.0 - std::cos(phase)), 0.5 * delta * kPi / ramp * std::sin(phase)};
  }

  const TrajectorySpec& spec_;
  std::vector<std::pair<double, double>> starts_;
};

}  // namespace

std::vector<TruckState> simulate_trajectory(const TrajectorySpec& spec, const AntennaGeometry& geom, double rate_hz) {
  if (!(rate_hz > 0.0) || !std::isfinite(rate_hz)) throw Error(ErrorCode::InvalidPath, "rate must be positive");
  if (spec.segments.empty()) throw Error(ErrorCode::InvalidPath, "trajectory has no segments");
  geom.validate();
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(spec.start.e) || !finite(spec.start.n) || !finite(spec.start.u) || !finite(spec.initial_heading) ||
      !finite(spec.speed) || !(spec.slew_rate > 0.0) || !finite(spec.slew_rate) || !(spec.max_articulation > 0.0))
    throw Error(ErrorCode::InvalidPath, "non-finite trajectory parameters");
  if (std::abs(spec.initial_articulation) > spec.max_articulation)
    throw Error(ErrorCode::InvalidPath, "initial articulation exceeds limit");
  for (const auto& seg : spec.segments) {
    if (!finite(seg.duration) || !(seg.duration > 0.0) || !finite(seg.target_angle))
      throw Error(ErrorCode::InvalidPath, "invalid steering segment");
    if (std::abs(seg.target_angle) > spec.max_articulation)
      throw Error(ErrorCode::InvalidPath, "steering target exceeds articulation limit");
  }

  const ArticulationProfile profile(spec);
  const double lf = geom.front_axle_to_joint;
  const double lr = geom.joint_to_rear_axle;
  const double v = spec.speed;

  // Front yaw rate (rad/s) of a center-articulated vehicle driven at the front axle.
  auto yaw_rate = [&](double t) {
    const auto [gamma_deg, gamma_rate_deg] = profile.at(t);
    const double g = gamma_deg * kDegToRad;
    return (v * std::sin(g) + lr * gamma_rate_deg * kDegToRad) / (lf * std::cos(g) + lr);
  };

  const long epochs = static_cast<long>(std::floor(spec.duration() * rate_hz + 1e-9)) + 1;
  constexpr int kSubsteps = 20;
  const double h = 1.0 / (rate_hz * kSubsteps);

  std::vector<TruckState> out;
  out.reserve(static_cast<std::size_t>(epochs));
  double x = spec.start.e, y = spec.start.n, psi = spec.initial_heading * kDegToRad;
  double t = 0.0;
  for (long k = 0; k < epochs; ++k) {
    const double tk = static_cast<double>(k) / rate_hz;
    if (k > 0) {
      // RK4 on (x, y, psi); psi' depends on t only.
      for (int s = 0; s < kSubsteps; ++s) {
        const double ta = t + s * h;
        const double w1 = yaw_rate(ta), w2 = yaw_rate(ta + 0.5 * h), w4 = yaw_rate(ta + h);
        const double p1 = psi, p2 = psi + 0.5 * h * w1, p3 = psi + 0.5 * h * w2, p4 = psi + h * w2;
        x += h / 6.0 * v * (std::cos(p1) + 2.0 * std::cos(p2) + 2.0 * std::cos(p3) + std::cos(p4));
        y += h / 6.0 * v * (std::sin(p1) + 2.0 * std::sin(p2) + 2.0 * std::sin(p3) + std::sin(p4));
        psi += h / 6.0 * (w1 + 4.0 * w2 + w4);
      }
      t = tk;
    }
    const auto [gamma, gamma_rate] = profile.at(tk);
    TruckState s;
    s.t = tk;
    s.front_ref_position = {x, y, spec.start.u};
    s.front_heading = wrap_deg(psi * kRadToDeg);
    s.rear_heading = wrap_deg(s.front_heading - gamma);
    s.articulated_angle = wrap_deg(gamma);
    s.speed = v;
    s.front_yaw_rate = yaw_rate(tk) * kRadToDeg;
    s.rear_yaw_rate = s.front_yaw_rate - gamma_rate;
    out.push_back(s);
  }
  return out;
}

}  // namespace artgnss
