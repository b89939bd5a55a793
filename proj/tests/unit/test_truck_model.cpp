#include <doctest.h>

#include <random>

#include <Eigen/Geometry>

#include "artgnss/error.hpp"
#include "artgnss/scenario.hpp"
#include "artgnss/truck_model.hpp"

using namespace artgnss;

namespace {

TruckState state_with(double heading, double gamma) {
  TruckState s;
  s.front_ref_position = {10.0, -4.0, 0.0};
  s.front_heading = heading;
  s.rear_heading = wrap_deg(heading - gamma);
  s.articulated_angle = gamma;
  return s;
}

}  // namespace

TEST_CASE("angle wrapping") {
  CHECK(wrap_deg(180.0) == 180.0);
  CHECK(wrap_deg(-180.0) == 180.0);
  CHECK(wrap_deg(540.0) == 180.0);
  CHECK(wrap_deg(190.0) == doctest::Approx(-170.0));
  CHECK(angle_diff_deg(179.0, -179.0) == doctest::Approx(-2.0));
  CHECK(angle_diff_deg(-179.0, 179.0) == doctest::Approx(2.0));
}

TEST_CASE("antenna layout keeps pair separations and reproduces the articulation angle") {
  const AntennaGeometry g;
  CHECK(g.l12() == doctest::Approx(3.0));
  CHECK(g.l34() == doctest::Approx(3.0));
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> heading(-180.0, 180.0), gamma(-45.0, 45.0);
  for (int i = 0; i < 500; ++i) {
    const TruckState s = state_with(heading(gen), gamma(gen));
    const AntennaSet a = antenna_positions(s, g);
    CHECK(std::abs((a.positions[1] - a.positions[0]).norm() - g.l12()) < 1e-12);
    CHECK(std::abs((a.positions[3] - a.positions[2]).norm() - g.l34()) < 1e-12);
    CHECK(std::abs(angle_diff_deg(articulated_angle(a), s.articulated_angle)) < 1e-9);
    CHECK(std::abs(angle_diff_deg(pair_heading_deg(a.positions[0], a.positions[1]), s.front_heading)) < 1e-9);
  }
}

TEST_CASE("straight truck has zero articulation and position at the front pair midpoint") {
  const AntennaGeometry g;
  const AntennaSet a = antenna_positions(state_with(90.0, 0.0), g);
  CHECK(std::abs(articulated_angle(a)) < 1e-12);
  const EnuPoint p = truck_position(a);
  CHECK(p.e == doctest::Approx(10.0));
  CHECK(p.n == doctest::Approx(-4.0));
  CHECK(p.u == doctest::Approx(3.5));
}

TEST_CASE("articulated angle is invariant to vertical offsets and global rotation") {
  const AntennaGeometry g;
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> heading(-180.0, 180.0), gamma(-45.0, 45.0), dz(-2.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    AntennaSet a = antenna_positions(state_with(heading(gen), gamma(gen)), g);
    const double ref = articulated_angle(a);
    AntennaSet lifted = a;
    const double z = dz(gen);
    for (auto& p : lifted.positions) p.z() += z;
    CHECK(std::abs(angle_diff_deg(articulated_angle(lifted), ref)) < 1e-9);
    AntennaSet rotated = a;
    const double r = heading(gen) * kDegToRad;
    const Eigen::Matrix3d rz = Eigen::AngleAxisd(r, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    for (auto& p : rotated.positions) p = rz * p;
    CHECK(std::abs(angle_diff_deg(articulated_angle(rotated), ref)) < 1e-9);
  }
}

TEST_CASE("degenerate antenna pair") {
  AntennaSet a;
  a.positions = {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(2, 0, 0)};
  CHECK_THROWS_AS(articulated_angle(a), Error);
  try {
    articulated_angle(a);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateGeometry);
  }
}

TEST_CASE("default trajectory: timing, limits, slew rate, speed") {
  const ScenarioAsset s = default_scenario();
  const auto truth = simulate_trajectory(s.trajectory, s.geometry, s.rate_hz);
  REQUIRE(truth.size() == 601);
  CHECK(truth.front().t == 0.0);
  CHECK(truth.back().t == doctest::Approx(60.0));
  double peak = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    CHECK(std::abs(truth[i].articulated_angle) <= s.trajectory.max_articulation);
    CHECK(std::abs(angle_diff_deg(truth[i].front_heading, truth[i].rear_heading) - truth[i].articulated_angle) < 1e-9);
    if (i > 0) {
      const double rate = (truth[i].articulated_angle - truth[i - 1].articulated_angle) * s.rate_hz;
      CHECK(std::abs(rate) <= s.trajectory.slew_rate + 1e-9);
      const double step = (truth[i].front_ref_position.vec() - truth[i - 1].front_ref_position.vec()).norm();
      CHECK(step == doctest::Approx(s.trajectory.speed / s.rate_hz).scale(0).epsilon(1e-3));
    }
    peak = std::max(peak, std::abs(truth[i].articulated_angle));
  }
  CHECK(peak == doctest::Approx(20.0));
}

TEST_CASE("straight drive integrates speed exactly") {
  TrajectorySpec spec;
  spec.start = {0.0, 0.0, 0.0};
  spec.initial_heading = 30.0;
  spec.segments = {{10.0, 0.0}};
  const auto truth = simulate_trajectory(spec, AntennaGeometry{}, 10.0);
  const Eigen::Vector3d end = truth.back().front_ref_position.vec();
  CHECK(end.norm() == doctest::Approx(spec.speed * 10.0).scale(0).epsilon(1e-12));
  CHECK(std::atan2(end.y(), end.x()) * kRadToDeg == doctest::Approx(30.0));
}

TEST_CASE("antenna velocities match finite differences of antenna positions") {
  const ScenarioAsset s = default_scenario();
  const AntennaGeometry& g = s.geometry;
  const auto fine = simulate_trajectory(s.trajectory, g, 1000.0);
  for (std::size_t i = 1; i + 1 < fine.size(); i += 997) {
    const auto v = antenna_velocities(fine[i], g);
    const AntennaSet a = antenna_positions(fine[i - 1], g), b = antenna_positions(fine[i + 1], g);
    for (int j = 0; j < 4; ++j) {
      const Eigen::Vector3d fd = (b.positions[j] - a.positions[j]) * 500.0;
      CHECK((fd - v[j]).norm() < 1e-4);
    }
  }
}

TEST_CASE("invalid trajectories") {
  const AntennaGeometry g;
  TrajectorySpec spec;
  CHECK_THROWS_AS(simulate_trajectory(spec, g, 10.0), Error);
  spec.segments = {{5.0, 50.0}};
  CHECK_THROWS_AS(simulate_trajectory(spec, g, 10.0), Error);
  spec.segments = {{-1.0, 0.0}};
  CHECK_THROWS_AS(simulate_trajectory(spec, g, 10.0), Error);
  spec.segments = {{5.0, 10.0}};
  spec.speed = std::nan("");
  CHECK_THROWS_AS(simulate_trajectory(spec, g, 10.0), Error);
  try {
    simulate_trajectory(TrajectorySpec{}, g, 10.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidPath);
  }
}
