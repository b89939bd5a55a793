#include <doctest.h>

#include <set>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "../support/sim_fixture.hpp"
#include "artgnss/error.hpp"
#include "artgnss/rtk.hpp"

using namespace artgnss;
using testing::SimFixture;

namespace {

const SimFixture& noise_free() {
  static const SimFixture f(testing::noise_free_scenario(), 1, 10.0);
  return f;
}

const SimFixture& default_noise() {
  static const SimFixture f(default_scenario(), 1, 10.0);
  return f;
}

}  // namespace

TEST_CASE("double differences stay within one constellation and use the highest reference") {
  const auto& f = noise_free();
  const auto& e = f.epochs[100];
  const auto dds = form_double_differences(e.by_receiver[1], e.by_receiver[0]);
  std::map<GnssSystem, double> top;
  for (const auto& o : e.by_receiver[0]) top[o.sat.system] = std::max(top[o.sat.system], o.elevation);
  std::set<GnssSystem> seen;
  for (const auto& dd : dds) {
    CHECK(dd.ref.system == dd.sat.system);
    CHECK(dd.ref != dd.sat);
    CHECK(dd.ref_elevation == top[dd.ref.system]);
    CHECK(dd.sat_elevation <= dd.ref_elevation);
    CHECK(dd.rover == 1);
    CHECK(dd.base == 0);
    seen.insert(dd.sat.system);
  }
  for (std::size_t i = 1; i < dds.size(); ++i) {
    CHECK((dds[i - 1].sat.system < dds[i].sat.system ||
           (dds[i - 1].sat.system == dds[i].sat.system && dds[i - 1].sat < dds[i].sat)));
  }
  CHECK(dds.size() == e.by_receiver[0].size() - seen.size());

  std::vector<GnssObservation> one_each;
  std::set<GnssSystem> used;
  for (const auto& o : e.by_receiver[0])
    if (used.insert(o.sat.system).second) one_each.push_back(o);
  CHECK_THROWS_AS(form_double_differences(one_each, one_each), Error);
}

TEST_CASE("noise-free float solution is exact from the true position") {
  const auto& f = noise_free();
  for (std::size_t i : {0u, 250u, 600u}) {
    const auto& e = f.epochs[i];
    const Eigen::Vector3d truth = f.run.antennas[i].positions[0];
    const auto dds = form_double_differences(e.by_receiver[1], e.by_receiver[0]);
    const FloatSolution s = float_solution(dds, f.eph, e.t, truth, f.asset.base_enu);
    CHECK((s.baseline - (truth - f.asset.base_enu)).norm() < 1e-6);
    for (Eigen::Index k = 0; k < s.float_ambiguities.size(); ++k) {
      const double a = s.float_ambiguities(k);
      CHECK(std::abs(a - std::round(a)) < 1e-6);
      CHECK(std::lround(a) == f.dd_ambiguity(1, 0, dds[k].ref, dds[k].sat, e.t));
    }
    CHECK(s.covariance.rows() == 3 + s.float_ambiguities.size());
    CHECK(s.iterations <= 20);
  }
}

TEST_CASE("noise-free RTK fixes every antenna with the true integers") {
  const auto& f = noise_free();
  for (std::size_t i = 0; i < f.epochs.size(); i += 60) {
    const auto& e = f.epochs[i];
    for (int j = 1; j <= 4; ++j) {
      const RtkSolution s = rtk_solve(e.by_receiver[j], e.by_receiver[0], f.asset.base_enu, f.asset.base_enu, f.eph);
      REQUIRE(s.status == FixStatus::Fix);
      CHECK((s.baseline - f.run.antennas[i].positions[j - 1]).norm() < 1e-6);
      CHECK(f.fix_is_correct(s, j, 0, e.t));
      CHECK(s.ratio >= 3.0);
      CHECK(s.n_sats == static_cast<int>(e.by_receiver[0].size()));
    }
  }
}

TEST_CASE("noise-free moving base recovers inter-antenna vectors") {
  const auto& f = noise_free();
  const auto& g = f.asset.geometry;
  for (std::size_t i = 0; i < f.epochs.size(); i += 75) {
    const auto& e = f.epochs[i];
    const auto& p = f.run.antennas[i].positions;
    for (const auto& [a, b] : kAntennaPairs) {
      const RtkSolution s = moving_base_solve(e.by_receiver[a], e.by_receiver[b], p[a - 1] + Eigen::Vector3d(0.3, -0.2, 0.1),
                                              p[b - 1], f.eph);
      REQUIRE(s.status == FixStatus::Fix);
      CHECK((s.baseline - (p[b - 1] - p[a - 1])).norm() < 1e-5);
      CHECK(f.fix_is_correct(s, b, a, e.t));
    }
    const RtkSolution s12 = moving_base_solve(e.by_receiver[1], e.by_receiver[2], p[0], p[1], f.eph);
    CHECK(s12.baseline.norm() == doctest::Approx(g.l12()).scale(0).epsilon(1e-6));
  }
}

TEST_CASE("moving-base baselines are antisymmetric") {
  const auto& f = default_noise();
  int compared = 0;
  for (std::size_t i = 0; i < f.epochs.size(); i += 20) {
    const auto& e = f.epochs[i];
    const auto& p = f.run.antennas[i].positions;
    const RtkSolution ab = moving_base_solve(e.by_receiver[1], e.by_receiver[3], p[0], p[2], f.eph);
    const RtkSolution ba = moving_base_solve(e.by_receiver[3], e.by_receiver[1], p[2], p[0], f.eph);
    if (ab.status != FixStatus::Fix || ba.status != FixStatus::Fix || ab.dd_pairs != ba.dd_pairs) continue;
    CHECK((ab.baseline + ba.baseline).norm() < 1e-6);
    CHECK(ab.fixed_ambiguities == -ba.fixed_ambiguities);
    ++compared;
  }
  CHECK(compared > 10);
}

TEST_CASE("fixed solutions at default noise") {
  const auto& f = default_noise();
  int fixes = 0, wrong = 0;
  double err2 = 0.0;
  for (std::size_t i = 0; i < f.epochs.size(); i += 3) {
    const auto& e = f.epochs[i];
    for (int j = 1; j <= 4; ++j) {
      const RtkSolution s = rtk_solve(e.by_receiver[j], e.by_receiver[0], f.asset.base_enu, f.asset.base_enu, f.eph);
      if (s.status != FixStatus::Fix) continue;
      ++fixes;
      if (!f.fix_is_correct(s, j, 0, e.t)) {
        ++wrong;
        continue;
      }
      err2 += (s.baseline - f.run.antennas[i].positions[j - 1]).squaredNorm();
    }
  }
  REQUIRE(fixes > 0);
  MESSAGE("fixes " << fixes << " wrong " << wrong);
  CHECK(wrong < 0.01 * fixes);
  CHECK(std::sqrt(err2 / (fixes - wrong)) < 0.03);
}

TEST_CASE("cycle slip: the per-epoch fix follows the new integer") {
  ScenarioAsset a = testing::noise_free_scenario();
  SimFixture f(a, 4, 10.0);
  const auto& e0 = f.epochs[300];
  const SatelliteId s = e0.by_receiver[2][3].sat;
  f.ambiguities = inject_cycle_slip(f.ambiguities, 2, s, 30.0, -5);
  // Re-synthesize epoch 300 with the slipped table.
  const auto orbits = a.constellation();
  const SkyView sky = visible_sky(orbits, e0.t, geodetic_to_ecef(a.site), a.site, 10.0);
  const auto vel = antenna_velocities(f.run.truth[300], a.geometry);
  std::vector<ReceiverTruth> rcv{{0, a.base_enu, Eigen::Vector3d::Zero()}};
  for (int j = 0; j < 4; ++j) rcv.push_back({j + 1, f.run.antennas[300].positions[j], vel[j]});
  const auto obs = synthesize_epoch(sky, f.eph, rcv, a.errors, f.ambiguities, 300, e0.t, 0.1);
  const auto grouped = kernels::group_by_epoch(obs);
  REQUIRE(grouped.size() == 1);
  const auto& e = grouped[0];
  CHECK(e.by_receiver[2][3].carrier_phase - e0.by_receiver[2][3].carrier_phase == -5.0 * default_wavelength());
  // Holding the pre-slip integers, the DD residual of the slipped satellite jumps by lambda * delta.
  const auto before = form_double_differences(e0.by_receiver[2], e0.by_receiver[0]);
  const auto after = form_double_differences(e.by_receiver[2], e.by_receiver[0]);
  REQUIRE(before.size() == after.size());
  for (std::size_t k = 0; k < after.size(); ++k) {
    const double jump = after[k].dd_phase - before[k].dd_phase;
    double expected = 0.0;
    if (after[k].sat == s) expected = -5.0 * default_wavelength();
    if (after[k].ref == s) expected = 5.0 * default_wavelength();
    CHECK(jump == expected);
  }
  const RtkSolution sol = rtk_solve(e.by_receiver[2], e.by_receiver[0], a.base_enu, a.base_enu, f.eph);
  REQUIRE(sol.status == FixStatus::Fix);
  CHECK(f.fix_is_correct(sol, 2, 0, e.t));
  CHECK((sol.baseline - f.run.antennas[300].positions[1]).norm() < 1e-6);
}

TEST_CASE("insufficient satellites yield status none") {
  const auto& f = noise_free();
  const auto& e = f.epochs[0];
  std::vector<GnssObservation> rover(e.by_receiver[1].begin(), e.by_receiver[1].begin() + 3);
  const RtkSolution s = rtk_solve(rover, e.by_receiver[0], f.asset.base_enu, f.asset.base_enu, f.eph);
  CHECK(s.status == FixStatus::None);
  CHECK_FALSE(s.diagnostic.empty());
  CHECK(status_code(s.status) == 'N');
  CHECK(status_code(FixStatus::Fix) == 'X');
  CHECK(status_code(FixStatus::Float) == 'F');
}

TEST_CASE("doppler velocity") {
  const auto& f = noise_free();
  const ScenarioAsset& a = f.asset;
  const auto orbits = a.constellation();
  const SkyView sky = visible_sky(orbits, 10.0, geodetic_to_ecef(a.site), a.site, 10.0);
  const Eigen::Vector3d p(40.0, -10.0, 3.5);

  std::vector<ReceiverTruth> still{{1, p, Eigen::Vector3d::Zero()}};
  auto obs = synthesize_epoch(sky, f.eph, still, ErrorBudget::zero(), AmbiguityTable{}, 100, 10.0, 0.1);
  CHECK(doppler_velocity(obs, f.eph, p).velocity.norm() < 1e-9);

  const Eigen::Vector3d v = 10.0 / 3.6 * Eigen::Vector3d(std::cos(0.7), std::sin(0.7), 0.0);
  std::vector<ReceiverTruth> moving{{1, p, v}};
  obs = synthesize_epoch(sky, f.eph, moving, ErrorBudget::zero(), AmbiguityTable{}, 100, 10.0, 0.1);
  const VelocitySolution vs = doppler_velocity(obs, f.eph, p);
  CHECK(std::abs(vs.velocity.norm() - 2.78) < 0.0025);
  CHECK((vs.velocity - v).norm() < 1e-6);
  CHECK(vs.n_sats == static_cast<int>(sky.size()));

  obs.resize(3);
  CHECK_THROWS_AS(doppler_velocity(obs, f.eph, p), Error);
}

TEST_CASE("doppler velocity error at default noise") {
  const auto& f = noise_free();
  const ScenarioAsset& a = f.asset;
  const auto orbits = a.constellation();
  const EcefPoint site = geodetic_to_ecef(a.site);
  ErrorBudget b;
  b.seed = 11;
  const Eigen::Vector3d p(0.0, 0.0, 3.5), v(2.0, 1.0, 0.0);
  double sum2 = 0.0;
  double dop2 = 0.0;
  const int n = 1000;
  for (int k = 0; k < n; ++k) {
    const double t = 0.06 * k;
    const SkyView sky = visible_sky(orbits, t, site, a.site, 5.0);
    std::vector<ReceiverTruth> rcv{{1, p, v}};
    const auto obs = synthesize_epoch(sky, f.eph, rcv, b, AmbiguityTable{}, static_cast<std::size_t>(k), t, 0.1);
    const VelocitySolution vs = doppler_velocity(obs, f.eph, p);
    sum2 += (vs.velocity - v).squaredNorm();
    // Oracle: trace of the position block of (H^T H)^-1 scales the noise.
    Eigen::MatrixXd h(obs.size(), 4);
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const Eigen::Vector3d u = (f.eph.state(obs[i].sat, t).position - p).normalized();
      h.row(static_cast<Eigen::Index>(i)) << -u.transpose(), 1.0;
    }
    dop2 += (h.transpose() * h).inverse().topLeftCorner<3, 3>().trace();
  }
  const double rms = std::sqrt(sum2 / n);
  const double expected = b.doppler_noise_std * std::sqrt(dop2 / n);
  MESSAGE("velocity rms " << rms << " expected " << expected);
  CHECK(rms == doctest::Approx(expected).scale(0).epsilon(0.1));
  CHECK(rms < 0.05);
}

TEST_CASE("float solution errors follow the formal covariance") {
  // Noise model matched to the estimator's weighting, so the reported
  // covariance is the true error covariance.
  ScenarioAsset a = default_scenario();
  a.errors.elevation_noise_inflation = true;
  const SimFixture f(a, 6, 10.0);
  double chi_b = 0.0, chi_n = 0.0;
  double dof_n = 0.0;
  std::size_t epochs = 0;
  for (std::size_t i = 0; i < f.epochs.size(); ++i) {
    const auto& e = f.epochs[i];
    const auto dds = form_double_differences(e.by_receiver[2], e.by_receiver[0]);
    const FloatSolution s = float_solution(dds, f.eph, e.t, a.base_enu, a.base_enu, a.rtk);
    const auto m = static_cast<Eigen::Index>(dds.size());
    const Eigen::Vector3d db = s.baseline - f.run.antennas[i].positions[1];
    Eigen::VectorXd dn(m);
    for (Eigen::Index k = 0; k < m; ++k)
      dn(k) = s.float_ambiguities(k) - static_cast<double>(f.dd_ambiguity(2, 0, dds[k].ref, dds[k].sat, e.t));
    chi_b += db.dot(s.covariance.topLeftCorner<3, 3>().ldlt().solve(db));
    chi_n += dn.dot(s.covariance.bottomRightCorner(m, m).ldlt().solve(dn));
    dof_n += static_cast<double>(m);
    ++epochs;
  }
  MESSAGE("mean chi2 baseline " << chi_b / epochs << " (3), ambiguities " << chi_n / epochs << " ("
                                << dof_n / epochs << ")");
  CHECK(chi_b / epochs == doctest::Approx(3.0).scale(0).epsilon(0.15));
  CHECK(chi_n / dof_n == doctest::Approx(1.0).scale(0).epsilon(0.15));
}
