#include "artgnss/rtk.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "artgnss/error.hpp"
#include "artgnss/lambda.hpp"

namespace artgnss {

const char* to_string(FixStatus s) noexcept {
  switch (s) {
    case FixStatus::Fix: return "FIX";
    case FixStatus::Float: return "FLOAT";
    case FixStatus::None: return "NONE";
  }
  return "NONE";
}

char status_code(FixStatus s) noexcept {
  switch (s) {
    case FixStatus::Fix: return 'X';
    case FixStatus::Float: return 'F';
    case FixStatus::None: return 'N';
  }
  return 'N';
}

std::vector<DdObservation> form_double_differences(std::span<const GnssObservation> rover_obs,
                                                   std::span<const GnssObservation> base_obs) {
  std::map<SatelliteId, const GnssObservation*> base_by_sat;
  for (const auto& o : base_obs) base_by_sat[o.sat] = &o;

  // Common satellites grouped by system, ordered by id inside each group.
  std::map<GnssSystem, std::vector<std::pair<const GnssObservation*, const GnssObservation*>>> common;
  for (const auto& r : rover_obs) {
    auto it = base_by_sat.find(r.sat);
    if (it != base_by_sat.end()) common[r.sat.system].emplace_back(&r, it->second);
  }
  for (auto& [sys, list] : common)
    std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.first->sat < b.first->sat; });

  std::vector<DdObservation> out;
  for (const auto& [sys, list] : common) {
    if (list.size() < 2) continue;
    const auto ref = std::max_element(list.begin(), list.end(), [](const auto& a, const auto& b) {
      return a.first->elevation < b.first->elevation;
    });
    const GnssObservation& rk = *ref->first;
    const GnssObservation& bk = *ref->second;
    const double sd_phase_ref = rk.carrier_phase - bk.carrier_phase;
    const double sd_code_ref = rk.pseudorange - bk.pseudorange;
    for (const auto& [r, b] : list) {
      if (r->sat == rk.sat) continue;
      DdObservation dd;
      dd.ref = rk.sat;
      dd.sat = r->sat;
      dd.rover = r->receiver;
      dd.base = b->receiver;
      dd.dd_phase = (r->carrier_phase - b->carrier_phase) - sd_phase_ref;
      dd.dd_pseudorange = (r->pseudorange - b->pseudorange) - sd_code_ref;
      dd.wavelength = r->wavelength;
      dd.ref_elevation = rk.elevation;
      dd.sat_elevation = r->elevation;
      out.push_back(dd);
    }
  }
  if (out.empty()) throw Error(ErrorCode::InsufficientSatellites, "fewer than two common satellites in any system");
  return out;
}

namespace {

double elevation_variance(double sigma, double elevation_deg) {
  const double s = std::max(std::sin(elevation_deg * kDegToRad), 0.05);
  return sigma * sigma / (s * s);
}

// DD covariance: both receivers contribute sigma^2/sin^2(el) per satellite;
// DDs sharing a reference satellite correlate through it.
Eigen::MatrixXd dd_covariance(std::span<const DdObservation> dds, double sigma) {
  const auto m = static_cast<Eigen::Index>(dds.size());
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (dds[i].ref != dds[j].ref) continue;
      q(i, j) = 2.0 * elevation_variance(sigma, dds[i].ref_elevation);
    }
    q(i, i) += 2.0 * elevation_variance(sigma, dds[i].sat_elevation);
  }
  return q;
}

struct SatGeometry {
  std::vector<Eigen::Vector3d> ref_pos, sat_pos;
};

SatGeometry satellite_positions(std::span<const DdObservation> dds, const Ephemeris& eph, double t) {
  SatGeometry g;
  for (const auto& dd : dds) {
    g.ref_pos.push_back(eph.state(dd.ref, t).position);
    g.sat_pos.push_back(eph.state(dd.sat, t).position);
  }
  return g;
}

// DD geometric range at rover position x with the base fixed, plus d/dx.
void dd_range(const SatGeometry& g, const Eigen::Vector3d& x, const Eigen::Vector3d& base, Eigen::VectorXd& rho,
              Eigen::MatrixXd& h) {
  const auto m = static_cast<Eigen::Index>(g.sat_pos.size());
  rho.resize(m);
  h.resize(m, 3);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Vector3d lr = g.sat_pos[i] - x, lb = g.sat_pos[i] - base;
    const Eigen::Vector3d kr = g.ref_pos[i] - x, kb = g.ref_pos[i] - base;
    const double rl = lr.norm(), rk = kr.norm();
    rho(i) = (rl - lb.norm()) - (rk - kb.norm());
    h.row(i) = (-lr / rl + kr / rk).transpose();
  }
}

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& q) {
  Eigen::LLT<Eigen::MatrixXd> llt(q);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::SingularGeometry, "DD covariance not positive definite");
  return llt.solve(Eigen::MatrixXd::Identity(q.rows(), q.cols()));
}

int count_satellites(std::span<const DdObservation> dds) {
  std::vector<SatelliteId> ids;
  for (const auto& dd : dds) {
    ids.push_back(dd.ref);
    ids.push_back(dd.sat);
  }
  std::sort(ids.begin(), ids.end());
  return static_cast<int>(std::unique(ids.begin(), ids.end()) - ids.begin());
}

}  // namespace

FloatSolution float_solution(std::span<const DdObservation> dds, const Ephemeris& eph, double t,
                             const Eigen::Vector3d& rover_approx, const Eigen::Vector3d& base_pos,
                             const RtkSettings& settings) {
  const auto m = static_cast<Eigen::Index>(dds.size());
  if (m < 4) throw Error(ErrorCode::InsufficientSatellites, "float solution needs at least 4 double differences");

  const SatGeometry geom = satellite_positions(dds, eph, t);
  const Eigen::MatrixXd w_phase = spd_inverse(dd_covariance(dds, settings.phase_sigma));
  const Eigen::MatrixXd w_code = spd_inverse(dd_covariance(dds, settings.code_sigma));
  Eigen::VectorXd dd_phase(m), dd_code(m), lambda(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    dd_phase(i) = dds[i].dd_phase;
    dd_code(i) = dds[i].dd_pseudorange;
    lambda(i) = dds[i].wavelength;
  }

  FloatSolution out;
  Eigen::Vector3d x = rover_approx;
  Eigen::VectorXd rho;
  Eigen::MatrixXd h;
  Eigen::MatrixXd normal(3 + m, 3 + m);
  bool converged = false;
  for (int iter = 1; iter <= settings.max_iterations; ++iter) {
    dd_range(geom, x, base_pos, rho, h);
    // Unknowns: position update (3) and DD ambiguities in cycles (m).
    Eigen::MatrixXd jp(m, 3 + m), jc(m, 3 + m);
    jp << h, Eigen::MatrixXd(lambda.asDiagonal());
    jc << h, Eigen::MatrixXd::Zero(m, m);
    const Eigen::VectorXd yp = dd_phase - rho, yc = dd_code - rho;
    normal = jp.transpose() * w_phase * jp + jc.transpose() * w_code * jc;
    const Eigen::VectorXd rhs = jp.transpose() * w_phase * yp + jc.transpose() * w_code * yc;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
    if (ldlt.info() != Eigen::Success) throw Error(ErrorCode::SingularGeometry, "float normal matrix factorization failed");
    const Eigen::VectorXd sol = ldlt.solve(rhs);
    x += sol.head<3>();
    out.float_ambiguities = sol.tail(m);
    out.iterations = iter;
    if (sol.head<3>().norm() < settings.convergence) {
      converged = true;
      break;
    }
  }
  if (!converged) throw Error(ErrorCode::NoConvergence, "float solution did not converge");

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normal, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > settings.max_condition)
    throw Error(ErrorCode::SingularGeometry, "float normal matrix is ill-conditioned");

  out.baseline = x - base_pos;
  out.covariance = spd_inverse(normal);
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

namespace {

// Phase-only position solve with ambiguities held at integers.
Eigen::Vector3d fixed_baseline(std::span<const DdObservation> dds, const SatGeometry& geom, const Eigen::VectorXi& n,
                               const Eigen::Vector3d& start, const Eigen::Vector3d& base_pos,
                               const RtkSettings& settings) {
  const auto m = static_cast<Eigen::Index>(dds.size());
  const Eigen::MatrixXd w = spd_inverse(dd_covariance(dds, settings.phase_sigma));
  Eigen::VectorXd y0(m);
  for (Eigen::Index i = 0; i < m; ++i) y0(i) = dds[i].dd_phase - dds[i].wavelength * static_cast<double>(n(i));
  Eigen::Vector3d x = start;
  Eigen::VectorXd rho;
  Eigen::MatrixXd h;
  for (int iter = 0; iter < settings.max_iterations; ++iter) {
    dd_range(geom, x, base_pos, rho, h);
    const Eigen::Matrix3d a = h.transpose() * w * h;
    const Eigen::Vector3d dx = a.ldlt().solve(h.transpose() * w * (y0 - rho));
    x += dx;
    if (dx.norm() < 1e-10) break;
  }
  return x - base_pos;
}

}  // namespace

RtkSolution rtk_solve(std::span<const GnssObservation> rover_obs, std::span<const GnssObservation> base_obs,
                      const Eigen::Vector3d& rover_approx, const Eigen::Vector3d& base_pos, const Ephemeris& eph,
                      const RtkSettings& settings) {
  RtkSolution out;
  if (rover_obs.empty()) {
    out.diagnostic = "no rover observations";
    return out;
  }
  const double t = rover_obs.front().t;
  try {
    const std::vector<DdObservation> dds = form_double_differences(rover_obs, base_obs);
    out.n_sats = count_satellites(dds);
    for (const auto& dd : dds) out.dd_pairs.emplace_back(dd.ref, dd.sat);

    const FloatSolution fs = float_solution(dds, eph, t, rover_approx, base_pos, settings);
    const auto m = fs.float_ambiguities.size();
    const Eigen::MatrixXd q_nn = fs.covariance.bottomRightCorner(m, m);
    const IlsResult ils = resolve_ambiguities(fs.float_ambiguities, q_nn);
    out.ratio = ils.ratio;
    out.baseline = fs.baseline;
    out.status = FixStatus::Float;
    if (ratio_test(std::max(ils.ratio, 1.0), settings.ratio_threshold)) {
      // Conditional baseline as a starting point, then a phase-only re-solve.
      const Eigen::MatrixXd q_bn = fs.covariance.topRightCorner(3, m);
      const Eigen::VectorXd da = fs.float_ambiguities - ils.best.cast<double>();
      const Eigen::Vector3d start = base_pos + fs.baseline - q_bn * q_nn.ldlt().solve(da);
      out.baseline = fixed_baseline(dds, satellite_positions(dds, eph, t), ils.best, start, base_pos, settings);
      out.fixed_ambiguities = ils.best;
      out.status = FixStatus::Fix;
    }
  } catch (const Error& e) {
    out.status = FixStatus::None;
    out.baseline.setZero();
    out.diagnostic = e.what();
  }
  return out;
}

RtkSolution moving_base_solve(std::span<const GnssObservation> obs_a, std::span<const GnssObservation> obs_b,
                              const Eigen::Vector3d& approx_a, const Eigen::Vector3d& approx_b,
                              const Ephemeris& eph, const RtkSettings& settings) {
  return rtk_solve(obs_b, obs_a, approx_b, approx_a, eph, settings);
}

VelocitySolution doppler_velocity(std::span<const GnssObservation> obs, const Ephemeris& eph,
                                  const Eigen::Vector3d& approx, const RtkSettings& settings) {
  const auto n = static_cast<Eigen::Index>(obs.size());
  if (n < 4) throw Error(ErrorCode::InsufficientSatellites, "Doppler velocity needs at least 4 satellites");
  Eigen::MatrixXd a(n, 4);
  Eigen::VectorXd y(n), w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto sat = eph.state(obs[i].sat, obs[i].t);
    const Eigen::Vector3d e = (sat.position - approx).normalized();
    // rate = e . (v_sat - v_rx) + drift
    a.row(i) << -e.transpose(), 1.0;
    y(i) = obs[i].doppler_range_rate - e.dot(sat.velocity);
    w(i) = 1.0 / (settings.doppler_sigma * settings.doppler_sigma);
  }
  const Eigen::Matrix4d normal = a.transpose() * w.asDiagonal() * a;
  const Eigen::LDLT<Eigen::Matrix4d> ldlt(normal);
  if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-12))
    throw Error(ErrorCode::SingularGeometry, "Doppler geometry is singular");
  const Eigen::Vector4d sol = ldlt.solve(a.transpose() * w.asDiagonal() * y);
  VelocitySolution out;
  out.velocity = sol.head<3>();
  out.clock_drift = sol(3);
  out.n_sats = static_cast<int>(n);
  return out;
}

}  // namespace artgnss
