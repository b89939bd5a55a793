#include <cmath>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "artgnss/error.hpp"
#include "artgnss/graph.hpp"
#include "artgnss/kernels.hpp"

namespace artgnss {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

struct Linearized {
  SpMat jacobian;
  Eigen::VectorXd residual;
};

Linearized assemble(const std::vector<FactorLinearization>& lin, Eigen::Index rows, Eigen::Index cols) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(lin.size() * 24);
  Linearized out;
  out.residual.resize(rows);
  Eigen::Index row = 0;
  for (const auto& l : lin) {
    for (int r = 0; r < l.dim; ++r) out.residual(row + r) = l.residual(r);
    for (int b = 0; b < l.num_blocks; ++b) {
      const auto col = static_cast<Eigen::Index>(3 * l.variables[b]);
      for (int r = 0; r < l.dim; ++r)
        for (int c = 0; c < 3; ++c) {
          const double v = l.jacobians[b](r, c);
          if (v != 0.0) trip.emplace_back(row + r, col + c, v);
        }
    }
    row += l.dim;
  }
  out.jacobian.resize(rows, cols);
  out.jacobian.setFromTriplets(trip.begin(), trip.end());
  return out;
}

Eigen::VectorXd flatten(const EpochStates& s) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(12 * s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) x.segment<12>(static_cast<Eigen::Index>(12 * i)) = s[i];
  return x;
}

EpochStates unflatten(const Eigen::VectorXd& x) {
  EpochStates s(static_cast<std::size_t>(x.size() / 12));
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = x.segment<12>(static_cast<Eigen::Index>(12 * i));
  return s;
}

/// Gauss-Newton step from the normal equations; adds diagonal damping when
/// the plain factorization fails.
Eigen::VectorXd gauss_newton_step(Eigen::SimplicialLLT<SpMat>& llt, const SpMat& h, const Eigen::VectorXd& g) {
  llt.factorize(h);
  if (llt.info() == Eigen::Success) return llt.solve(-g);
  SpMat id(h.rows(), h.cols());
  id.setIdentity();
  const double scale = std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());
  for (double lambda = 1e-8; lambda <= 1e2; lambda *= 10.0) {
    llt.factorize(h + (lambda * scale) * id);
    if (llt.info() == Eigen::Success) return llt.solve(-g);
  }
  throw Error(ErrorCode::NumericalFailure, "normal matrix could not be factored even with damping");
}

void fill_residual_stats(const FactorGraph& graph, const EpochStates& states, SolveReport& report) {
  std::array<double, 4> sum{};
  std::array<std::size_t, 4> n{};
  for (const Factor& f : graph.factors()) {
    const auto k = static_cast<std::size_t>(f.kind);
    sum[k] += factor_residual(f, states).squaredNorm();
    n[k] += static_cast<std::size_t>(f.residual_dim());
    ++report.factor_counts[k];
  }
  for (std::size_t k = 0; k < 4; ++k) report.residual_rms[k] = n[k] ? std::sqrt(sum[k] / double(n[k])) : 0.0;
}

}  // namespace

OptimizeResult optimize(const FactorGraph& graph, const EpochStates& initial, const OptimizerSettings& settings) {
  if (initial.size() != graph.num_epochs())
    throw Error(ErrorCode::InvalidArgument, "initial states do not match the graph size");
  if (settings.max_iterations < 1 || !(settings.initial_radius > 0.0))
    throw Error(ErrorCode::InvalidArgument, "invalid optimizer settings");
  graph.check_gauge();

  Eigen::Index rows = 0;
  for (const Factor& f : graph.factors()) rows += f.residual_dim();
  const auto cols = static_cast<Eigen::Index>(12 * graph.num_epochs());

  auto linearize = [&](const EpochStates& s, std::vector<FactorLinearization>& lin) {
    if (settings.parallel)
      kernels::linearize_parallel(graph, s, lin);
    else
      kernels::linearize_serial(graph, s, lin);
  };

  OptimizeResult result;
  SolveReport& rep = result.report;
  EpochStates states = initial;
  Eigen::VectorXd x = flatten(states);
  std::vector<FactorLinearization> lin;
  linearize(states, lin);
  double cost = kernels::whitened_cost(lin);
  rep.initial_objective = cost;
  rep.objective_history.push_back(cost);

  Eigen::SimplicialLLT<SpMat> llt;
  bool pattern_ready = false;
  double radius = settings.initial_radius;
  bool relinearize = true;
  Linearized sys;
  SpMat h;
  Eigen::VectorXd g, h_gn;

  rep.termination = "max_iterations";
  for (int iter = 0; iter < settings.max_iterations; ++iter) {
    if (relinearize) {
      sys = assemble(lin, rows, cols);
      h = SpMat(sys.jacobian.transpose() * sys.jacobian);
      g = sys.jacobian.transpose() * sys.residual;
      if (g.lpNorm<Eigen::Infinity>() < settings.gradient_tolerance) {
        rep.converged = true;
        rep.termination = "gradient";
        break;
      }
      if (!pattern_ready) {
        llt.analyzePattern(h);
        pattern_ready = true;
      }
      h_gn = gauss_newton_step(llt, h, g);
      relinearize = false;
    }
    rep.iterations = iter + 1;

    // Dogleg step inside the trust region.
    Eigen::VectorXd step;
    const double g_norm = g.norm();
    const double jg_sq = (sys.jacobian * g).squaredNorm();
    const double alpha = jg_sq > 0.0 ? g_norm * g_norm / jg_sq : 0.0;
    if (h_gn.norm() <= radius) {
      step = h_gn;
    } else if (alpha * g_norm >= radius) {
      step = -(radius / g_norm) * g;
    } else {
      const Eigen::VectorXd a = -alpha * g;
      const Eigen::VectorXd d = h_gn - a;
      const double c = a.dot(d);
      const double dd = d.squaredNorm();
      const double rem = radius * radius - a.squaredNorm();
      const double beta = c <= 0.0 ? (-c + std::sqrt(c * c + dd * rem)) / dd : rem / (c + std::sqrt(c * c + dd * rem));
      step = a + beta * d;
    }

    const double predicted = -2.0 * g.dot(step) - (sys.jacobian * step).squaredNorm();
    const Eigen::VectorXd x_new = x + step;
    EpochStates trial = unflatten(x_new);
    std::vector<FactorLinearization> trial_lin;
    linearize(trial, trial_lin);
    const double trial_cost = kernels::whitened_cost(trial_lin);
    const double actual = cost - trial_cost;
    const double rho = predicted > 0.0 ? actual / predicted : -1.0;

    if (rho > 0.75)
      radius *= 2.0;
    else if (rho < 0.25)
      radius *= 0.5;

    if (trial_cost < cost) {
      x = x_new;
      states = std::move(trial);
      lin = std::move(trial_lin);
      const double prev = cost;
      cost = trial_cost;
      rep.objective_history.push_back(cost);
      relinearize = true;
      if (actual <= settings.relative_tolerance * prev) {
        rep.converged = true;
        rep.termination = "relative_decrease";
        break;
      }
    } else {
      ++rep.rejected_steps;
      if (radius <= 1e-12 * (x.norm() + 1e-12)) {
        rep.converged = true;
        rep.termination = "trust_region_collapsed";
        break;
      }
    }
  }

  rep.final_objective = cost;
  fill_residual_stats(graph, states, rep);
  result.states = std::move(states);
  return result;
}

}  // namespace artgnss
