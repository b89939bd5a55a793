#include "artgnss/lambda.hpp"

#include <cmath>
#include <numeric>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "artgnss/error.hpp"

namespace artgnss {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Q = L^T diag(D) L with L unit lower triangular.
bool ltdl(const MatrixXd& q, MatrixXd& l, VectorXd& d) {
  const Eigen::Index n = q.rows();
  MatrixXd a = q;
  l.setZero(n, n);
  d.resize(n);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    d(i) = a(i, i);
    if (!(d(i) > 0.0)) return false;
    const double s = std::sqrt(d(i));
    for (Eigen::Index j = 0; j <= i; ++j) l(i, j) = a(i, j) / s;
    for (Eigen::Index j = 0; j < i; ++j)
      for (Eigen::Index k = 0; k <= j; ++k) a(j, k) -= l(i, k) * l(i, j);
    for (Eigen::Index j = 0; j <= i; ++j) l(i, j) /= l(i, i);
  }
  return true;
}

void integer_gauss(MatrixXd& l, MatrixXd& z, Eigen::Index i, Eigen::Index j) {
  const double mu = std::nearbyint(l(i, j));
  if (mu == 0.0) return;
  const Eigen::Index n = l.rows();
  for (Eigen::Index k = i; k < n; ++k) l(k, j) -= mu * l(k, i);
  for (Eigen::Index k = 0; k < n; ++k) z(k, j) -= mu * z(k, i);
}

void permute(MatrixXd& l, VectorXd& d, MatrixXd& z, Eigen::Index j, double del) {
  const Eigen::Index n = l.rows();
  const double eta = d(j) / del;
  const double lam = d(j + 1) * l(j + 1, j) / del;
  d(j) = eta * d(j + 1);
  d(j + 1) = del;
  for (Eigen::Index k = 0; k < j; ++k) {
    const double a0 = l(j, k), a1 = l(j + 1, k);
    l(j, k) = -l(j + 1, j) * a0 + a1;
    l(j + 1, k) = eta * a0 + lam * a1;
  }
  l(j + 1, j) = lam;
  for (Eigen::Index k = j + 2; k < n; ++k) std::swap(l(k, j), l(k, j + 1));
  for (Eigen::Index k = 0; k < n; ++k) std::swap(z(k, j), z(k, j + 1));
}

void reduce(MatrixXd& l, VectorXd& d, MatrixXd& z) {
  const Eigen::Index n = l.rows();
  Eigen::Index j = n - 2, k = n - 2;
  while (j >= 0) {
    if (j <= k)
      for (Eigen::Index i = j + 1; i < n; ++i) integer_gauss(l, z, i, j);
    const double del = d(j) + l(j + 1, j) * l(j + 1, j) * d(j + 1);
    if (del + 1e-6 < d(j + 1)) {
      permute(l, d, z, j, del);
      k = j;
      j = n - 2;
    } else {
      --j;
    }
  }
}

double sgn(double x) { return x <= 0.0 ? -1.0 : 1.0; }
double round_half_up(double x) { return std::floor(x + 0.5); }

// Depth-first search for the two integer vectors minimizing
// (zs - z)^T (L^T D L)^-1 (zs - z).
void search(const MatrixXd& l, const VectorXd& d, const VectorXd& zs, std::size_t max_steps,
            std::array<VectorXd, 2>& cand, std::array<double, 2>& norms) {
  const Eigen::Index n = l.rows();
  MatrixXd s = MatrixXd::Zero(n, n);
  VectorXd dist(n), zb(n), z(n), step(n);
  double maxdist = 1e99;
  int found = 0, imax = 0;

  Eigen::Index k = n - 1;
  dist(k) = 0.0;
  zb(k) = zs(k);
  z(k) = round_half_up(zb(k));
  double y = zb(k) - z(k);
  step(k) = sgn(y);

  std::size_t c = 0;
  for (; c < max_steps; ++c) {
    const double newdist = dist(k) + y * y / d(k);
    if (newdist < maxdist) {
      if (k != 0) {
        dist(--k) = newdist;
        for (Eigen::Index i = 0; i <= k; ++i) s(k, i) = s(k + 1, i) + (z(k + 1) - zb(k + 1)) * l(k + 1, i);
        zb(k) = zs(k) + s(k, k);
        z(k) = round_half_up(zb(k));
        y = zb(k) - z(k);
        step(k) = sgn(y);
      } else {
        if (found < 2) {
          if (found == 0 || newdist > norms[imax]) imax = found;
          cand[found] = z;
          norms[found] = newdist;
          ++found;
        } else {
          if (newdist < norms[imax]) {
            cand[imax] = z;
            norms[imax] = newdist;
            imax = norms[0] < norms[1] ? 1 : 0;
          }
          maxdist = norms[imax];
        }
        z(0) += step(0);
        y = zb(0) - z(0);
        step(0) = -step(0) - sgn(step(0));
      }
    } else {
      if (k == n - 1) break;
      ++k;
      z(k) += step(k);
      y = zb(k) - z(k);
      step(k) = -step(k) - sgn(step(k));
    }
  }
  if (c >= max_steps) throw Error(ErrorCode::SearchOverflow, "integer search exceeded step cap");
  if (found < 2) throw Error(ErrorCode::NumericalFailure, "integer search found fewer than two candidates");
  if (norms[1] < norms[0]) {
    std::swap(norms[0], norms[1]);
    std::swap(cand[0], cand[1]);
  }
}

}  // namespace

IlsResult resolve_ambiguities(const Eigen::VectorXd& float_ambiguities, const Eigen::MatrixXd& covariance,
                              std::size_t max_search_steps) {
  const Eigen::Index n = float_ambiguities.size();
  if (n == 0 || covariance.rows() != n || covariance.cols() != n)
    throw Error(ErrorCode::InvalidArgument, "ambiguity vector and covariance sizes disagree");
  if (!covariance.allFinite() || !float_ambiguities.allFinite())
    throw Error(ErrorCode::InvalidArgument, "non-finite ambiguity input");

  // Work on the fractional part near zero; the integer offset returns at the end.
  const VectorXd offset = float_ambiguities.array().round();
  VectorXd a = float_ambiguities - offset;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(float_ambiguities(i)) > 0.0) a(i) -= std::copysign(1e-9, float_ambiguities(i));
  }

  MatrixXd l;
  VectorXd d;
  if (!ltdl(0.5 * (covariance + covariance.transpose()), l, d))
    throw Error(ErrorCode::InvalidArgument, "ambiguity covariance is not positive definite");
  MatrixXd z = MatrixXd::Identity(n, n);
  reduce(l, d, z);
  const VectorXd zs = z.transpose() * a;

  std::array<VectorXd, 2> cand;
  std::array<double, 2> norms{};
  if (n == 1) {
    // Two nearest integers in one dimension.
    const double best = round_half_up(zs(0));
    const double other = zs(0) - best > 0.0 ? best + 1.0 : best - 1.0;
    cand = {VectorXd::Constant(1, best), VectorXd::Constant(1, other)};
    norms = {(zs(0) - best) * (zs(0) - best) / d(0), (zs(0) - other) * (zs(0) - other) / d(0)};
  } else {
    search(l, d, zs, max_search_steps, cand, norms);
  }

  // Back-transform: a_int = Z^-T z_int. Z is unimodular so the result is integral.
  const Eigen::FullPivLU<MatrixXd> zt(z.transpose());
  IlsResult out;
  out.best = (zt.solve(cand[0]).array().round() + offset.array()).cast<int>();
  out.second = (zt.solve(cand[1]).array().round() + offset.array()).cast<int>();
  out.best_norm = norms[0];
  out.second_norm = norms[1];
  out.ratio = norms[0] > 0.0 ? std::min(norms[1] / norms[0], kMaxRatio) : kMaxRatio;
  return out;
}

bool ratio_test(double ratio, double threshold) {
  if (!(ratio >= 1.0)) throw Error(ErrorCode::InvalidArgument, "ratio must be >= 1");
  return ratio >= threshold;
}

}  // namespace artgnss
