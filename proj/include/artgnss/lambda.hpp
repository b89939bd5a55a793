#pragma once

#include <cstddef>

#include <Eigen/Core>

namespace artgnss {

struct IlsResult {
  Eigen::VectorXi best;
  Eigen::VectorXi second;
  double best_norm = 0.0;    // (a - z)^T Q^-1 (a - z)
  double second_norm = 0.0;
  double ratio = 0.0;        // second_norm / best_norm, capped at kMaxRatio
};

inline constexpr double kMaxRatio = 999.9;

/// Integer least squares via LAMBDA-style decorrelation (integer Gauss
/// transforms + permutations) and depth-first ellipsoid search for the two
/// best candidates.
///
/// Exact ties resolve as round-half-toward-zero per component: the float
/// vector is nudged toward zero by 1e-9 cycles before the search.
/// Throws Error(InvalidArgument) for a non-SPD covariance and
/// Error(SearchOverflow) after `max_search_steps` search steps.
IlsResult resolve_ambiguities(const Eigen::VectorXd& float_ambiguities, const Eigen::MatrixXd& covariance,
                              std::size_t max_search_steps = 1'000'000);

/// Throws Error(InvalidArgument) for ratio < 1.
bool ratio_test(double ratio, double threshold = 3.0);

}  // namespace artgnss
