#pragma once

#include <Eigen/Dense>

namespace volcast {

// Least squares through the normal equations. Well-conditioned systems are
// solved exactly (eigendecomposition of X'X); near-collinear ones get a ridge
// jitter of 1e-10 * trace(X'X)/dim so HAR-style overlapping windows stay
// solvable. Structurally singular designs throw FitError.
struct OlsResult {
  Eigen::VectorXd beta;
  bool jittered = false;   // ridge jitter was applied
  double min_eig = 0;      // spectrum of X'X, for diagnostics
  double max_eig = 0;
};

OlsResult ols_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

}  // namespace volcast
