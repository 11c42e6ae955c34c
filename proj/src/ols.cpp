#include "volcast/ols.hpp"

#include "volcast/common.hpp"

namespace volcast {

OlsResult ols_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const auto n = x.rows();
  const auto k = x.cols();
  if (n < k) throw FitError("ols: fewer rows than regressors");
  if (y.rows() != n) throw FitError("ols: x/y row mismatch");

  Eigen::MatrixXd xtx = x.transpose() * x;
  Eigen::VectorXd xty = x.transpose() * y;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(xtx);
  if (eig.info() != Eigen::Success) throw FitError("ols: eigendecomposition failed");
  const Eigen::VectorXd& lam = eig.eigenvalues();  // ascending
  double min_eig = lam(0), max_eig = lam(k - 1);

  if (!(max_eig > 0) || min_eig <= 1e-13 * max_eig)
    throw FitError("ols: singular design (constant or collinear regressors)");

  double jitter = 0;
  bool near_collinear = min_eig < 1e-9 * max_eig;
  if (near_collinear) jitter = 1e-10 * xtx.trace() / static_cast<double>(k);

  Eigen::VectorXd rot = eig.eigenvectors().transpose() * xty;
  for (Eigen::Index i = 0; i < k; ++i) rot(i) /= lam(i) + jitter;

  OlsResult r;
  r.beta = eig.eigenvectors() * rot;
  r.jittered = near_collinear;
  r.min_eig = min_eig;
  r.max_eig = max_eig;
  return r;
}

}  // namespace volcast
