#include "volcast/qrh.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "volcast/ols.hpp"

namespace volcast {

KernelCell kernel_cell(double H, double eta0, double eta1) {
  // density gamma^{-H-1/2} / (G(H+1/2) G(1/2-H)); closed-form cell integrals
  const double a = 0.5 - H;
  const double norm = std::tgamma(H + 0.5) * std::tgamma(0.5 - H);
  const double pa0 = std::pow(eta0, a), pa1 = std::pow(eta1, a);
  KernelCell cell;
  cell.mass = (pa1 - pa0) / (a * norm);
  // barycenter: integral of gamma * density over the cell, divided by mass
  const double b = 1.5 - H;
  cell.rate = (a / b) * (std::pow(eta1, b) - std::pow(eta0, b)) / (pa1 - pa0);
  return cell;
}

KernelNodes kernel_nodes(double H, int n, double t_min, double t_max) {
  if (!(H > 0) || !(H < 0.5)) throw EstimationError("kernel_nodes: H must lie in (0, 1/2)");
  if (n < 2) throw EstimationError("kernel_nodes: need at least 2 factors");
  if (!(t_min > 0) || !(t_min < t_max)) throw EstimationError("kernel_nodes: need 0 < t_min < t_max");

  // eta_0 = 0: the first cell integrates the entire slow tail of the
  // representation in closed form; the rest split [1/t_max, 1/t_min]
  // geometrically. A grid starting at 1/t_max instead would drop that tail
  // and K would be underestimated at large t.
  std::vector<double> eta(n + 1);
  eta[0] = 0;
  const double lo = 1.0 / t_max, hi = 1.0 / t_min;
  for (int i = 1; i <= n; ++i)
    eta[i] = lo * std::pow(hi / lo, static_cast<double>(i - 1) / (n - 1));

  KernelNodes nodes;
  nodes.H = H;
  nodes.t_min = t_min;
  nodes.t_max = t_max;
  nodes.gammas.resize(n);
  nodes.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    KernelCell cell = kernel_cell(H, eta[i], eta[i + 1]);
    nodes.weights[i] = cell.mass;
    nodes.gammas[i] = cell.rate;
  }
  return nodes;
}

double kernel_l2_error(const KernelNodes& nodes, int grid) {
  const double gk = std::tgamma(nodes.H + 0.5);
  double num = 0, den = 0;
  for (int j = 0; j < grid; ++j) {
    double t = nodes.t_min + (nodes.t_max - nodes.t_min) * (j + 0.5) / grid;
    double k = std::pow(t, nodes.H - 0.5) / gk;
    double approx = 0;
    for (std::size_t i = 0; i < nodes.gammas.size(); ++i)
      approx += nodes.weights[i] * std::exp(-nodes.gammas[i] * t);
    num += (approx - k) * (approx - k);
    den += k * k;
  }
  return std::sqrt(num / den);
}

QrhState init_state(const KernelNodes& nodes) {
  QrhState s;
  s.z_factors.assign(nodes.gammas.size(), 0.0);
  return s;
}

QrhState advance_z(QrhState state, const KernelNodes& nodes, double r) {
  double z = 0;
  for (std::size_t i = 0; i < state.z_factors.size(); ++i) {
    state.z_factors[i] = std::exp(-nodes.gammas[i]) * state.z_factors[i] + r;
    z += nodes.weights[i] * state.z_factors[i];
  }
  state.z = z;
  return state;
}

QrhParams calibrate_qrh(std::span<const double> z_prev, std::span<const double> var_targets,
                        QrhCalibrationReport* report) {
  if (z_prev.size() != var_targets.size()) throw FitError("qrh calibration: length mismatch");
  if (z_prev.size() < 50) throw FitError("qrh calibration: need at least 50 rows");

  Eigen::MatrixXd x(z_prev.size(), 3);
  Eigen::VectorXd y(z_prev.size());
  for (std::size_t i = 0; i < z_prev.size(); ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = z_prev[i];
    x(i, 2) = z_prev[i] * z_prev[i];
    y(i) = var_targets[i];
  }
  Eigen::VectorXd k = ols_solve(x, y).beta;

  QrhCalibrationReport rep;
  QrhParams p;
  constexpr double floor = 1e-12;
  p.a = k(2);
  if (p.a < floor) {
    p.a = floor;
    rep.a_floored = true;
  }
  p.b = -k(1) / (2.0 * p.a);
  p.c = k(0) - p.a * p.b * p.b;
  if (p.c < floor) {
    p.c = floor;
    rep.c_floored = true;
  }
  rep.b_negative = p.b < 0;
  if (report) *report = rep;
  return p;
}

double qrh_forecast(const QrhParams& params, double z_prev) {
  double d = z_prev - params.b;
  return std::sqrt(params.a * d * d + params.c);
}

double blend(double rfsv, double qrh, double lambda) {
  if (!(lambda >= 0) || !(lambda <= 1)) throw ConfigError("blend: lambda must lie in [0, 1]");
  return (1.0 - lambda) * rfsv + lambda * qrh;
}

}  // namespace volcast
