#pragma once

// Quadratic rough volatility device: multi-factor approximation of the power
// kernel K(t) = t^{H-1/2}/gamma(H+1/2), exponentially decayed Z factors over
// past returns, quadratic (a, b, c) calibration and the lambda blend.

#include <span>
#include <vector>

#include "volcast/common.hpp"

namespace volcast {

struct KernelNodes {
  double H = 0;
  double t_min = 0, t_max = 0;
  std::vector<double> gammas;   // strictly increasing decay rates, per day
  std::vector<double> weights;  // positive cell masses
};

// Splits the inverse-gamma (Laplace) representation of K into n rate cells:
// eta_0 = 0 so the leading cell absorbs the slow tail exactly, eta_1..eta_n
// geometric spanning [1/t_max, 1/t_min]. Each cell contributes its mass as
// the weight and its barycenter as the decay rate.
KernelNodes kernel_nodes(double H, int n, double t_min, double t_max);

// Mass and barycenter of one rate cell [eta0, eta1] of the representation
// density gamma^{-H-1/2} / (gamma(H+1/2) gamma(1/2-H)). Exposed for the
// quadrature cross-checks.
struct KernelCell {
  double mass = 0;
  double rate = 0;
};
KernelCell kernel_cell(double H, double eta0, double eta1);

// Relative L2 distance between sum_i c_i e^{-gamma_i t} and K(t) on a dense
// uniform grid over [t_min, t_max].
double kernel_l2_error(const KernelNodes& nodes, int grid = 20000);

struct QrhState {
  std::vector<double> z_factors;
  double z = 0;  // aggregate sum_i c_i Z_i, maintained incrementally
};

QrhState init_state(const KernelNodes& nodes);

// Z_{i,t} = e^{-gamma_i} Z_{i,t-1} + r_t, then z = sum_i c_i Z_{i,t}.
QrhState advance_z(QrhState state, const KernelNodes& nodes, double r);

struct QrhParams {
  double a = 0, b = 0, c = 0;
  double lambda = 0;  // blend weight, [0, 1]
};

struct QrhCalibrationReport {
  bool a_floored = false;
  bool c_floored = false;
  bool b_negative = false;  // b is left unconstrained; sign reported only
};

// OLS of var targets on (1, Z, Z^2); maps (k0, k1, k2) to a = k2,
// b = -k1/(2a), c = k0 - a b^2. a and c are floored at 1e-12 when the
// unconstrained fit violates positivity (flagged in the report).
QrhParams calibrate_qrh(std::span<const double> z_prev, std::span<const double> var_targets,
                        QrhCalibrationReport* report = nullptr);

// sqrt(a (z_prev - b)^2 + c), in the calibration target's normalization.
double qrh_forecast(const QrhParams& params, double z_prev);

// (1 - lambda) rfsv + lambda qrh, both in raw sigma units.
double blend(double rfsv, double qrh, double lambda);

}  // namespace volcast
