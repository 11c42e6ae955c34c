#pragma once

// Rough volatility toolkit: variogram Hurst/nu estimation, the fractional
// predictor with truncated power-law weights, and an exact fBm simulator
// (circulant embedding) used as an independent oracle.

#include <cstdint>
#include <span>
#include <vector>

#include "volcast/common.hpp"

namespace volcast {

struct RfsvParams {
  double H = 0;   // Hurst exponent, (0, 1/2) for the predictor branch
  double nu = 0;  // vol-of-log-vol
  double c = 1;   // lognormal correction, >= 1
};

struct HurstEstimate {
  double H = 0;       // clamped to [0.01, 0.49]
  double H_raw = 0;   // regression value before clamping
  double nu = 0;
  bool clamped = false;
};

// Variogram estimator: m(2,d) = mean |log sigma_{t+d} - log sigma_t|^2 over
// pairs d apart, then a least-squares line of log m on log d for d=1..delta_max
// gives H = slope/2 and nu = exp(intercept/2). Takes positive sigmas and works
// on log-ratios so a global rescaling cannot move H.
HurstEstimate estimate_hurst(std::span<const double> sigma, int delta_max = 30);

// Pooled variant: increments are collected within each series (typically one
// per coin segment) and pooled per lag; no cross-series pairs are formed.
HurstEstimate estimate_hurst_pooled(const std::vector<std::vector<double>>& sigma_series,
                                    int delta_max = 30);

// c = exp(gamma(3/2-H) nu^2 / (2 gamma(H+1/2) gamma(2-2H)))
double rfsv_correction(double H, double nu);

struct FractionalWeights {
  double H = 0;
  std::vector<double> w;  // positive, strictly decreasing, sums to 1
};

// Power-law kernel cos(H pi)/pi * 1/((k+1) k^{H+1/2}) at integer lags k=1..N,
// renormalized to sum 1 (the continuous kernel integrates to 1 over (0,inf)).
FractionalWeights fractional_weights(double H, int N);

// history holds chronological raw sigmas; the last N entries are used with
// weight w_1 on the most recent. forecast = c * exp(sum_k w_k log sigma_{t-k}).
double rfsv_forecast(const RfsvParams& params, const FractionalWeights& weights,
                     std::span<const double> history);

// Exact-in-distribution fBm via Davies-Harte circulant embedding of fGN.
// Returns n+1 points starting at 0 (n increments); deterministic per seed.
std::vector<double> simulate_fbm(double H, std::size_t n, std::uint64_t seed);

// The underlying fGN sample, exposed for the statistical oracles.
std::vector<double> simulate_fgn(double H, std::size_t n, std::uint64_t seed);

}  // namespace volcast
