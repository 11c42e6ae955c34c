#pragma once

// Synthetic market generator: rough (fBm-driven) log-volatility with an
// optional planted quadratic return-feedback component, emitted either as
// daily paths or as full 5-minute kline files.

#include <cstdint>
#include <string>
#include <vector>

#include "volcast/common.hpp"
#include "volcast/marketdata.hpp"

namespace volcast {

struct SynthConfig {
  int coins = 5;
  int days = 900;
  double hurst = 0.1;
  double nu = 0.3;
  // weight of the planted feedback variance component; 0 disables it and
  // leaves a pure rough-volatility generator
  double qrh_mix = 0.5;
  std::uint64_t seed = 7;
  Date start = Date::from_ymd(2020, 1, 1);
  int bars_per_day = 288;
  double base_sigma_min = 0.03, base_sigma_max = 0.05;
  double volume_scale = 5e5;  // daily quote volume scale
  // kernel used for the planted feedback factors
  int kernel_factors = 10;
  double kernel_tmin = 1, kernel_tmax = 500;
  double feedback_b = 0.02;  // planted vertex; a and c derive from base sigma
};

// Planted per-coin quadratic parameters (variance units match base_sigma^2).
struct PlantedParams {
  double base_sigma = 0;
  double a = 0, b = 0, c = 0;
};
PlantedParams planted_params(const SynthConfig& cfg, int coin_idx);

// Daily-level path: sigma_t and the daily return r_t = sigma_t * xi_t, with
// variance (1 - mix) base^2 exp(2 nu X_t) + mix (a (Z_{t-1} - b)^2 + c) where
// X is fBm(H) and Z runs the kernel factors over realized returns.
struct DailyPath {
  std::vector<double> sigma;
  std::vector<double> ret;
};
DailyPath synth_daily(const SynthConfig& cfg, int coin_idx);

// Full 5-minute bars for one coin; the daily variance recursion is driven by
// the realized close-to-close returns of the generated bars, so an ingest of
// these files reproduces the planted structure.
std::vector<Bar> synth_bars(const SynthConfig& cfg, int coin_idx);

std::string synth_symbol(int coin_idx);

// Writes <dir>/<symbol>.csv kline files for every coin; returns the paths.
std::vector<std::string> write_synth_klines(const SynthConfig& cfg, const std::string& dir);

}  // namespace volcast
