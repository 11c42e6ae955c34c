#include "volcast/synth.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "volcast/qrh.hpp"
#include "volcast/roughvol.hpp"

namespace volcast {

PlantedParams planted_params(const SynthConfig& cfg, int coin_idx) {
  Rng rng(mix_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(coin_idx)));
  PlantedParams p;
  p.base_sigma = cfg.base_sigma_min + (cfg.base_sigma_max - cfg.base_sigma_min) * rng.uniform();
  // curvature scaled so a (Z - b)^2 is O(base^2) at typical |Z| ~ 0.05
  p.a = 0.5 * p.base_sigma * p.base_sigma / (0.05 * 0.05);
  p.b = cfg.feedback_b;
  p.c = 0.3 * p.base_sigma * p.base_sigma;
  return p;
}

namespace {

struct VarianceEngine {
  PlantedParams planted;
  KernelNodes nodes;
  QrhState state;
  std::vector<double> fbm;
  const SynthConfig* cfg = nullptr;

  VarianceEngine(const SynthConfig& c, int coin_idx) : cfg(&c) {
    planted = planted_params(c, coin_idx);
    nodes = kernel_nodes(c.hurst, c.kernel_factors, c.kernel_tmin, c.kernel_tmax);
    state = init_state(nodes);
    fbm = simulate_fbm(c.hurst, static_cast<std::size_t>(c.days),
                       mix_seed(c.seed, 2000 + static_cast<std::uint64_t>(coin_idx)));
  }

  // variance for day t given the feedback state built from days < t
  double variance(int t) const {
    double base2 = planted.base_sigma * planted.base_sigma;
    double rough = base2 * std::exp(2.0 * cfg->nu * fbm[static_cast<std::size_t>(t) + 1]);
    double d = state.z - planted.b;
    double feedback = planted.a * d * d + planted.c;
    return (1.0 - cfg->qrh_mix) * rough + cfg->qrh_mix * feedback;
  }

  void observe_return(double r) { state = advance_z(std::move(state), nodes, r); }
};

}  // namespace

DailyPath synth_daily(const SynthConfig& cfg, int coin_idx) {
  if (cfg.days < 2 || cfg.coins < 1) throw Error("synth: need at least 1 coin and 2 days");
  VarianceEngine eng(cfg, coin_idx);
  Rng rng(mix_seed(cfg.seed, 3000 + static_cast<std::uint64_t>(coin_idx)));
  DailyPath path;
  path.sigma.resize(cfg.days);
  path.ret.resize(cfg.days);
  for (int t = 0; t < cfg.days; ++t) {
    double sigma = std::sqrt(eng.variance(t));
    double r = sigma * rng.normal();
    path.sigma[t] = sigma;
    path.ret[t] = r;
    eng.observe_return(r);
  }
  return path;
}

std::string synth_symbol(int coin_idx) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "SYN%02d", coin_idx);
  return buf;
}

std::vector<Bar> synth_bars(const SynthConfig& cfg, int coin_idx) {
  if (cfg.days < 2 || cfg.coins < 1) throw Error("synth: need at least 1 coin and 2 days");
  if (cfg.bars_per_day < 2 || 86400000 % (cfg.bars_per_day) != 0)
    throw Error("synth: bars_per_day must divide the day evenly");
  const std::int64_t bar_ms = 86400000 / cfg.bars_per_day;
  if (bar_ms % 300000 != 0)
    throw Error("synth: bar duration must be a multiple of 5 minutes");

  VarianceEngine eng(cfg, coin_idx);
  Rng rng(mix_seed(cfg.seed, 3000 + static_cast<std::uint64_t>(coin_idx)));

  std::vector<Bar> bars;
  bars.reserve(static_cast<std::size_t>(cfg.days) * cfg.bars_per_day);
  double prev_close = 100.0 * (1.0 + coin_idx);
  const double bar_vol_scale = cfg.volume_scale / cfg.bars_per_day;

  for (int t = 0; t < cfg.days; ++t) {
    double sigma = std::sqrt(eng.variance(t));
    double bar_sigma = sigma / std::sqrt(static_cast<double>(cfg.bars_per_day));
    std::int64_t day_ms = (cfg.start + t).epoch_ms();
    double day_open = prev_close;
    for (int i = 0; i < cfg.bars_per_day; ++i) {
      Bar b;
      b.ts_ms = day_ms + i * bar_ms;
      b.open = prev_close;
      b.close = prev_close * (1.0 + bar_sigma * rng.normal());
      double wick_hi = std::abs(rng.normal()) * 0.3 * bar_sigma;
      double wick_lo = std::abs(rng.normal()) * 0.3 * bar_sigma;
      b.high = std::max(b.open, b.close) * (1.0 + wick_hi);
      b.low = std::min(b.open, b.close) * (1.0 - wick_lo);
      b.volume = bar_vol_scale * std::exp(0.3 * rng.normal());
      b.trades = 1 + static_cast<std::int64_t>(b.volume / 100.0);
      bars.push_back(b);
      prev_close = b.close;
    }
    // realized close-to-close return drives the planted feedback
    eng.observe_return(prev_close / day_open - 1.0);
  }
  return bars;
}

std::vector<std::string> write_synth_klines(const SynthConfig& cfg, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> paths;
  for (int c = 0; c < cfg.coins; ++c) {
    std::vector<Bar> bars = synth_bars(cfg, c);
    std::string path = (std::filesystem::path(dir) / (synth_symbol(c) + ".csv")).string();
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "open_time,open,high,low,close,volume,close_time,quote_volume,trades\n";
    const std::int64_t bar_ms = 86400000 / cfg.bars_per_day;
    for (const Bar& b : bars) {
      out << b.ts_ms << ',' << fmt_double(b.open) << ',' << fmt_double(b.high) << ','
          << fmt_double(b.low) << ',' << fmt_double(b.close) << ','
          << fmt_double(b.volume / b.close) << ',' << (b.ts_ms + bar_ms - 1) << ','
          << fmt_double(b.volume) << ',' << b.trades << '\n';
    }
    out.close();
    if (!out) throw Error("failed writing " + path);
    paths.push_back(path);
  }
  return paths;
}

}  // namespace volcast
