#include "volcast/roughvol.hpp"

#include <cmath>
#include <complex>

#include "volcast/fft.hpp"

namespace volcast {

namespace {

HurstEstimate variogram_fit(const std::vector<double>& sumsq, const std::vector<double>& count,
                            int delta_max) {
  // least-squares line of log m(2,d) on log d
  std::vector<double> lx(delta_max), ly(delta_max);
  for (int d = 1; d <= delta_max; ++d) {
    if (count[d] <= 0)
      throw EstimationError("hurst: no pairs at lag " + std::to_string(d));
    double m = sumsq[d] / count[d];
    if (!(m > 0)) throw EstimationError("hurst: degenerate variogram (constant series?)");
    lx[d - 1] = std::log(static_cast<double>(d));
    ly[d - 1] = std::log(m);
  }
  double mx = mean(lx), my = mean(ly), sxx = 0, sxy = 0;
  for (int i = 0; i < delta_max; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  double slope = sxy / sxx;
  double intercept = my - slope * mx;

  HurstEstimate e;
  e.H_raw = slope / 2.0;
  e.H = std::min(0.49, std::max(0.01, e.H_raw));
  e.clamped = e.H != e.H_raw;
  e.nu = std::exp(intercept / 2.0);
  return e;
}

void accumulate_increments(std::span<const double> sigma, int delta_max,
                           std::vector<double>& sumsq, std::vector<double>& count) {
  for (double s : sigma)
    if (!(s > 0)) throw EstimationError("hurst: nonpositive sigma in series");
  const std::size_t n = sigma.size();
  for (int d = 1; d <= delta_max; ++d) {
    for (std::size_t t = 0; t + static_cast<std::size_t>(d) < n; ++t) {
      double inc = std::log(sigma[t + d] / sigma[t]);
      sumsq[d] += inc * inc;
      count[d] += 1;
    }
  }
}

}  // namespace

HurstEstimate estimate_hurst(std::span<const double> sigma, int delta_max) {
  if (delta_max < 2) throw EstimationError("hurst: delta_max must be at least 2");
  if (sigma.size() < 10 * static_cast<std::size_t>(delta_max))
    throw EstimationError("hurst: series length " + std::to_string(sigma.size()) +
                          " below 10*delta_max");
  std::vector<double> sumsq(delta_max + 1, 0), count(delta_max + 1, 0);
  accumulate_increments(sigma, delta_max, sumsq, count);
  return variogram_fit(sumsq, count, delta_max);
}

HurstEstimate estimate_hurst_pooled(const std::vector<std::vector<double>>& sigma_series,
                                    int delta_max) {
  if (delta_max < 2) throw EstimationError("hurst: delta_max must be at least 2");
  std::vector<double> sumsq(delta_max + 1, 0), count(delta_max + 1, 0);
  for (const auto& s : sigma_series) accumulate_increments(s, delta_max, sumsq, count);
  if (count[delta_max] < 9.0 * delta_max)
    throw EstimationError("hurst: too few pooled pairs at the longest lag");
  return variogram_fit(sumsq, count, delta_max);
}

double rfsv_correction(double H, double nu) {
  return std::exp(std::tgamma(1.5 - H) * nu * nu /
                  (2.0 * std::tgamma(H + 0.5) * std::tgamma(2.0 - 2.0 * H)));
}

FractionalWeights fractional_weights(double H, int N) {
  if (!(H > 0) || !(H < 0.5)) throw EstimationError("fractional_weights: H must lie in (0, 1/2)");
  if (N < 2) throw EstimationError("fractional_weights: need at least 2 lags");
  FractionalWeights fw;
  fw.H = H;
  fw.w.resize(N);
  const double front = std::cos(H * M_PI) / M_PI;
  double sum = 0;
  for (int k = 1; k <= N; ++k) {
    double v = front / ((k + 1.0) * std::pow(static_cast<double>(k), H + 0.5));
    fw.w[k - 1] = v;
    sum += v;
  }
  for (double& v : fw.w) v /= sum;
  return fw;
}

double rfsv_forecast(const RfsvParams& params, const FractionalWeights& weights,
                     std::span<const double> history) {
  const std::size_t n = weights.w.size();
  if (history.size() < n) throw Error("rfsv_forecast: history shorter than weight count");
  // Accumulate log deviations from the most recent value instead of raw logs.
  // A constant history then contributes exact zeros, so the forecast collapses
  // to c * s without exp/log round-trip error.
  const double last = history[history.size() - 1];
  if (!(last > 0)) throw EstimationError("rfsv_forecast: nonpositive sigma in history");
  const double log_last = std::log(last);
  double acc = 0;
  for (std::size_t k = 1; k <= n; ++k) {
    double s = history[history.size() - k];
    if (!(s > 0)) throw EstimationError("rfsv_forecast: nonpositive sigma in history");
    acc += weights.w[k - 1] * (std::log(s) - log_last);
  }
  return params.c * last * std::exp(acc);
}

std::vector<double> simulate_fgn(double H, std::size_t n, std::uint64_t seed) {
  if (!(H > 0) || !(H < 1)) throw EstimationError("simulate_fgn: H must lie in (0, 1)");
  if (n < 2) throw EstimationError("simulate_fgn: need n >= 2");

  const std::size_t m = next_pow2(2 * n);
  // fGN autocovariance rho(k) = ((k+1)^2H - 2 k^2H + (k-1)^2H) / 2
  auto rho = [H](double k) {
    return 0.5 * (std::pow(k + 1, 2 * H) - 2 * std::pow(k, 2 * H) +
                  std::pow(std::abs(k - 1), 2 * H));
  };
  std::vector<std::complex<double>> a(m);
  for (std::size_t j = 0; j <= m / 2; ++j) a[j] = rho(static_cast<double>(j));
  for (std::size_t j = m / 2 + 1; j < m; ++j) a[j] = a[m - j];
  fft_inplace(a);  // circulant eigenvalues

  std::vector<double> lambda(m);
  double lam_max = 0;
  for (std::size_t j = 0; j < m; ++j) {
    lambda[j] = a[j].real();
    lam_max = std::max(lam_max, lambda[j]);
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (lambda[j] < -1e-9 * lam_max)
      throw Error("simulate_fgn: embedding not positive definite, try n >= " +
                  std::to_string(2 * n));
    if (lambda[j] < 0) lambda[j] = 0;  // zero out fp dust
  }

  Rng rng(seed);
  const double dm = static_cast<double>(m);
  a[0] = std::sqrt(lambda[0] / dm) * rng.normal();
  a[m / 2] = std::sqrt(lambda[m / 2] / dm) * rng.normal();
  for (std::size_t k = 1; k < m / 2; ++k) {
    double u = rng.normal(), v = rng.normal();
    double r = std::sqrt(lambda[k] / (2.0 * dm));
    a[k] = std::complex<double>(r * u, r * v);
    a[m - k] = std::conj(a[k]);
  }
  fft_inplace(a);

  std::vector<double> fgn(n);
  for (std::size_t i = 0; i < n; ++i) fgn[i] = a[i].real();
  return fgn;
}

std::vector<double> simulate_fbm(double H, std::size_t n, std::uint64_t seed) {
  std::vector<double> fgn = simulate_fgn(H, n, seed);
  std::vector<double> path(n + 1);
  path[0] = 0;
  for (std::size_t i = 0; i < n; ++i) path[i + 1] = path[i] + fgn[i];
  return path;
}

}  // namespace volcast
