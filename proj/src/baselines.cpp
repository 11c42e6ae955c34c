#include "volcast/baselines.hpp"

#include <Eigen/Dense>

#include "volcast/ols.hpp"

namespace volcast {

namespace {

// Target indices in `train` with p in-segment lags whose dates are >= train.first.
std::vector<std::size_t> regression_targets(const CoinSeries& s, const DateRange& train, int p) {
  std::vector<std::size_t> out;
  for (const Segment& seg : s.segments) {
    for (std::size_t i = seg.first + 1; i < seg.first + seg.count; ++i) {
      if (i < seg.first + static_cast<std::size_t>(p)) continue;
      if (!train.contains(s.days[i].date)) continue;
      if (s.days[i - p].date < train.first) continue;
      out.push_back(i);
    }
  }
  return out;
}

LinearModel fit_linear(const CoinSeries& s, const DateRange& train, LinearSpec spec, int p,
                       std::size_t min_rows) {
  auto targets = regression_targets(s, train, p);
  if (targets.size() < min_rows)
    throw FitError(s.coin + ": " + std::to_string(targets.size()) +
                   " usable training rows, need " + std::to_string(min_rows));

  const int k = spec == LinearSpec::ar ? p : 3;
  Eigen::MatrixXd x(targets.size(), k + 1);
  Eigen::VectorXd y(targets.size());
  for (std::size_t r = 0; r < targets.size(); ++r) {
    std::size_t t = targets[r];
    y(r) = s.norm_sigma(t);
    x(r, 0) = 1.0;
    if (spec == LinearSpec::ar) {
      for (int j = 1; j <= p; ++j) x(r, j) = s.norm_sigma(t - j);
    } else {
      double sum7 = 0, sum30 = 0;
      for (int j = 1; j <= 30; ++j) {
        double v = s.norm_sigma(t - j);
        if (j <= 7) sum7 += v;
        sum30 += v;
      }
      x(r, 1) = s.norm_sigma(t - 1);
      x(r, 2) = sum7;
      x(r, 3) = sum30;
    }
  }

  OlsResult ols;
  try {
    ols = ols_solve(x, y);
  } catch (const FitError& e) {
    throw FitError(s.coin + ": " + e.what());
  }

  LinearModel m;
  m.spec = spec;
  m.p = p;
  m.intercept = ols.beta(0);
  m.coeffs.assign(ols.beta.data() + 1, ols.beta.data() + 1 + k);
  return m;
}

}  // namespace

LinearModel fit_ar(const CoinSeries& s, const DateRange& train, int p) {
  if (p < 1) throw FitError("ar lag count must be positive");
  return fit_linear(s, train, LinearSpec::ar, p, static_cast<std::size_t>(p) + 10);
}

LinearModel fit_har(const CoinSeries& s, const DateRange& train) {
  return fit_linear(s, train, LinearSpec::har, 30, 40);
}

double predict_linear(const LinearModel& m, std::span<const double> history) {
  if (history.size() < static_cast<std::size_t>(m.p))
    throw Error("predict_linear: history shorter than model lag");
  auto lag = [&](int j) { return history[history.size() - static_cast<std::size_t>(j)]; };
  double y = m.intercept;
  if (m.spec == LinearSpec::ar) {
    for (int j = 1; j <= m.p; ++j) y += m.coeffs[static_cast<std::size_t>(j) - 1] * lag(j);
  } else {
    double sum7 = 0, sum30 = 0;
    for (int j = 1; j <= 30; ++j) {
      double v = lag(j);
      if (j <= 7) sum7 += v;
      sum30 += v;
    }
    y += m.coeffs[0] * lag(1) + m.coeffs[1] * sum7 + m.coeffs[2] * sum30;
  }
  return y;
}

}  // namespace volcast
