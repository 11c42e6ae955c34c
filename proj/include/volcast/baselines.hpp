#pragma once

// Per-coin linear volatility predictors: AR_p and HAR, fitted by OLS on
// normalized training rows.

#include <span>
#include <string>
#include <vector>

#include "volcast/marketdata.hpp"

namespace volcast {

enum class LinearSpec { ar, har };

struct LinearModel {
  LinearSpec spec = LinearSpec::ar;
  int p = 0;                   // max lag: p for AR, 30 for HAR
  double intercept = 0;
  std::vector<double> coeffs;  // p entries for AR; 3 for HAR (lag-1, sum-7, sum-30)
};

// Regression rows are modeling rows in `train` whose full lag window stays
// inside the same segment and inside the train range. Throws FitError when
// usable rows < p + 10 (AR) / < 40 (HAR) or the design is singular.
LinearModel fit_ar(const CoinSeries& s, const DateRange& train, int p);
LinearModel fit_har(const CoinSeries& s, const DateRange& train);

// history holds chronological normalized sigmas, history.back() = sigma_{t-1}.
// Returns the normalized forecast; de-normalization and the zero floor happen
// at emission time. HAR regressors are plain sums over the windows, not means.
double predict_linear(const LinearModel& m, std::span<const double> history);

}  // namespace volcast
