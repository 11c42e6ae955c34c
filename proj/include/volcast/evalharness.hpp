#pragma once

// Out-of-sample evaluation: per-coin MSE, MSE ratios against a baseline,
// boxplot summaries across coins and the lambda blend sweep.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "volcast/marketdata.hpp"

namespace volcast {

struct ForecastRow {
  Date date;
  double sigma_hat = 0;  // raw units
};

struct ModelForecast {
  std::string model_id;
  std::string coin;
  std::vector<ForecastRow> rows;  // dates ascending, inside the test range
};

// Plain aligned-series MSE (oracle-facing helper).
double mse(std::span<const double> forecast, std::span<const double> realized);

// MSE over test days present in both the forecast and the coin's complete
// days. Throws when the intersection is empty.
double mse_on_days(const ModelForecast& forecast, const CoinSeries& realized,
                   const DateRange& test);

struct RatioRow {
  std::string model;
  std::string coin;
  std::size_t days = 0;  // evaluation days shared with the baseline
  double mse = 0;
  double baseline_mse = 0;
  double ratio = 0;
};

// Boxplot summary: type-7 quartiles, whiskers at the most extreme points
// within 1.5 IQR of the quartiles (matplotlib convention).
struct BoxStats {
  std::size_t n = 0;
  double median = 0, q1 = 0, q3 = 0;
  double lo = 0, hi = 0;
  long outliers = 0;
};
BoxStats box_stats(std::vector<double> values);

struct EvalReport {
  std::vector<RatioRow> rows;
  std::vector<std::pair<std::string, BoxStats>> summary;  // per model, model-sorted
  std::vector<Rejection> excluded;                        // (model:coin, reason)
};

// Per (model, coin): both the model and the baseline are scored on the days
// they share (and the realized series covers), so ratios stay well-defined
// when a model's window needs more history. Coins with zero shared days or
// zero baseline MSE are excluded with a report entry.
EvalReport ratio_table(const std::vector<ModelForecast>& forecasts,
                       const std::string& baseline_id, const Panel& panel);

struct LambdaSweepResult {
  std::vector<double> lambdas;
  std::vector<double> pooled_mse;          // over all coins' shared days
  std::vector<EvalReport> vs_lambda0;      // blend ratios against the lambda=0 stream
  std::vector<EvalReport> vs_reference;    // optional second baseline (empty if none)
  std::string reference_id;
  double lambda_star = 0;                  // argmin pooled MSE
};

// Blends the rfsv and qrh streams per lambda on their shared days.
// reference optionally supplies a third model (e.g. an LSTM) whose forecasts
// serve as an alternative ratio baseline.
LambdaSweepResult lambda_sweep(const std::vector<ModelForecast>& rfsv,
                               const std::vector<ModelForecast>& qrh, const Panel& panel,
                               std::span<const double> lambdas,
                               const std::vector<ModelForecast>* reference = nullptr);

}  // namespace volcast
