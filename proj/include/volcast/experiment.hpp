#pragma once

// Run orchestration: configuration for a full experiment, the pipeline steps
// (ingest, fit, forecast, evaluate, sensitivities, lambda sweep, synth), model
// artifact persistence and the reproducibility manifest.

#include <string>
#include <vector>

#include "volcast/evalharness.hpp"
#include "volcast/lstm.hpp"
#include "volcast/marketdata.hpp"
#include "volcast/qrh.hpp"
#include "volcast/roughvol.hpp"
#include "volcast/synth.hpp"

namespace volcast {

// One LSTM variant as named on the command line.
struct LstmVariant {
  std::string id;
  int input_dim = 0, hidden_dim = 0, window = 0;
};
const std::vector<LstmVariant>& lstm_variants();

// Model ids accepted by fit/forecast. "_spec" variants are per-coin fits,
// "_ft" is the per-coin fine-tuned ensemble, "_sub" trains on the subset
// file's coins only.
std::vector<std::string> known_model_ids();

struct RunConfig {
  std::string run_dir;   // panel, models, forecasts, reports, manifest
  std::string data_dir;  // kline csv directory (ingest input, synth output)

  DateRange train{Date::from_ymd(2020, 1, 1), Date::from_ymd(2021, 12, 31)};
  DateRange test{Date::from_ymd(2022, 1, 1), Date::from_ymd(2022, 6, 30)};

  int min_bars = 272;
  FilterConfig filter = default_filter_config();

  std::vector<std::string> models = {"har",      "ar7",      "ar30",
                                     "rfsv",     "qrh",      "lstm7vol",
                                     "lstm30vol", "lstm7ret", "lstm30ret"};

  std::uint64_t seed = 1;

  // lstm hyperparameters shared across variants (shape fields come from the
  // variant table)
  double lstm_lr = 1e-3;
  int lstm_epochs = 100;
  int lstm_batch = 256;
  double lstm_val_fraction = 0.1;
  int lstm_patience = 10;
  int lstm_members = 10;
  int ft_epochs = 100;  // fine-tune budget; monitors the coin's train loss

  int delta_max = 30;  // variogram lags
  int n_trunc = 500;   // fractional predictor truncation

  int qrh_factors = 10;
  double qrh_tmin = 1, qrh_tmax = 500;
  int burn_in = 500;  // returns required in Z before a row is usable

  std::string baseline = "har";
  std::vector<double> lambdas;     // empty = 0, 0.05, ..., 1
  std::string sweep_reference;     // empty = lstm30ret when available
  std::string sens_model = "lstm30ret";
  int tau_max = 30;
  std::string subset_file;         // coin list for *_sub variants

  SynthConfig synth;
};

// Collects every problem instead of stopping at the first.
void validate_config(const RunConfig& cfg);

// Parses a JSON run-config file (// comments allowed). Keys mirror the
// manifest's config block; unknown keys and type mismatches are all reported
// in one ConfigError.
RunConfig parse_run_config(const std::string& json_text);

// Paths inside the run directory.
std::string panel_csv_path(const RunConfig& cfg);
std::string panel_meta_path(const RunConfig& cfg);
std::string model_path(const RunConfig& cfg, const std::string& id);
std::string forecast_path(const RunConfig& cfg, const std::string& id);

// Pipeline steps. Each writes its outputs plus a manifest entry; each throws
// DependencyError naming the missing upstream step when inputs are absent.
void run_synth(const RunConfig& cfg);
void run_ingest(const RunConfig& cfg);
void run_fit(const RunConfig& cfg);
void run_forecast(const RunConfig& cfg);
void run_evaluate(const RunConfig& cfg);
void run_sensitivities(const RunConfig& cfg);
void run_sweep(const RunConfig& cfg);

// Chains the steps in dependency order: (synth when data_dir is empty) →
// ingest → fit → forecast → evaluate, plus sensitivities and the lambda
// sweep when their models are present.
void run_experiment(const RunConfig& cfg);

// Forecast CSV round-trip (model, coin, date, sigma_hat).
void save_forecasts(const std::vector<ModelForecast>& forecasts, const std::string& path);
std::vector<ModelForecast> load_forecasts(const std::string& path);

}  // namespace volcast
