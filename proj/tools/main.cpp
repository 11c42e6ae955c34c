// Command-line front end for the volatility forecasting pipeline.
//
// Subcommands map one-to-one onto the pipeline steps; every flag can also be
// set through a JSON config file (--config), with flags taking precedence.
// Exit codes: 0 success, 2 configuration problems, 3 missing pipeline
// dependency, 1 any other failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "volcast/experiment.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw volcast::ConfigError("cannot read config file " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

struct DateOpts {
  std::string train_start, train_end, test_start, test_end, synth_start;
};

void add_options(CLI::App* sub, volcast::RunConfig& cfg, DateOpts& dates, std::string& config_path,
                 bool synth_cmd) {
  sub->add_option("-c,--config", config_path,
                  "JSON config file applied before flags (flags win)");
  sub->add_option("--run-dir", cfg.run_dir,
                  "run directory holding panel, models, forecasts and reports")
      ->capture_default_str();
  sub->add_option("--data-dir", cfg.data_dir, "directory of per-coin 5-minute kline CSV files")
      ->capture_default_str();
  sub->add_option("--train-start", dates.train_start, "first training day (YYYY-MM-DD)")
      ->capture_default_str();
  sub->add_option("--train-end", dates.train_end, "last training day")->capture_default_str();
  sub->add_option("--test-start", dates.test_start, "first evaluation day")->capture_default_str();
  sub->add_option("--test-end", dates.test_end, "last evaluation day")->capture_default_str();
  sub->add_option("--min-bars", cfg.min_bars,
                  "5-minute bars required before a day counts as complete")
      ->capture_default_str();
  sub->add_option("--min-days", cfg.filter.min_days, "complete days required to keep a coin")
      ->capture_default_str();
  sub->add_option("--min-median-volume", cfg.filter.min_median_volume,
                  "median daily quote volume required to keep a coin")
      ->capture_default_str();
  sub->add_option("--models", cfg.models, "model ids to fit/forecast/evaluate (comma separated)")
      ->delimiter(',')
      ->capture_default_str();
  if (!synth_cmd)
    sub->add_option("--seed", cfg.seed, "master seed for model training")->capture_default_str();
  sub->add_option("--lstm-lr", cfg.lstm_lr, "Adam learning rate")->capture_default_str();
  sub->add_option("--lstm-epochs", cfg.lstm_epochs, "max training epochs")->capture_default_str();
  sub->add_option("--lstm-batch", cfg.lstm_batch, "minibatch size")->capture_default_str();
  sub->add_option("--lstm-val-fraction", cfg.lstm_val_fraction,
                  "chronological tail of each coin's windows held out for early stopping")
      ->capture_default_str();
  sub->add_option("--lstm-patience", cfg.lstm_patience, "early-stopping patience (epochs)")
      ->capture_default_str();
  sub->add_option("--lstm-members", cfg.lstm_members, "ensemble size")->capture_default_str();
  sub->add_option("--ft-epochs", cfg.ft_epochs, "per-coin fine-tuning epochs")
      ->capture_default_str();
  sub->add_option("--delta-max", cfg.delta_max, "largest variogram lag (days)")
      ->capture_default_str();
  sub->add_option("--n-trunc", cfg.n_trunc, "fractional predictor truncation (days)")
      ->capture_default_str();
  sub->add_option("--qrh-factors", cfg.qrh_factors, "kernel approximation factor count")
      ->capture_default_str();
  sub->add_option("--qrh-tmin", cfg.qrh_tmin, "kernel fit range start (days)")
      ->capture_default_str();
  sub->add_option("--qrh-tmax", cfg.qrh_tmax, "kernel fit range end (days)")
      ->capture_default_str();
  sub->add_option("--burn-in", cfg.burn_in, "returns required in the factor state before use")
      ->capture_default_str();
  sub->add_option("--baseline", cfg.baseline, "denominator model for MSE ratios")
      ->capture_default_str();
  sub->add_option("--lambdas", cfg.lambdas, "blend weights to sweep (default 0,0.05,...,1)")
      ->delimiter(',');
  sub->add_option("--sweep-reference", cfg.sweep_reference,
                  "extra ratio baseline for the sweep (default lstm30ret when available)");
  sub->add_option("--sens-model", cfg.sens_model, "model whose input gradients are profiled")
      ->capture_default_str();
  sub->add_option("--tau-max", cfg.tau_max, "largest sensitivity lag")->capture_default_str();
  sub->add_option("--subset-file", cfg.subset_file, "coin list for the *_sub models");

  // synthetic generator
  auto* seed_opt = synth_cmd ? sub->add_option("--seed", cfg.synth.seed, "generator seed")
                             : sub->add_option("--synth-seed", cfg.synth.seed, "generator seed");
  seed_opt->capture_default_str();
  sub->add_option("--coins", cfg.synth.coins, "synthetic coin count")->capture_default_str();
  sub->add_option("--days", cfg.synth.days, "synthetic calendar days")->capture_default_str();
  sub->add_option("--H", cfg.synth.hurst, "roughness of the synthetic log volatility")
      ->capture_default_str();
  sub->add_option("--nu", cfg.synth.nu, "vol-of-log-vol of the synthetic generator")
      ->capture_default_str();
  sub->add_option("--qrh-mix", cfg.synth.qrh_mix,
                  "weight of the planted quadratic feedback variance component")
      ->capture_default_str();
  sub->add_option("--start", dates.synth_start, "first synthetic day (YYYY-MM-DD)")
      ->capture_default_str();
  sub->add_option("--bars-per-day", cfg.synth.bars_per_day, "bars emitted per synthetic day")
      ->capture_default_str();
  sub->add_option("--base-sigma-min", cfg.synth.base_sigma_min, "per-coin base volatility floor")
      ->capture_default_str();
  sub->add_option("--base-sigma-max", cfg.synth.base_sigma_max, "per-coin base volatility cap")
      ->capture_default_str();
  sub->add_option("--volume-scale", cfg.synth.volume_scale, "daily quote volume scale")
      ->capture_default_str();
  sub->add_option("--kernel-factors", cfg.synth.kernel_factors,
                  "factor count of the planted feedback kernel")
      ->capture_default_str();
  sub->add_option("--feedback-b", cfg.synth.feedback_b, "planted quadratic vertex")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  using volcast::RunConfig;

  // The config file must load before options are defined so that its values
  // become the displayed defaults and flags override it.
  std::string config_path;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if ((a == "--config" || a == "-c") && i + 1 < argc)
      config_path = argv[i + 1];
    else if (a.rfind("--config=", 0) == 0)
      config_path = a.substr(9);
  }

  RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = volcast::parse_run_config(slurp(config_path));
  } catch (const volcast::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  DateOpts dates{cfg.train.first.str(), cfg.train.last.str(), cfg.test.first.str(),
                 cfg.test.last.str(), cfg.synth.start.str()};

  CLI::App app{"volcast: daily volatility forecasting on 5-minute klines "
               "(classical, rough-volatility and recurrent forecasters)"};
  app.require_subcommand(1);

  struct Step {
    const char* name;
    const char* help;
    void (*fn)(const RunConfig&);
    bool synth_cmd;
  };
  const Step steps[] = {
      {"synth", "generate synthetic kline CSVs with planted dynamics", volcast::run_synth, true},
      {"ingest", "parse klines, build and normalize the daily panel", volcast::run_ingest, false},
      {"fit", "fit the requested models on the training range", volcast::run_fit, false},
      {"forecast", "write out-of-sample volatility forecasts", volcast::run_forecast, false},
      {"evaluate", "per-coin MSE ratios and boxplot summaries", volcast::run_evaluate, false},
      {"sensitivities", "input-gradient profiles of the recurrent model",
       volcast::run_sensitivities, false},
      {"sweep-lambda", "MSE over the forecast blend weight grid", volcast::run_sweep, false},
      {"run", "full pipeline: synth (if no data), ingest, fit, forecast, evaluate, "
              "sensitivities, sweep", volcast::run_experiment, false},
  };
  for (const Step& s : steps)
    add_options(app.add_subcommand(s.name, s.help), cfg, dates, config_path, s.synth_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);  // prints help or the parse failure
    return code == 0 ? 0 : 2;
  }

  // date flags arrive as strings; convert with every problem reported at once
  std::vector<std::string> date_problems;
  auto to_date = [&](const std::string& s, const char* what, volcast::Date& out) {
    try {
      out = volcast::Date::parse(s);
    } catch (const volcast::Error& e) {
      date_problems.push_back(std::string(what) + ": " + e.what());
    }
  };
  to_date(dates.train_start, "--train-start", cfg.train.first);
  to_date(dates.train_end, "--train-end", cfg.train.last);
  to_date(dates.test_start, "--test-start", cfg.test.first);
  to_date(dates.test_end, "--test-end", cfg.test.last);
  to_date(dates.synth_start, "--start", cfg.synth.start);
  if (!date_problems.empty()) {
    std::cerr << "error: invalid dates:\n";
    for (const auto& p : date_problems) std::cerr << "  - " << p << "\n";
    return 2;
  }

  try {
    for (const Step& s : steps)
      if (app.got_subcommand(s.name)) s.fn(cfg);
    return 0;
  } catch (const volcast::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const volcast::DependencyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
