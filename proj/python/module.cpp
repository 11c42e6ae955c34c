// Python bindings for the main library operations: rough-volatility
// estimation and simulation, the quadratic feedback device, the small LSTM,
// the synthetic generator and the full pipeline runner.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "volcast/experiment.hpp"

namespace py = pybind11;
using namespace volcast;

PYBIND11_MODULE(volcast, m) {
  m.doc() = "daily volatility forecasting toolkit (C++ core)";

  auto base = py::register_exception<Error>(m, "VolcastError");
  py::register_exception<ConfigError>(m, "ConfigError", base);
  py::register_exception<DependencyError>(m, "DependencyError", base);
  py::register_exception<FitError>(m, "FitError", base);
  py::register_exception<EstimationError>(m, "EstimationError", base);
  py::register_exception<FormatError>(m, "FormatError", base);

  // rough volatility
  m.def(
      "simulate_fbm",
      [](double H, std::size_t n, std::uint64_t seed) { return simulate_fbm(H, n, seed); },
      py::arg("H"), py::arg("n"), py::arg("seed"),
      "Fractional Brownian motion path, n+1 points starting at 0 (exact circulant embedding).");
  m.def(
      "simulate_fgn",
      [](double H, std::size_t n, std::uint64_t seed) { return simulate_fgn(H, n, seed); },
      py::arg("H"), py::arg("n"), py::arg("seed"), "The underlying fractional Gaussian noise.");
  m.def(
      "estimate_hurst",
      [](const std::vector<double>& sigma, int delta_max) {
        HurstEstimate est = estimate_hurst(sigma, delta_max);
        py::dict d;
        d["H"] = est.H;
        d["H_raw"] = est.H_raw;
        d["nu"] = est.nu;
        d["clamped"] = est.clamped;
        return d;
      },
      py::arg("sigma"), py::arg("delta_max") = 30,
      "Variogram regression on a positive volatility series.");
  m.def(
      "fractional_weights",
      [](double H, int n) { return fractional_weights(H, n).w; }, py::arg("H"), py::arg("n"),
      "Truncated power-law prediction weights (most recent lag first), summing to 1.");
  m.def("rfsv_correction", &rfsv_correction, py::arg("H"), py::arg("nu"),
        "Lognormal forecast correction factor.");
  m.def(
      "rfsv_forecast",
      [](double H, double nu, const std::vector<double>& history, int n_trunc) {
        RfsvParams params{H, nu, rfsv_correction(H, nu)};
        return rfsv_forecast(params, fractional_weights(H, n_trunc), history);
      },
      py::arg("H"), py::arg("nu"), py::arg("history"), py::arg("n_trunc") = 500,
      "One-step volatility forecast from chronological history (last n_trunc values used).");

  // quadratic feedback device
  m.def(
      "kernel_nodes",
      [](double H, int n, double t_min, double t_max) {
        KernelNodes nodes = kernel_nodes(H, n, t_min, t_max);
        py::dict d;
        d["gammas"] = nodes.gammas;
        d["weights"] = nodes.weights;
        return d;
      },
      py::arg("H"), py::arg("n"), py::arg("t_min") = 1.0, py::arg("t_max") = 500.0,
      "Multi-exponential approximation nodes of the power-law memory kernel.");
  m.def(
      "kernel_l2_error",
      [](double H, int n, double t_min, double t_max, int grid) {
        return kernel_l2_error(kernel_nodes(H, n, t_min, t_max), grid);
      },
      py::arg("H"), py::arg("n"), py::arg("t_min") = 1.0, py::arg("t_max") = 500.0,
      py::arg("grid") = 20000, "Relative L2 error of the node approximation on [t_min, t_max].");
  m.def(
      "calibrate_qrh",
      [](const std::vector<double>& z_prev, const std::vector<double>& var_targets) {
        QrhCalibrationReport rep;
        QrhParams p = calibrate_qrh(z_prev, var_targets, &rep);
        py::dict d;
        d["a"] = p.a;
        d["b"] = p.b;
        d["c"] = p.c;
        d["a_floored"] = rep.a_floored;
        d["c_floored"] = rep.c_floored;
        d["b_negative"] = rep.b_negative;
        return d;
      },
      py::arg("z_prev"), py::arg("var_targets"),
      "Quadratic variance calibration var = a (z - b)^2 + c by least squares.");
  m.def(
      "qrh_forecast",
      [](double a, double b, double c, double z_prev) {
        QrhParams p;
        p.a = a;
        p.b = b;
        p.c = c;
        return qrh_forecast(p, z_prev);
      },
      py::arg("a"), py::arg("b"), py::arg("c"), py::arg("z_prev"));
  m.def("blend", &blend, py::arg("rfsv"), py::arg("qrh"), py::arg("lambda_"),
        "(1 - lambda) rfsv + lambda qrh.");

  // recurrent model
  m.def(
      "lstm_forward",
      [](int input_dim, int hidden_dim, std::uint64_t seed, const std::vector<double>& window) {
        lstm::LstmWeights w = lstm::init_weights(input_dim, hidden_dim, seed);
        return lstm::forward(w, window);
      },
      py::arg("input_dim"), py::arg("hidden_dim"), py::arg("seed"), py::arg("window"),
      "Forward pass with freshly initialized weights (window is step-major, "
      "input_dim values per step).");
  m.def(
      "lstm_input_gradients",
      [](int input_dim, int hidden_dim, std::uint64_t seed, const std::vector<double>& window) {
        lstm::LstmWeights w = lstm::init_weights(input_dim, hidden_dim, seed);
        return lstm::output_input_gradients(w, window);
      },
      py::arg("input_dim"), py::arg("hidden_dim"), py::arg("seed"), py::arg("window"),
      "Exact d(output)/d(input) for the same freshly initialized weights.");

  // synthetic data and pipeline
  m.def(
      "synth_klines",
      [](const std::string& dir, int coins, int days, double hurst, double nu, double qrh_mix,
         std::uint64_t seed) {
        SynthConfig cfg;
        cfg.coins = coins;
        cfg.days = days;
        cfg.hurst = hurst;
        cfg.nu = nu;
        cfg.qrh_mix = qrh_mix;
        cfg.seed = seed;
        return write_synth_klines(cfg, dir);
      },
      py::arg("dir"), py::arg("coins") = 5, py::arg("days") = 900, py::arg("hurst") = 0.1,
      py::arg("nu") = 0.3, py::arg("qrh_mix") = 0.5, py::arg("seed") = 7,
      "Write synthetic 5-minute kline CSVs; returns the file paths.");
  m.def(
      "run_experiment",
      [](const std::string& config_json) { run_experiment(parse_run_config(config_json)); },
      py::arg("config_json"),
      "Full pipeline from a JSON config string (synth if needed, ingest, fit, forecast, "
      "evaluate, sensitivities, sweep).");
  m.def(
      "run_step",
      [](const std::string& step, const std::string& config_json) {
        RunConfig cfg = parse_run_config(config_json);
        if (step == "synth")
          run_synth(cfg);
        else if (step == "ingest")
          run_ingest(cfg);
        else if (step == "fit")
          run_fit(cfg);
        else if (step == "forecast")
          run_forecast(cfg);
        else if (step == "evaluate")
          run_evaluate(cfg);
        else if (step == "sensitivities")
          run_sensitivities(cfg);
        else if (step == "sweep")
          run_sweep(cfg);
        else
          throw ConfigError("unknown step '" + step + "'");
      },
      py::arg("step"), py::arg("config_json"),
      "Run one pipeline step: synth, ingest, fit, forecast, evaluate, sensitivities or sweep.");
}
