#pragma once

// Small from-scratch LSTM regressor: sigmoid gates i/f/o, SiLU for the g
// branch and the cell output, a scalar dense head, exact reverse-mode
// gradients, Adam training with early stopping, seed ensembling, per-coin
// fine-tuning and input-gradient sensitivities.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "volcast/marketdata.hpp"

namespace volcast::lstm {

struct LstmConfig {
  int input_dim = 2;    // 1: sigma only; 2: sigma + return
  int hidden_dim = 4;   // 2 for the vol-only models, 4 with returns
  int window = 30;      // p
  std::uint64_t seed = 0;
  double lr = 1e-3;
  int epochs = 100;
  int batch_size = 256;
  double val_fraction = 0.1;  // chronological tail per coin; 0 monitors train loss
  int patience = 10;
  int members = 10;
};

// All parameters in one flat vector. Layout, per gate in order (i, f, g, o):
// W_x (hidden x input, row-major), W_h (hidden x hidden), b_x, b_h; then the
// dense head (hidden weights + 1 bias).
struct LstmWeights {
  int input_dim = 0;
  int hidden_dim = 0;
  std::vector<double> params;

  std::size_t gate_stride() const {
    auto h = static_cast<std::size_t>(hidden_dim), in = static_cast<std::size_t>(input_dim);
    return h * in + h * h + 2 * h;
  }
  std::size_t wx(int gate) const { return gate * gate_stride(); }
  std::size_t wh(int gate) const { return wx(gate) + hidden_dim * input_dim; }
  std::size_t bx(int gate) const { return wh(gate) + hidden_dim * hidden_dim; }
  std::size_t bh(int gate) const { return bx(gate) + hidden_dim; }
  std::size_t dense_w() const { return 4 * gate_stride(); }
  std::size_t dense_b() const { return dense_w() + hidden_dim; }
  std::size_t n_params() const { return dense_b() + 1; }
};

// Seeded uniform in +-1/sqrt(hidden_dim).
LstmWeights init_weights(int input_dim, int hidden_dim, std::uint64_t seed);

// window is p*input_dim values, step-major (oldest step first), each step
// [sigma, ret?] normalized. Throws on a length that is not a positive
// multiple of input_dim.
double forward(const LstmWeights& w, std::span<const double> window);

// d(output)/d(window element), same layout as the window.
std::vector<double> output_input_gradients(const LstmWeights& w, std::span<const double> window);

// Pooled training windows. x is size()*window*input_dim, step-major.
struct WindowSet {
  int input_dim = 0;
  int window = 0;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<std::uint32_t> coin;  // index into the panel's coin list
  std::vector<Date> date;           // target date

  std::size_t size() const { return y.size(); }
  std::span<const double> row(std::size_t i) const {
    std::size_t len = static_cast<std::size_t>(window) * input_dim;
    return {x.data() + i * len, len};
  }
};

// Training windows from every coin's modeling rows in the train range; the
// lag window never straddles a gap or the range start. The chronological
// tail (val_fraction) of each coin's windows forms the validation set.
std::pair<WindowSet, WindowSet> assemble_windows(const Panel& panel, int input_dim, int window,
                                                 double val_fraction);

// Mean-squared-error loss over the index subset and exact gradients for all
// parameters (grad is resized to w.n_params()).
double loss_gradients(const LstmWeights& w, const WindowSet& ws,
                      std::span<const std::size_t> idx, std::vector<double>& grad);

double mse_loss(const LstmWeights& w, const WindowSet& ws);

struct TrainReport {
  int epochs_run = 0;
  int best_epoch = 0;      // 0 means the initial weights were never beaten
  double best_metric = 0;  // val MSE, or train MSE when no val split
};

// Adam (lr from config, beta1 0.9, beta2 0.999, eps 1e-8) with per-epoch
// reshuffling and early stopping (patience epochs without improvement);
// returns the best-metric snapshot, the untrained init included as a
// candidate. Deterministic for a fixed seed. init=nullptr draws fresh
// weights from config.seed.
LstmWeights train(const WindowSet& train_ws, const WindowSet& val_ws, const LstmConfig& config,
                  const LstmWeights* init = nullptr, TrainReport* report = nullptr);

struct Ensemble {
  LstmConfig config;
  std::vector<LstmWeights> members;  // member k trained with seed config.seed + k
};

// Members train in parallel threads; results do not depend on thread count.
Ensemble train_ensemble(const WindowSet& train_ws, const WindowSet& val_ws,
                        const LstmConfig& config);

double predict_ensemble(const Ensemble& e, std::span<const double> window);

// Continued training of every member on one coin's windows (all parameters
// trainable). config.val_fraction = 0 monitors the fine-tune train loss, so
// the returned member is never worse than the universal one on that loss.
Ensemble fine_tune(const Ensemble& universal, const WindowSet& train_ws,
                   const WindowSet& val_ws, const LstmConfig& config);

// --- sensitivities -------------------------------------------------------

struct SensitivityProfile {
  std::string coin;
  // index tau-1, tau = 1..tau_max; gradients of the de-normalized forecast
  // w.r.t. raw sigma^2 (alpha, chain rule 1/(2 sigma)) and raw return (beta)
  std::vector<double> alpha_mean, alpha_std;
  std::vector<double> beta_mean, beta_std;
  std::vector<long> alpha_excluded;  // test days skipped per tau (sigma_{t-tau} = 0)
};

struct SensitivityScatterRow {
  std::string coin;
  Date date;
  double sigma_hat = 0;  // raw units
  double var_prev = 0;   // sigma^2_{t-1}
  double ret_prev = 0;   // r_{t-1}
  double alpha1 = 0;
  double beta1 = 0;
};

struct SensitivityResult {
  std::vector<SensitivityProfile> profiles;
  std::vector<SensitivityScatterRow> scatter;
};

// Ensemble must be the sigma+return configuration; profiles average over
// each coin's test days.
SensitivityResult sensitivities(const Ensemble& e, const Panel& panel, int tau_max = 30);

}  // namespace volcast::lstm
