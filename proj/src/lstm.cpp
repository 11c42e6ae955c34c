#include "volcast/lstm.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace volcast::lstm {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double silu(double x) { return x * sigmoid(x); }
double silu_deriv(double x) {
  double s = sigmoid(x);
  return s * (1.0 + x * (1.0 - s));
}

// Per-window activation record for reverse mode; buffers keep their capacity
// across samples.
struct Tape {
  int p = 0, h = 0;
  std::vector<double> gate_i, gate_f, gate_o;  // post-sigmoid
  std::vector<double> g_pre;                   // pre-activation of the g branch
  std::vector<double> cell, hidden;

  void reset(int p_, int h_) {
    p = p_;
    h = h_;
    std::size_t n = static_cast<std::size_t>(p) * h;
    gate_i.assign(n, 0);
    gate_f.assign(n, 0);
    gate_o.assign(n, 0);
    g_pre.assign(n, 0);
    cell.assign(n, 0);
    hidden.assign(n, 0);
  }
};

int window_steps(const LstmWeights& w, std::span<const double> window) {
  if (w.input_dim <= 0 || window.empty() ||
      window.size() % static_cast<std::size_t>(w.input_dim) != 0)
    throw Error("lstm: window length is not a positive multiple of input_dim");
  return static_cast<int>(window.size() / static_cast<std::size_t>(w.input_dim));
}

double run_forward(const LstmWeights& w, std::span<const double> window, Tape& tape) {
  const int in = w.input_dim, h = w.hidden_dim;
  const int p = window_steps(w, window);
  tape.reset(p, h);
  const double* wp = w.params.data();

  thread_local std::vector<double> pre;
  pre.assign(4 * static_cast<std::size_t>(h), 0);

  for (int t = 0; t < p; ++t) {
    const double* x = window.data() + static_cast<std::size_t>(t) * in;
    const double* hprev = t > 0 ? tape.hidden.data() + static_cast<std::size_t>(t - 1) * h : nullptr;
    for (int q = 0; q < 4; ++q) {
      const double* wx = wp + w.wx(q);
      const double* wh = wp + w.wh(q);
      const double* bx = wp + w.bx(q);
      const double* bh = wp + w.bh(q);
      for (int j = 0; j < h; ++j) {
        double acc = bx[j] + bh[j];
        for (int k = 0; k < in; ++k) acc += wx[j * in + k] * x[k];
        if (hprev)
          for (int k = 0; k < h; ++k) acc += wh[j * h + k] * hprev[k];
        pre[q * h + j] = acc;
      }
    }
    const std::size_t off = static_cast<std::size_t>(t) * h;
    for (int j = 0; j < h; ++j) {
      double gi = sigmoid(pre[0 * h + j]);
      double gf = sigmoid(pre[1 * h + j]);
      double gp = pre[2 * h + j];
      double go = sigmoid(pre[3 * h + j]);
      double cprev = t > 0 ? tape.cell[off - h + j] : 0.0;
      double c = gf * cprev + gi * silu(gp);
      tape.gate_i[off + j] = gi;
      tape.gate_f[off + j] = gf;
      tape.gate_o[off + j] = go;
      tape.g_pre[off + j] = gp;
      tape.cell[off + j] = c;
      tape.hidden[off + j] = go * silu(c);
    }
  }

  const double* dw = wp + w.dense_w();
  double y = wp[w.dense_b()];
  const std::size_t last = static_cast<std::size_t>(p - 1) * h;
  for (int j = 0; j < h; ++j) y += dw[j] * tape.hidden[last + j];
  return y;
}

// Accumulates dy * d(output)/d(param) into grad; when dx is non-null (size
// p*input_dim, zero-initialized by the caller) also accumulates input
// gradients.
void run_backward(const LstmWeights& w, std::span<const double> window, const Tape& tape,
                  double dy, double* grad, double* dx) {
  const int in = w.input_dim, h = w.hidden_dim, p = tape.p;
  const double* wp = w.params.data();

  thread_local std::vector<double> dh, dc, dh_prev, dpre;
  dh.assign(h, 0);
  dc.assign(h, 0);
  dh_prev.assign(h, 0);
  dpre.assign(4 * static_cast<std::size_t>(h), 0);

  grad[w.dense_b()] += dy;
  const std::size_t last = static_cast<std::size_t>(p - 1) * h;
  for (int j = 0; j < h; ++j) {
    grad[w.dense_w() + j] += dy * tape.hidden[last + j];
    dh[j] = dy * wp[w.dense_w() + j];
  }

  for (int t = p - 1; t >= 0; --t) {
    const std::size_t off = static_cast<std::size_t>(t) * h;
    for (int j = 0; j < h; ++j) {
      double gi = tape.gate_i[off + j], gf = tape.gate_f[off + j], go = tape.gate_o[off + j];
      double gp = tape.g_pre[off + j], c = tape.cell[off + j];
      double cprev = t > 0 ? tape.cell[off - h + j] : 0.0;
      // h = o silu(c)
      double dcj = dc[j] + dh[j] * go * silu_deriv(c);
      dpre[3 * h + j] = dh[j] * silu(c) * go * (1.0 - go);     // o gate
      dpre[0 * h + j] = dcj * silu(gp) * gi * (1.0 - gi);      // i gate
      dpre[2 * h + j] = dcj * gi * silu_deriv(gp);             // g branch
      dpre[1 * h + j] = dcj * cprev * gf * (1.0 - gf);         // f gate
      dc[j] = dcj * gf;                                        // flows to c_{t-1}
    }
    const double* x = window.data() + static_cast<std::size_t>(t) * in;
    const double* hprev = t > 0 ? tape.hidden.data() + off - h : nullptr;
    std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
    for (int q = 0; q < 4; ++q) {
      for (int j = 0; j < h; ++j) {
        double d = dpre[q * h + j];
        if (d == 0) continue;
        for (int k = 0; k < in; ++k) {
          grad[w.wx(q) + j * in + k] += d * x[k];
          if (dx) dx[static_cast<std::size_t>(t) * in + k] += wp[w.wx(q) + j * in + k] * d;
        }
        if (hprev) {
          for (int k = 0; k < h; ++k) {
            grad[w.wh(q) + j * h + k] += d * hprev[k];
            dh_prev[k] += wp[w.wh(q) + j * h + k] * d;
          }
        }
        grad[w.bx(q) + j] += d;
        grad[w.bh(q) + j] += d;
      }
    }
    std::swap(dh, dh_prev);
  }
}

}  // namespace

LstmWeights init_weights(int input_dim, int hidden_dim, std::uint64_t seed) {
  if (input_dim < 1 || hidden_dim < 1) throw Error("lstm: bad dimensions");
  LstmWeights w;
  w.input_dim = input_dim;
  w.hidden_dim = hidden_dim;
  w.params.resize(w.n_params());
  Rng rng(mix_seed(seed, 0x11f1));
  const double r = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  for (double& v : w.params) v = rng.uniform(-r, r);
  return w;
}

double forward(const LstmWeights& w, std::span<const double> window) {
  thread_local Tape tape;
  return run_forward(w, window, tape);
}

std::vector<double> output_input_gradients(const LstmWeights& w,
                                           std::span<const double> window) {
  thread_local Tape tape;
  run_forward(w, window, tape);
  std::vector<double> grad(w.n_params(), 0.0);
  std::vector<double> dx(window.size(), 0.0);
  run_backward(w, window, tape, 1.0, grad.data(), dx.data());
  return dx;
}

std::pair<WindowSet, WindowSet> assemble_windows(const Panel& panel, int input_dim, int window,
                                                 double val_fraction) {
  if (input_dim != 1 && input_dim != 2) throw Error("assemble_windows: input_dim must be 1 or 2");
  if (window < 1) throw Error("assemble_windows: window must be positive");
  if (val_fraction < 0 || val_fraction >= 1)
    throw Error("assemble_windows: val_fraction must lie in [0, 1)");

  WindowSet tr, va;
  tr.input_dim = va.input_dim = input_dim;
  tr.window = va.window = window;

  const std::size_t p = static_cast<std::size_t>(window);
  for (std::uint32_t ci = 0; ci < panel.coins.size(); ++ci) {
    const CoinSeries& s = panel.coins[ci];
    // lag rows must carry a return when returns are inputs, so the segment
    // head is usable as a lag only in the sigma-only configuration
    const std::size_t lag_floor = input_dim == 2 ? 1 : 0;
    WindowSet mine;
    mine.input_dim = input_dim;
    mine.window = window;
    for (const Segment& seg : s.segments) {
      for (std::size_t i = seg.first + 1; i < seg.first + seg.count; ++i) {
        if (!panel.train_range.contains(s.days[i].date)) continue;
        if (i < seg.first + lag_floor + p) continue;
        if (s.days[i - p].date < panel.train_range.first) continue;
        for (std::size_t j = i - p; j < i; ++j) {
          mine.x.push_back(s.norm_sigma(j));
          if (input_dim == 2) mine.x.push_back(s.norm_ret(j));
        }
        mine.y.push_back(s.norm_sigma(i));
        mine.coin.push_back(ci);
        mine.date.push_back(s.days[i].date);
      }
    }
    // chronological tail of this coin's windows becomes validation data
    std::size_t n = mine.size();
    std::size_t n_val = static_cast<std::size_t>(val_fraction * static_cast<double>(n));
    std::size_t len = p * static_cast<std::size_t>(input_dim);
    for (std::size_t r = 0; r < n; ++r) {
      WindowSet& dst = r < n - n_val ? tr : va;
      dst.x.insert(dst.x.end(), mine.x.begin() + r * len, mine.x.begin() + (r + 1) * len);
      dst.y.push_back(mine.y[r]);
      dst.coin.push_back(mine.coin[r]);
      dst.date.push_back(mine.date[r]);
    }
  }
  return {std::move(tr), std::move(va)};
}

double loss_gradients(const LstmWeights& w, const WindowSet& ws,
                      std::span<const std::size_t> idx, std::vector<double>& grad) {
  grad.assign(w.n_params(), 0.0);
  if (idx.empty()) return 0;
  thread_local Tape tape;
  double loss = 0;
  const double scale = 2.0 / static_cast<double>(idx.size());
  for (std::size_t i : idx) {
    auto row = ws.row(i);
    double yhat = run_forward(w, row, tape);
    double err = yhat - ws.y[i];
    loss += err * err;
    run_backward(w, row, tape, scale * err, grad.data(), nullptr);
  }
  return loss / static_cast<double>(idx.size());
}

double mse_loss(const LstmWeights& w, const WindowSet& ws) {
  double loss = 0;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    double err = forward(w, ws.row(i)) - ws.y[i];
    loss += err * err;
  }
  return ws.size() ? loss / static_cast<double>(ws.size()) : 0;
}

LstmWeights train(const WindowSet& train_ws, const WindowSet& val_ws, const LstmConfig& config,
                  const LstmWeights* init, TrainReport* report) {
  if (train_ws.size() == 0) throw FitError("lstm train: no usable windows");
  if (train_ws.input_dim != config.input_dim || train_ws.window != config.window)
    throw Error("lstm train: window set does not match config");

  LstmWeights w = init ? *init : init_weights(config.input_dim, config.hidden_dim, config.seed);
  if (w.input_dim != config.input_dim || w.hidden_dim != config.hidden_dim)
    throw Error("lstm train: init weights do not match config");

  auto metric = [&]() { return val_ws.size() ? mse_loss(w, val_ws) : mse_loss(w, train_ws); };

  LstmWeights best = w;
  double best_metric = metric();  // untrained init is a restore candidate
  int best_epoch = 0, bad = 0, epoch = 0;

  Rng shuffler(mix_seed(config.seed, 0x5b));
  std::vector<std::size_t> order(train_ws.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  const std::size_t bs = config.batch_size > 0 ? static_cast<std::size_t>(config.batch_size)
                                               : train_ws.size();
  std::vector<double> grad, m(w.n_params(), 0.0), v(w.n_params(), 0.0);
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  long step = 0;

  for (epoch = 1; epoch <= config.epochs; ++epoch) {
    // Fisher-Yates reshuffle per epoch
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffler.below(i)]);

    for (std::size_t start = 0; start < order.size(); start += bs) {
      std::size_t stop = std::min(order.size(), start + bs);
      loss_gradients(w, train_ws, {order.data() + start, stop - start}, grad);
      ++step;
      double corr1 = 1.0 - std::pow(b1, static_cast<double>(step));
      double corr2 = 1.0 - std::pow(b2, static_cast<double>(step));
      for (std::size_t j = 0; j < w.params.size(); ++j) {
        m[j] = b1 * m[j] + (1.0 - b1) * grad[j];
        v[j] = b2 * v[j] + (1.0 - b2) * grad[j] * grad[j];
        w.params[j] -= config.lr * (m[j] / corr1) / (std::sqrt(v[j] / corr2) + eps);
      }
    }

    double cur = metric();
    if (cur < best_metric) {
      best_metric = cur;
      best = w;
      best_epoch = epoch;
      bad = 0;
    } else if (++bad >= config.patience) {
      break;
    }
  }

  if (report) {
    report->epochs_run = std::min(epoch, config.epochs);
    report->best_epoch = best_epoch;
    report->best_metric = best_metric;
  }
  return best;
}

Ensemble train_ensemble(const WindowSet& train_ws, const WindowSet& val_ws,
                        const LstmConfig& config) {
  Ensemble e;
  e.config = config;
  e.members.resize(static_cast<std::size_t>(config.members));

  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (;;) {
      std::size_t k = next.fetch_add(1);
      if (k >= e.members.size()) return;
      LstmConfig mc = config;
      mc.seed = config.seed + k;
      e.members[k] = train(train_ws, val_ws, mc);
    }
  };
  unsigned n_threads = std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                                          static_cast<unsigned>(config.members));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  return e;
}

double predict_ensemble(const Ensemble& e, std::span<const double> window) {
  if (e.members.empty()) throw Error("predict_ensemble: no members");
  // Sort member outputs before summing so the mean does not depend on member
  // order (floating-point addition is order sensitive).
  std::vector<double> outs;
  outs.reserve(e.members.size());
  for (const auto& m : e.members) outs.push_back(forward(m, window));
  std::sort(outs.begin(), outs.end());
  double acc = 0;
  for (double v : outs) acc += v;
  return acc / static_cast<double>(outs.size());
}

Ensemble fine_tune(const Ensemble& universal, const WindowSet& train_ws,
                   const WindowSet& val_ws, const LstmConfig& config) {
  if (train_ws.size() == 0) throw FitError("fine_tune: coin has no usable windows");
  Ensemble e;
  e.config = config;
  e.members.resize(universal.members.size());
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (;;) {
      std::size_t k = next.fetch_add(1);
      if (k >= e.members.size()) return;
      LstmConfig mc = config;
      mc.seed = config.seed + k;
      e.members[k] = train(train_ws, val_ws, mc, &universal.members[k]);
    }
  };
  unsigned n_threads = std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                                          static_cast<unsigned>(e.members.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  return e;
}

// --- sensitivities ---------------------------------------------------------

SensitivityResult sensitivities(const Ensemble& e, const Panel& panel, int tau_max) {
  if (e.config.input_dim != 2)
    throw Error("sensitivities: needs the sigma+return input configuration");
  const int p = e.config.window;
  if (tau_max < 1 || tau_max > p) throw Error("sensitivities: tau_max must lie in [1, window]");

  SensitivityResult out;
  const std::size_t pp = static_cast<std::size_t>(p);
  for (const CoinSeries& s : panel.coins) {
    SensitivityProfile prof;
    prof.coin = s.coin;
    std::vector<double> a_sum(tau_max, 0), a_sumsq(tau_max, 0), b_sum(tau_max, 0),
        b_sumsq(tau_max, 0);
    std::vector<long> a_cnt(tau_max, 0), b_cnt(tau_max, 0);
    prof.alpha_excluded.assign(tau_max, 0);

    std::vector<double> window(pp * 2);
    for (const Segment& seg : s.segments) {
      for (std::size_t i = seg.first + 1; i < seg.first + seg.count; ++i) {
        if (!panel.test_range.contains(s.days[i].date)) continue;
        if (i < seg.first + 1 + pp) continue;  // lag rows need returns
        for (std::size_t j = 0; j < pp; ++j) {
          window[2 * j] = s.norm_sigma(i - pp + j);
          window[2 * j + 1] = s.norm_ret(i - pp + j);
        }

        // ensemble output gradient = mean of member gradients (linearity)
        std::vector<double> grads(window.size(), 0.0);
        double yhat = 0;
        for (const auto& mw : e.members) {
          auto g = output_input_gradients(mw, window);
          for (std::size_t j = 0; j < g.size(); ++j) grads[j] += g[j];
          yhat += forward(mw, window);
        }
        const double nm = static_cast<double>(e.members.size());
        for (double& g : grads) g /= nm;
        yhat /= nm;

        double sigma_hat = yhat * s.norm.vol_scale;
        double alpha1 = kNaN, beta1 = kNaN;
        for (int tau = 1; tau <= tau_max; ++tau) {
          std::size_t feat = (pp - static_cast<std::size_t>(tau)) * 2;
          double sig_lag = s.days[i - static_cast<std::size_t>(tau)].sigma;
          // d sigma_hat / d sigma_raw: the vol_scale factors cancel, leaving
          // the normalized-input gradient; alpha adds the 1/(2 sigma) chain
          // rule to express it against sigma^2
          if (sig_lag == 0) {
            ++prof.alpha_excluded[tau - 1];
          } else {
            double alpha = grads[feat] / (2.0 * sig_lag);
            a_sum[tau - 1] += alpha;
            a_sumsq[tau - 1] += alpha * alpha;
            ++a_cnt[tau - 1];
            if (tau == 1) alpha1 = alpha;
          }
          double beta = s.norm.vol_scale * grads[feat + 1] / s.norm.ret_scale;
          b_sum[tau - 1] += beta;
          b_sumsq[tau - 1] += beta * beta;
          ++b_cnt[tau - 1];
          if (tau == 1) beta1 = beta;
        }
        double sig_prev = s.days[i - 1].sigma;
        out.scatter.push_back({s.coin, s.days[i].date, sigma_hat, sig_prev * sig_prev,
                               s.days[i - 1].ret, alpha1, beta1});
      }
    }

    prof.alpha_mean.assign(tau_max, kNaN);
    prof.alpha_std.assign(tau_max, kNaN);
    prof.beta_mean.assign(tau_max, kNaN);
    prof.beta_std.assign(tau_max, kNaN);
    for (int t = 0; t < tau_max; ++t) {
      if (a_cnt[t] > 0) {
        double m = a_sum[t] / static_cast<double>(a_cnt[t]);
        prof.alpha_mean[t] = m;
        prof.alpha_std[t] = std::sqrt(std::max(0.0, a_sumsq[t] / static_cast<double>(a_cnt[t]) - m * m));
      }
      if (b_cnt[t] > 0) {
        double m = b_sum[t] / static_cast<double>(b_cnt[t]);
        prof.beta_mean[t] = m;
        prof.beta_std[t] = std::sqrt(std::max(0.0, b_sumsq[t] / static_cast<double>(b_cnt[t]) - m * m));
      }
    }
    out.profiles.push_back(std::move(prof));
  }
  return out;
}

}  // namespace volcast::lstm
