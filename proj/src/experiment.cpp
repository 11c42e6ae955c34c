#include "volcast/experiment.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "volcast/baselines.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace volcast {

namespace {

// --- file plumbing ---------------------------------------------------------

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& content) {
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << content;
  if (!out) throw Error("short write to " + path);
}

void require_file(const std::string& path, const std::string& step, const std::string& hint) {
  if (!fs::exists(path))
    throw DependencyError(step + " requires " + path + "; run the " + hint + " step first");
}

std::string reports_dir(const RunConfig& cfg) { return cfg.run_dir + "/reports"; }
std::string sens_dir(const RunConfig& cfg) { return cfg.run_dir + "/sensitivities"; }

// --- manifest ----------------------------------------------------------

json config_json(const RunConfig& cfg) {
  json j;
  j["run_dir"] = cfg.run_dir;
  j["data_dir"] = cfg.data_dir;
  j["train"] = {cfg.train.first.str(), cfg.train.last.str()};
  j["test"] = {cfg.test.first.str(), cfg.test.last.str()};
  j["min_bars"] = cfg.min_bars;
  j["filter"] = {{"stablecoins", cfg.filter.stablecoins},
                 {"leveraged_patterns", cfg.filter.leveraged_patterns},
                 {"min_days", cfg.filter.min_days},
                 {"min_median_volume", cfg.filter.min_median_volume}};
  j["models"] = cfg.models;
  j["seed"] = cfg.seed;
  j["lstm"] = {{"lr", cfg.lstm_lr},           {"epochs", cfg.lstm_epochs},
               {"batch", cfg.lstm_batch},     {"val_fraction", cfg.lstm_val_fraction},
               {"patience", cfg.lstm_patience}, {"members", cfg.lstm_members},
               {"ft_epochs", cfg.ft_epochs}};
  j["delta_max"] = cfg.delta_max;
  j["n_trunc"] = cfg.n_trunc;
  j["qrh"] = {{"factors", cfg.qrh_factors},
              {"t_min", cfg.qrh_tmin},
              {"t_max", cfg.qrh_tmax},
              {"burn_in", cfg.burn_in}};
  j["baseline"] = cfg.baseline;
  j["lambdas"] = cfg.lambdas;
  j["sweep_reference"] = cfg.sweep_reference;
  j["sens_model"] = cfg.sens_model;
  j["tau_max"] = cfg.tau_max;
  j["subset_file"] = cfg.subset_file;
  j["synth"] = {{"coins", cfg.synth.coins},
                {"days", cfg.synth.days},
                {"hurst", cfg.synth.hurst},
                {"nu", cfg.synth.nu},
                {"qrh_mix", cfg.synth.qrh_mix},
                {"seed", cfg.synth.seed},
                {"start", cfg.synth.start.str()},
                {"bars_per_day", cfg.synth.bars_per_day},
                {"base_sigma_min", cfg.synth.base_sigma_min},
                {"base_sigma_max", cfg.synth.base_sigma_max},
                {"volume_scale", cfg.synth.volume_scale},
                {"kernel_factors", cfg.synth.kernel_factors},
                {"kernel_tmin", cfg.synth.kernel_tmin},
                {"kernel_tmax", cfg.synth.kernel_tmax},
                {"feedback_b", cfg.synth.feedback_b}};
  return j;
}

json hash_files(const std::vector<std::string>& paths) {
  json j = json::object();
  for (const auto& p : paths) j[p] = hex64(fnv1a(read_file(p)));
  return j;
}

// Records one step in <run_dir>/manifest.json: the full config plus content
// hashes of everything read and written. No timestamps, so identical runs
// produce identical manifests.
void manifest_record(const RunConfig& cfg, const std::string& step,
                     const std::vector<std::string>& inputs,
                     const std::vector<std::string>& outputs) {
  std::string path = cfg.run_dir + "/manifest.json";
  json m;
  if (fs::exists(path)) {
    try {
      m = json::parse(read_file(path));
    } catch (const json::exception&) {
      m = json::object();  // unreadable manifest: start over rather than fail the run
    }
  }
  m["version"] = 1;
  if (!m.contains("steps") || !m["steps"].is_object()) m["steps"] = json::object();
  m["steps"][step] = {{"config", config_json(cfg)},
                      {"inputs", hash_files(inputs)},
                      {"outputs", hash_files(outputs)}};
  write_file(path, m.dump(2) + "\n");
}

// --- model id helpers --------------------------------------------------

const LstmVariant* variant_for(const std::string& id) {
  std::string base = id;
  for (std::string_view suffix : {"_ft", "_sub"}) {
    if (base.size() > suffix.size() && base.ends_with(suffix))
      base = base.substr(0, base.size() - suffix.size());
  }
  for (const auto& v : lstm_variants())
    if (v.id == base) return &v;
  return nullptr;
}

bool is_ft(const std::string& id) { return id.ends_with("_ft"); }
bool is_sub(const std::string& id) { return id.ends_with("_sub"); }

// --- panel access ------------------------------------------------------

Panel load_panel_for(const RunConfig& cfg, const std::string& step) {
  require_file(panel_csv_path(cfg), step, "ingest");
  require_file(panel_meta_path(cfg), step, "ingest");
  return load_panel(panel_csv_path(cfg), panel_meta_path(cfg));
}

// Contiguous index runs of complete train-range days, one per (coin, segment)
// overlap. The segment head is included: Hurst estimation needs only sigma.
std::vector<std::vector<double>> train_sigma_runs(const CoinSeries& s, const DateRange& train) {
  std::vector<std::vector<double>> runs;
  for (const auto& seg : s.segments) {
    std::vector<double> run;
    for (std::size_t i = seg.first; i < seg.first + seg.count; ++i) {
      if (!train.contains(s.days[i].date)) continue;
      run.push_back(s.days[i].sigma);
    }
    if (run.size() >= 2) runs.push_back(std::move(run));
  }
  return runs;
}

HurstEstimate pooled_hurst(const Panel& panel, int delta_max) {
  std::vector<std::vector<double>> runs;
  for (const auto& s : panel.coins) {
    auto r = train_sigma_runs(s, panel.train_range);
    runs.insert(runs.end(), r.begin(), r.end());
  }
  return estimate_hurst_pooled(runs, delta_max);
}

// Eligible (z_prev, row index) pairs for the quadratic device: Z accumulates
// the coin's normalized returns within a segment, and day t becomes usable
// once burn_in returns have entered the state.
struct QrhRow {
  std::size_t idx = 0;
  double z_prev = 0;
};
std::vector<QrhRow> qrh_rows(const CoinSeries& s, const KernelNodes& nodes, int burn_in,
                             const DateRange& range) {
  std::vector<QrhRow> rows;
  for (const auto& seg : s.segments) {
    QrhState state = init_state(nodes);
    for (std::size_t i = seg.first + 1; i < seg.first + seg.count; ++i) {
      if (static_cast<long>(i - 1 - seg.first) >= burn_in && range.contains(s.days[i].date))
        rows.push_back({i, state.z});
      state = advance_z(std::move(state), nodes, s.norm_ret(i));
    }
  }
  return rows;
}

std::vector<std::string> read_subset(const std::string& path) {
  std::string text = read_file(path);
  std::vector<std::string> coins;
  for (auto line : split(text, '\n')) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
    while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
    if (line.empty() || line.front() == '#') continue;
    coins.emplace_back(line);
  }
  if (coins.empty()) throw ConfigError("subset file " + path + " lists no coins");
  return coins;
}

Panel restrict_panel(const Panel& panel, const std::vector<std::string>& coins) {
  Panel out;
  out.train_range = panel.train_range;
  out.test_range = panel.test_range;
  for (const auto& s : panel.coins)
    if (std::find(coins.begin(), coins.end(), s.coin) != coins.end()) out.coins.push_back(s);
  return out;
}

// --- fitting -------------------------------------------------------------

json linear_to_json(const LinearModel& m) {
  return {{"intercept", m.intercept}, {"coeffs", m.coeffs}};
}

LinearModel linear_from_json(LinearSpec spec, int p, const json& j) {
  LinearModel m;
  m.spec = spec;
  m.p = p;
  m.intercept = j.at("intercept").get<double>();
  m.coeffs = j.at("coeffs").get<std::vector<double>>();
  return m;
}

json hurst_to_json(const HurstEstimate& est, double c) {
  return {{"H", est.H},   {"H_raw", est.H_raw},      {"clamped", est.clamped},
          {"nu", est.nu}, {"c", c}};
}

json fit_linear_artifact(const Panel& panel, const RunConfig& cfg, const std::string& id) {
  LinearSpec spec = id == "har" ? LinearSpec::har : LinearSpec::ar;
  int p = id == "har" ? 30 : (id == "ar7" ? 7 : 30);
  json per_coin = json::object(), skipped = json::object();
  for (const auto& s : panel.coins) {
    try {
      LinearModel m = spec == LinearSpec::har ? fit_har(s, panel.train_range)
                                              : fit_ar(s, panel.train_range, p);
      per_coin[s.coin] = linear_to_json(m);
    } catch (const FitError& e) {
      skipped[s.coin] = e.what();
    }
  }
  if (per_coin.empty()) throw FitError(id + ": no coin had enough training rows");
  return {{"format", 1},
          {"model", id},
          {"kind", "linear"},
          {"spec", spec == LinearSpec::har ? "har" : "ar"},
          {"p", p},
          {"per_coin", per_coin},
          {"skipped", skipped}};
}

json fit_rfsv_artifact(const Panel& panel, const RunConfig& cfg, const std::string& id) {
  json j = {{"format", 1},
            {"model", id},
            {"kind", "rfsv"},
            {"delta_max", cfg.delta_max},
            {"n_trunc", cfg.n_trunc}};
  if (id == "rfsv") {
    HurstEstimate est = pooled_hurst(panel, cfg.delta_max);
    j["universal"] = hurst_to_json(est, rfsv_correction(est.H, est.nu));
  } else {
    json per_coin = json::object(), skipped = json::object();
    for (const auto& s : panel.coins) {
      try {
        HurstEstimate est =
            estimate_hurst_pooled(train_sigma_runs(s, panel.train_range), cfg.delta_max);
        per_coin[s.coin] = hurst_to_json(est, rfsv_correction(est.H, est.nu));
      } catch (const Error& e) {
        skipped[s.coin] = e.what();
      }
    }
    if (per_coin.empty()) throw FitError(id + ": no coin had enough training history");
    j["per_coin"] = per_coin;
    j["skipped"] = skipped;
  }
  return j;
}

json qrh_params_to_json(const QrhParams& p, const QrhCalibrationReport& rep) {
  return {{"a", p.a},
          {"b", p.b},
          {"c", p.c},
          {"a_floored", rep.a_floored},
          {"c_floored", rep.c_floored},
          {"b_negative", rep.b_negative}};
}

json fit_qrh_artifact(const Panel& panel, const RunConfig& cfg, const std::string& id) {
  HurstEstimate est = pooled_hurst(panel, cfg.delta_max);
  KernelNodes nodes = kernel_nodes(est.H, cfg.qrh_factors, cfg.qrh_tmin, cfg.qrh_tmax);
  json j = {{"format", 1},
            {"model", id},
            {"kind", "qrh"},
            {"H", est.H},
            {"factors", cfg.qrh_factors},
            {"t_min", cfg.qrh_tmin},
            {"t_max", cfg.qrh_tmax},
            {"burn_in", cfg.burn_in}};
  auto coin_rows = [&](const CoinSeries& s, std::vector<double>& z, std::vector<double>& var) {
    for (const auto& row : qrh_rows(s, nodes, cfg.burn_in, panel.train_range)) {
      double sn = s.norm_sigma(row.idx);
      z.push_back(row.z_prev);
      var.push_back(sn * sn);
    }
  };
  if (id == "qrh") {
    std::vector<double> z, var;
    for (const auto& s : panel.coins) coin_rows(s, z, var);
    QrhCalibrationReport rep;
    QrhParams p = calibrate_qrh(z, var, &rep);
    j["params"] = qrh_params_to_json(p, rep);
  } else {
    json per_coin = json::object(), skipped = json::object();
    for (const auto& s : panel.coins) {
      std::vector<double> z, var;
      coin_rows(s, z, var);
      try {
        QrhCalibrationReport rep;
        QrhParams p = calibrate_qrh(z, var, &rep);
        per_coin[s.coin] = qrh_params_to_json(p, rep);
      } catch (const FitError& e) {
        skipped[s.coin] = e.what();
      }
    }
    if (per_coin.empty()) throw FitError(id + ": no coin had enough burned-in rows");
    j["per_coin"] = per_coin;
    j["skipped"] = skipped;
  }
  return j;
}

lstm::LstmConfig lstm_config_for(const RunConfig& cfg, const LstmVariant& v,
                                 const std::string& id) {
  lstm::LstmConfig c;
  c.input_dim = v.input_dim;
  c.hidden_dim = v.hidden_dim;
  c.window = v.window;
  c.seed = mix_seed(cfg.seed, fnv1a(id));
  c.lr = cfg.lstm_lr;
  c.epochs = cfg.lstm_epochs;
  c.batch_size = cfg.lstm_batch;
  c.val_fraction = cfg.lstm_val_fraction;
  c.patience = cfg.lstm_patience;
  c.members = cfg.lstm_members;
  return c;
}

json ensemble_members_json(const lstm::Ensemble& e) {
  json members = json::array();
  for (std::size_t k = 0; k < e.members.size(); ++k)
    members.push_back({{"seed", e.config.seed + k}, {"params", doubles_to_hex(e.members[k].params)}});
  return members;
}

lstm::Ensemble ensemble_from_json(const lstm::LstmConfig& c, const json& members) {
  lstm::Ensemble e;
  e.config = c;
  for (const auto& m : members) {
    lstm::LstmWeights w;
    w.input_dim = c.input_dim;
    w.hidden_dim = c.hidden_dim;
    w.params = hex_to_doubles(m.at("params").get<std::string>());
    if (w.params.size() != w.n_params())
      throw Error("stored weight vector has wrong length for the declared shape");
    e.members.push_back(std::move(w));
  }
  return e;
}

json fit_lstm_artifact(const Panel& panel, const RunConfig& cfg, const std::string& id,
                       const LstmVariant& v) {
  const Panel* train_panel = &panel;
  Panel restricted;
  json subset = json::array();
  if (is_sub(id)) {
    auto coins = read_subset(cfg.subset_file);
    restricted = restrict_panel(panel, coins);
    if (restricted.coins.empty())
      throw FitError(id + ": subset file matches no coin in the panel");
    for (const auto& s : restricted.coins) subset.push_back(s.coin);
    train_panel = &restricted;
  }
  lstm::LstmConfig c = lstm_config_for(cfg, v, id);
  auto [train_ws, val_ws] = lstm::assemble_windows(*train_panel, c.input_dim, c.window,
                                                   c.val_fraction);
  if (train_ws.size() == 0) throw FitError(id + ": no training windows in the train range");
  lstm::Ensemble e = lstm::train_ensemble(train_ws, val_ws, c);
  json j = {{"format", 1},
            {"model", id},
            {"kind", "lstm"},
            {"input_dim", c.input_dim},
            {"hidden_dim", c.hidden_dim},
            {"window", c.window},
            {"seed", c.seed},
            {"members", ensemble_members_json(e)}};
  if (is_sub(id)) j["subset"] = subset;
  return j;
}

json fit_lstm_ft_artifact(const Panel& panel, const RunConfig& cfg, const std::string& id,
                          const LstmVariant& v, const json& base_artifact) {
  lstm::LstmConfig c = lstm_config_for(cfg, v, v.id);
  lstm::Ensemble universal = ensemble_from_json(c, base_artifact.at("members"));
  json per_coin = json::object(), skipped = json::object();
  for (const auto& s : panel.coins) {
    Panel one;
    one.train_range = panel.train_range;
    one.test_range = panel.test_range;
    one.coins.push_back(s);
    lstm::LstmConfig fc = c;
    fc.seed = mix_seed(c.seed, fnv1a(s.coin));  // decorrelates the batch shuffles
    fc.epochs = cfg.ft_epochs;
    fc.val_fraction = 0;  // monitor the coin's own train loss
    auto [train_ws, val_ws] = lstm::assemble_windows(one, fc.input_dim, fc.window, 0.0);
    if (train_ws.size() == 0) {
      skipped[s.coin] = "no training windows";
      continue;
    }
    lstm::Ensemble tuned = lstm::fine_tune(universal, train_ws, val_ws, fc);
    json members = json::array();
    for (const auto& m : tuned.members) members.push_back(doubles_to_hex(m.params));
    per_coin[s.coin] = {{"members", members}, {"seed", fc.seed}};
  }
  if (per_coin.empty()) throw FitError(id + ": no coin could be fine-tuned");
  return {{"format", 1},
          {"model", id},
          {"kind", "lstm_ft"},
          {"base", base_artifact.at("model")},
          {"input_dim", c.input_dim},
          {"hidden_dim", c.hidden_dim},
          {"window", c.window},
          {"seed", c.seed},
          {"per_coin", per_coin},
          {"skipped", skipped}};
}

// --- forecasting -----------------------------------------------------------

void emit(ModelForecast& f, Date date, double sigma_hat) {
  f.rows.push_back({date, std::max(0.0, sigma_hat)});
}

std::vector<ModelForecast> forecast_linear(const Panel& panel, const std::string& id,
                                           const json& art) {
  LinearSpec spec = art.at("spec") == "har" ? LinearSpec::har : LinearSpec::ar;
  int p = art.at("p").get<int>();
  const json& per_coin = art.at("per_coin");
  std::vector<ModelForecast> out;
  for (const auto& s : panel.coins) {
    if (!per_coin.contains(s.coin)) continue;
    LinearModel m = linear_from_json(spec, p, per_coin.at(s.coin));
    ModelForecast f{id, s.coin, {}};
    std::vector<double> history;
    for (const auto& seg : s.segments) {
      for (std::size_t i = seg.first + p; i < seg.first + seg.count; ++i) {
        if (!panel.test_range.contains(s.days[i].date)) continue;
        history.clear();
        for (std::size_t k = i - p; k < i; ++k) history.push_back(s.norm_sigma(k));
        emit(f, s.days[i].date, predict_linear(m, history) * s.norm.vol_scale);
      }
    }
    if (!f.rows.empty()) out.push_back(std::move(f));
  }
  return out;
}

std::vector<ModelForecast> forecast_rfsv(const Panel& panel, const std::string& id,
                                         const json& art) {
  int n_trunc = art.at("n_trunc").get<int>();
  auto params_of = [](const json& j) {
    return RfsvParams{j.at("H").get<double>(), j.at("nu").get<double>(), j.at("c").get<double>()};
  };
  std::vector<ModelForecast> out;
  for (const auto& s : panel.coins) {
    RfsvParams params;
    if (art.contains("universal")) {
      params = params_of(art.at("universal"));
    } else if (art.at("per_coin").contains(s.coin)) {
      params = params_of(art.at("per_coin").at(s.coin));
    } else {
      continue;
    }
    FractionalWeights weights = fractional_weights(params.H, n_trunc);
    ModelForecast f{id, s.coin, {}};
    std::vector<double> history(n_trunc);
    for (const auto& seg : s.segments) {
      for (std::size_t i = seg.first + n_trunc; i < seg.first + seg.count; ++i) {
        if (!panel.test_range.contains(s.days[i].date)) continue;
        bool ok = true;
        for (std::size_t k = 0; k < static_cast<std::size_t>(n_trunc); ++k) {
          history[k] = s.days[i - n_trunc + k].sigma;
          if (!(history[k] > 0)) ok = false;
        }
        if (!ok) continue;  // a zero-volatility day breaks the log; skip the date
        emit(f, s.days[i].date, rfsv_forecast(params, weights, history));
      }
    }
    if (!f.rows.empty()) out.push_back(std::move(f));
  }
  return out;
}

std::vector<ModelForecast> forecast_qrh(const Panel& panel, const std::string& id,
                                        const json& art) {
  KernelNodes nodes = kernel_nodes(art.at("H").get<double>(), art.at("factors").get<int>(),
                                   art.at("t_min").get<double>(), art.at("t_max").get<double>());
  int burn_in = art.at("burn_in").get<int>();
  auto params_of = [](const json& j) {
    QrhParams p;
    p.a = j.at("a").get<double>();
    p.b = j.at("b").get<double>();
    p.c = j.at("c").get<double>();
    return p;
  };
  std::vector<ModelForecast> out;
  for (const auto& s : panel.coins) {
    QrhParams params;
    if (art.contains("params")) {
      params = params_of(art.at("params"));
    } else if (art.at("per_coin").contains(s.coin)) {
      params = params_of(art.at("per_coin").at(s.coin));
    } else {
      continue;
    }
    ModelForecast f{id, s.coin, {}};
    for (const auto& row : qrh_rows(s, nodes, burn_in, panel.test_range))
      emit(f, s.days[row.idx].date, qrh_forecast(params, row.z_prev) * s.norm.vol_scale);
    if (!f.rows.empty()) out.push_back(std::move(f));
  }
  return out;
}

std::vector<ModelForecast> forecast_lstm(const Panel& panel, const std::string& id,
                                         const json& art) {
  int input_dim = art.at("input_dim").get<int>();
  int hidden_dim = art.at("hidden_dim").get<int>();
  int p = art.at("window").get<int>();
  lstm::LstmConfig c;
  c.input_dim = input_dim;
  c.hidden_dim = hidden_dim;
  c.window = p;
  bool per_coin = art.at("kind") == "lstm_ft";
  lstm::Ensemble universal;
  if (!per_coin) universal = ensemble_from_json(c, art.at("members"));

  std::set<std::string> subset;
  if (art.contains("subset"))
    for (const auto& sym : art.at("subset")) subset.insert(sym.get<std::string>());

  std::vector<ModelForecast> out;
  std::vector<double> window(static_cast<std::size_t>(p) * input_dim);
  // step rows with a return input cannot use the segment head, whose return
  // may cross a gap
  std::size_t lag_floor = input_dim == 2 ? 1 : 0;
  for (const auto& s : panel.coins) {
    if (!subset.empty() && !subset.contains(s.coin)) continue;
    const lstm::Ensemble* e = &universal;
    lstm::Ensemble coin_e;
    if (per_coin) {
      if (!art.at("per_coin").contains(s.coin)) continue;
      const json& pc = art.at("per_coin").at(s.coin);
      json members = json::array();
      for (const auto& hex : pc.at("members")) members.push_back({{"params", hex}});
      coin_e = ensemble_from_json(c, members);
      e = &coin_e;
    }
    ModelForecast f{id, s.coin, {}};
    for (const auto& seg : s.segments) {
      for (std::size_t i = seg.first + lag_floor + p; i < seg.first + seg.count; ++i) {
        if (!panel.test_range.contains(s.days[i].date)) continue;
        for (std::size_t k = 0; k < static_cast<std::size_t>(p); ++k) {
          std::size_t j = i - p + k;
          window[k * input_dim] = s.norm_sigma(j);
          if (input_dim == 2) window[k * input_dim + 1] = s.norm_ret(j);
        }
        emit(f, s.days[i].date, lstm::predict_ensemble(*e, window) * s.norm.vol_scale);
      }
    }
    if (!f.rows.empty()) out.push_back(std::move(f));
  }
  return out;
}

std::vector<ModelForecast> forecast_from_artifact(const Panel& panel, const std::string& id,
                                                  const json& art) {
  const std::string kind = art.at("kind").get<std::string>();
  if (kind == "linear") return forecast_linear(panel, id, art);
  if (kind == "rfsv") return forecast_rfsv(panel, id, art);
  if (kind == "qrh") return forecast_qrh(panel, id, art);
  if (kind == "lstm" || kind == "lstm_ft") return forecast_lstm(panel, id, art);
  throw Error("unknown model kind '" + kind + "' in artifact for " + id);
}

// --- report csv writers ----------------------------------------------------

std::string ratios_csv(const EvalReport& report) {
  std::string out = "model,coin,days,mse,baseline_mse,ratio\n";
  for (const auto& r : report.rows) {
    out += r.model + "," + r.coin + "," + std::to_string(r.days) + "," + fmt_double(r.mse) + "," +
           fmt_double(r.baseline_mse) + "," + fmt_double(r.ratio) + "\n";
  }
  return out;
}

std::string summary_csv(const EvalReport& report) {
  std::string out = "model,n,median,q1,q3,whisker_lo,whisker_hi,outliers\n";
  for (const auto& [model, b] : report.summary) {
    out += model + "," + std::to_string(b.n) + "," + fmt_double(b.median) + "," +
           fmt_double(b.q1) + "," + fmt_double(b.q3) + "," + fmt_double(b.lo) + "," +
           fmt_double(b.hi) + "," + std::to_string(b.outliers) + "\n";
  }
  return out;
}

std::string exclusions_csv(const EvalReport& report) {
  std::string out = "item,reason\n";
  for (const auto& r : report.excluded) out += r.coin + "," + r.reason + "\n";
  return out;
}

double summary_median(const EvalReport& rep) {
  for (const auto& [model, b] : rep.summary)
    if (model == "blend") return b.median;
  return kNaN;
}

}  // namespace

// --- public surface ----------------------------------------------------

const std::vector<LstmVariant>& lstm_variants() {
  static const std::vector<LstmVariant> table = {
      {"lstm7vol", 1, 2, 7},
      {"lstm30vol", 1, 2, 30},
      {"lstm7ret", 2, 4, 7},
      {"lstm30ret", 2, 4, 30},
  };
  return table;
}

std::vector<std::string> known_model_ids() {
  std::vector<std::string> ids = {"har", "ar7", "ar30", "rfsv", "rfsv_spec", "qrh", "qrh_spec"};
  for (const auto& v : lstm_variants()) {
    ids.push_back(v.id);
    ids.push_back(v.id + "_ft");
    ids.push_back(v.id + "_sub");
  }
  return ids;
}

std::string panel_csv_path(const RunConfig& cfg) { return cfg.run_dir + "/panel/panel.csv"; }
std::string panel_meta_path(const RunConfig& cfg) { return cfg.run_dir + "/panel/meta.json"; }
std::string model_path(const RunConfig& cfg, const std::string& id) {
  return cfg.run_dir + "/models/" + id + ".json";
}
std::string forecast_path(const RunConfig& cfg, const std::string& id) {
  return cfg.run_dir + "/forecasts/" + id + ".csv";
}

void validate_config(const RunConfig& cfg) {
  std::vector<std::string> problems;
  auto bad = [&](const std::string& msg) { problems.push_back(msg); };

  if (cfg.run_dir.empty()) bad("run_dir must be set");
  if (cfg.data_dir.empty()) bad("data_dir must be set");
  if (cfg.train.first > cfg.train.last) bad("train range is reversed");
  if (cfg.test.first > cfg.test.last) bad("test range is reversed");
  if (cfg.train.first <= cfg.train.last && cfg.test.first <= cfg.test.last &&
      cfg.test.first <= cfg.train.last)
    bad("test range must start after the train range ends");
  if (cfg.min_bars < 1 || cfg.min_bars > 288) bad("min_bars must be in [1, 288]");

  if (cfg.models.empty()) bad("at least one model must be requested");
  auto known = known_model_ids();
  std::set<std::string> seen;
  bool any_sub = false;
  for (const auto& id : cfg.models) {
    if (std::find(known.begin(), known.end(), id) == known.end())
      bad("unknown model id '" + id + "'");
    else if (!seen.insert(id).second)
      bad("model id '" + id + "' listed twice");
    if (is_sub(id)) any_sub = true;
  }
  if (!cfg.models.empty() &&
      std::find(cfg.models.begin(), cfg.models.end(), cfg.baseline) == cfg.models.end())
    bad("baseline '" + cfg.baseline + "' is not in the model list");
  if (any_sub && cfg.subset_file.empty()) bad("subset models require subset_file");

  for (double l : cfg.lambdas)
    if (!(l >= 0 && l <= 1)) bad("lambda " + fmt_double(l) + " is outside [0, 1]");
  if (!cfg.lambdas.empty() && std::find(cfg.lambdas.begin(), cfg.lambdas.end(), 0.0) ==
                                  cfg.lambdas.end())
    bad("the lambda grid must include 0 (the pure fractional-predictor endpoint)");
  if (!cfg.sweep_reference.empty() &&
      std::find(known.begin(), known.end(), cfg.sweep_reference) == known.end())
    bad("unknown sweep reference model '" + cfg.sweep_reference + "'");
  if (!cfg.sens_model.empty()) {
    const LstmVariant* v = variant_for(cfg.sens_model);
    if (v == nullptr)
      bad("sens_model '" + cfg.sens_model + "' is not a recurrent model id");
    else if (v->input_dim != 2)
      bad("sens_model '" + cfg.sens_model + "' has no return input; sensitivities need one");
    else if (is_ft(cfg.sens_model))
      bad("sens_model must be a pooled (not fine-tuned) model");
  }

  if (!(cfg.lstm_lr > 0)) bad("lstm learning rate must be positive");
  if (cfg.lstm_epochs < 1) bad("lstm epochs must be at least 1");
  if (cfg.lstm_batch < 1) bad("lstm batch size must be at least 1");
  if (!(cfg.lstm_val_fraction >= 0 && cfg.lstm_val_fraction < 1))
    bad("lstm val_fraction must be in [0, 1)");
  if (cfg.lstm_patience < 1) bad("lstm patience must be at least 1");
  if (cfg.lstm_members < 1) bad("lstm members must be at least 1");
  if (cfg.ft_epochs < 0) bad("ft_epochs must be nonnegative");
  if (cfg.delta_max < 2) bad("delta_max must be at least 2");
  if (cfg.n_trunc < 2) bad("n_trunc must be at least 2");
  if (cfg.qrh_factors < 2) bad("qrh_factors must be at least 2");
  if (!(cfg.qrh_tmin > 0)) bad("qrh t_min must be positive");
  if (!(cfg.qrh_tmax > cfg.qrh_tmin)) bad("qrh t_max must exceed t_min");
  if (cfg.burn_in < 0) bad("burn_in must be nonnegative");
  if (cfg.tau_max < 1) bad("tau_max must be at least 1");

  if (cfg.synth.coins < 1) bad("synth coins must be at least 1");
  if (cfg.synth.days < 2) bad("synth days must be at least 2");
  if (!(cfg.synth.hurst > 0 && cfg.synth.hurst < 0.5)) bad("synth hurst must be in (0, 0.5)");
  if (!(cfg.synth.nu > 0)) bad("synth nu must be positive");
  if (!(cfg.synth.qrh_mix >= 0 && cfg.synth.qrh_mix <= 1)) bad("synth qrh_mix must be in [0, 1]");
  if (cfg.synth.bars_per_day < 1 || cfg.synth.bars_per_day > 288)
    bad("synth bars_per_day must be in [1, 288]");
  if (!(cfg.synth.base_sigma_min > 0 && cfg.synth.base_sigma_max >= cfg.synth.base_sigma_min))
    bad("synth base sigma range must be positive and ordered");
  if (cfg.synth.kernel_factors < 2) bad("synth kernel_factors must be at least 2");
  if (!(cfg.synth.kernel_tmin > 0 && cfg.synth.kernel_tmax > cfg.synth.kernel_tmin))
    bad("synth kernel t range must be positive and ordered");

  if (!problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw ConfigError(msg);
  }
}

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");

  RunConfig cfg;
  std::vector<std::string> problems;

  auto check_keys = [&](const json& obj, const std::string& prefix,
                        std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool ok = false;
      for (const char* k : allowed) ok = ok || it.key() == k;
      if (!ok) problems.push_back("unknown config key '" + prefix + it.key() + "'");
    }
  };
  auto get = [&](const json& obj, const std::string& prefix, const char* key, auto& out) {
    if (!obj.contains(key)) return;
    try {
      out = obj.at(key).get<std::decay_t<decltype(out)>>();
    } catch (const json::exception&) {
      problems.push_back("config key '" + prefix + key + "' has the wrong type");
    }
  };
  auto get_range = [&](const json& obj, const char* key, DateRange& out) {
    if (!obj.contains(key)) return;
    try {
      auto v = obj.at(key).get<std::vector<std::string>>();
      if (v.size() != 2) throw FormatError("expected [start, end]");
      out = {Date::parse(v[0]), Date::parse(v[1])};
    } catch (const std::exception& e) {
      problems.push_back("config key '" + std::string(key) + "': " + e.what());
    }
  };
  auto get_date = [&](const json& obj, const std::string& prefix, const char* key, Date& out) {
    if (!obj.contains(key)) return;
    try {
      out = Date::parse(obj.at(key).get<std::string>());
    } catch (const std::exception& e) {
      problems.push_back("config key '" + prefix + key + "': " + e.what());
    }
  };

  check_keys(j, "",
             {"run_dir", "data_dir", "train", "test", "min_bars", "filter", "models", "seed",
              "lstm", "delta_max", "n_trunc", "qrh", "baseline", "lambdas", "sweep_reference",
              "sens_model", "tau_max", "subset_file", "synth"});
  get(j, "", "run_dir", cfg.run_dir);
  get(j, "", "data_dir", cfg.data_dir);
  get_range(j, "train", cfg.train);
  get_range(j, "test", cfg.test);
  get(j, "", "min_bars", cfg.min_bars);
  get(j, "", "models", cfg.models);
  get(j, "", "seed", cfg.seed);
  get(j, "", "delta_max", cfg.delta_max);
  get(j, "", "n_trunc", cfg.n_trunc);
  get(j, "", "baseline", cfg.baseline);
  get(j, "", "lambdas", cfg.lambdas);
  get(j, "", "sweep_reference", cfg.sweep_reference);
  get(j, "", "sens_model", cfg.sens_model);
  get(j, "", "tau_max", cfg.tau_max);
  get(j, "", "subset_file", cfg.subset_file);

  if (j.contains("filter") && j.at("filter").is_object()) {
    const json& f = j.at("filter");
    check_keys(f, "filter.",
               {"stablecoins", "leveraged_patterns", "min_days", "min_median_volume"});
    get(f, "filter.", "stablecoins", cfg.filter.stablecoins);
    get(f, "filter.", "leveraged_patterns", cfg.filter.leveraged_patterns);
    get(f, "filter.", "min_days", cfg.filter.min_days);
    get(f, "filter.", "min_median_volume", cfg.filter.min_median_volume);
  } else if (j.contains("filter")) {
    problems.push_back("config key 'filter' must be an object");
  }

  if (j.contains("lstm") && j.at("lstm").is_object()) {
    const json& l = j.at("lstm");
    check_keys(l, "lstm.",
               {"lr", "epochs", "batch", "val_fraction", "patience", "members", "ft_epochs"});
    get(l, "lstm.", "lr", cfg.lstm_lr);
    get(l, "lstm.", "epochs", cfg.lstm_epochs);
    get(l, "lstm.", "batch", cfg.lstm_batch);
    get(l, "lstm.", "val_fraction", cfg.lstm_val_fraction);
    get(l, "lstm.", "patience", cfg.lstm_patience);
    get(l, "lstm.", "members", cfg.lstm_members);
    get(l, "lstm.", "ft_epochs", cfg.ft_epochs);
  } else if (j.contains("lstm")) {
    problems.push_back("config key 'lstm' must be an object");
  }

  if (j.contains("qrh") && j.at("qrh").is_object()) {
    const json& q = j.at("qrh");
    check_keys(q, "qrh.", {"factors", "t_min", "t_max", "burn_in"});
    get(q, "qrh.", "factors", cfg.qrh_factors);
    get(q, "qrh.", "t_min", cfg.qrh_tmin);
    get(q, "qrh.", "t_max", cfg.qrh_tmax);
    get(q, "qrh.", "burn_in", cfg.burn_in);
  } else if (j.contains("qrh")) {
    problems.push_back("config key 'qrh' must be an object");
  }

  if (j.contains("synth") && j.at("synth").is_object()) {
    const json& s = j.at("synth");
    check_keys(s, "synth.",
               {"coins", "days", "hurst", "nu", "qrh_mix", "seed", "start", "bars_per_day",
                "base_sigma_min", "base_sigma_max", "volume_scale", "kernel_factors",
                "kernel_tmin", "kernel_tmax", "feedback_b"});
    get(s, "synth.", "coins", cfg.synth.coins);
    get(s, "synth.", "days", cfg.synth.days);
    get(s, "synth.", "hurst", cfg.synth.hurst);
    get(s, "synth.", "nu", cfg.synth.nu);
    get(s, "synth.", "qrh_mix", cfg.synth.qrh_mix);
    get(s, "synth.", "seed", cfg.synth.seed);
    get_date(s, "synth.", "start", cfg.synth.start);
    get(s, "synth.", "bars_per_day", cfg.synth.bars_per_day);
    get(s, "synth.", "base_sigma_min", cfg.synth.base_sigma_min);
    get(s, "synth.", "base_sigma_max", cfg.synth.base_sigma_max);
    get(s, "synth.", "volume_scale", cfg.synth.volume_scale);
    get(s, "synth.", "kernel_factors", cfg.synth.kernel_factors);
    get(s, "synth.", "kernel_tmin", cfg.synth.kernel_tmin);
    get(s, "synth.", "kernel_tmax", cfg.synth.kernel_tmax);
    get(s, "synth.", "feedback_b", cfg.synth.feedback_b);
  } else if (j.contains("synth")) {
    problems.push_back("config key 'synth' must be an object");
  }

  if (!problems.empty()) {
    std::string msg = "invalid config file:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw ConfigError(msg);
  }
  return cfg;
}

void run_synth(const RunConfig& cfg) {
  validate_config(cfg);
  auto paths = write_synth_klines(cfg.synth, cfg.data_dir);
  manifest_record(cfg, "synth", {}, paths);
}

void run_ingest(const RunConfig& cfg) {
  validate_config(cfg);
  if (!fs::is_directory(cfg.data_dir))
    throw DependencyError("ingest requires kline files in " + cfg.data_dir +
                          "; run the synth step or point data_dir at real data");
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(cfg.data_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".csv")
      files.push_back(entry.path().string());
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw DependencyError("ingest found no .csv kline files in " + cfg.data_dir +
                          "; run the synth step or point data_dir at real data");

  std::vector<CoinSeries> series;
  std::vector<ParseReport> parse_reports;
  for (const auto& path : files) {
    std::string coin = fs::path(path).stem().string();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    ParseReport rep = parse_klines(in, coin);
    auto days = daily_aggregate(rep.bars, cfg.min_bars);
    rep.bars.clear();  // keep reports light; only counts go in the meta file
    parse_reports.push_back(rep);
    if (!days.empty()) series.push_back(make_series(coin, std::move(days)));
  }

  FilterResult filtered = filter_universe(std::move(series), cfg.filter);
  Panel panel = build_panel(std::move(filtered.kept), cfg.train, cfg.test);
  NormalizeReport norm = normalize(panel);
  std::vector<Rejection> rejected = std::move(filtered.rejected);
  rejected.insert(rejected.end(), norm.excluded.begin(), norm.excluded.end());

  save_panel(panel, panel_csv_path(cfg), panel_meta_path(cfg), rejected, &parse_reports);
  manifest_record(cfg, "ingest", files, {panel_csv_path(cfg), panel_meta_path(cfg)});
}

void run_fit(const RunConfig& cfg) {
  validate_config(cfg);
  Panel panel = load_panel_for(cfg, "fit");

  // Fine-tuned variants consume their base artifact, so fit bases first.
  std::vector<std::string> order;
  for (const auto& id : cfg.models)
    if (!is_ft(id)) order.push_back(id);
  for (const auto& id : cfg.models)
    if (is_ft(id)) order.push_back(id);

  std::vector<std::string> outputs;
  for (const auto& id : order) {
    json art;
    if (id == "har" || id == "ar7" || id == "ar30") {
      art = fit_linear_artifact(panel, cfg, id);
    } else if (id == "rfsv" || id == "rfsv_spec") {
      art = fit_rfsv_artifact(panel, cfg, id);
    } else if (id == "qrh" || id == "qrh_spec") {
      art = fit_qrh_artifact(panel, cfg, id);
    } else if (const LstmVariant* v = variant_for(id); v != nullptr && !is_ft(id)) {
      art = fit_lstm_artifact(panel, cfg, id, *v);
    } else if (v != nullptr) {
      std::string base_id = id.substr(0, id.size() - 3);
      std::string base_path = model_path(cfg, base_id);
      require_file(base_path, "fit of " + id, "fit (" + base_id + ")");
      json base = json::parse(read_file(base_path));
      art = fit_lstm_ft_artifact(panel, cfg, id, *v, base);
    } else {
      throw ConfigError("unknown model id '" + id + "'");
    }
    write_file(model_path(cfg, id), art.dump(2) + "\n");
    outputs.push_back(model_path(cfg, id));
  }
  manifest_record(cfg, "fit", {panel_csv_path(cfg), panel_meta_path(cfg)}, outputs);
}

void save_forecasts(const std::vector<ModelForecast>& forecasts, const std::string& path) {
  std::string out = "model,coin,date,sigma_hat\n";
  for (const auto& f : forecasts)
    for (const auto& r : f.rows)
      out += f.model_id + "," + f.coin + "," + r.date.str() + "," + fmt_double(r.sigma_hat) + "\n";
  write_file(path, out);
}

std::vector<ModelForecast> load_forecasts(const std::string& path) {
  std::string text = read_file(path);
  std::vector<ModelForecast> out;
  bool header = true;
  for (auto line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (header) {
      if (line != "model,coin,date,sigma_hat")
        throw FormatError(path + ": unexpected forecast header '" + std::string(line) + "'");
      header = false;
      continue;
    }
    auto fields = split(line, ',');
    if (fields.size() != 4) throw FormatError(path + ": bad forecast row '" + std::string(line) + "'");
    std::string model(fields[0]), coin(fields[1]);
    Date date = Date::parse(fields[2]);
    double sigma_hat = parse_double(fields[3], "sigma_hat");
    if (out.empty() || out.back().coin != coin || out.back().model_id != model)
      out.push_back({model, coin, {}});
    out.back().rows.push_back({date, sigma_hat});
  }
  return out;
}

void run_forecast(const RunConfig& cfg) {
  validate_config(cfg);
  Panel panel = load_panel_for(cfg, "forecast");
  std::vector<std::string> inputs = {panel_csv_path(cfg), panel_meta_path(cfg)};
  std::vector<std::string> outputs;
  for (const auto& id : cfg.models) {
    require_file(model_path(cfg, id), "forecast of " + id, "fit");
    json art = json::parse(read_file(model_path(cfg, id)));
    auto forecasts = forecast_from_artifact(panel, id, art);
    save_forecasts(forecasts, forecast_path(cfg, id));
    inputs.push_back(model_path(cfg, id));
    outputs.push_back(forecast_path(cfg, id));
  }
  manifest_record(cfg, "forecast", inputs, outputs);
}

void run_evaluate(const RunConfig& cfg) {
  validate_config(cfg);
  Panel panel = load_panel_for(cfg, "evaluate");
  std::vector<std::string> inputs = {panel_csv_path(cfg), panel_meta_path(cfg)};
  std::vector<ModelForecast> all;
  for (const auto& id : cfg.models) {
    require_file(forecast_path(cfg, id), "evaluate", "forecast");
    auto fs_ = load_forecasts(forecast_path(cfg, id));
    all.insert(all.end(), fs_.begin(), fs_.end());
    inputs.push_back(forecast_path(cfg, id));
  }
  EvalReport report = ratio_table(all, cfg.baseline, panel);
  write_file(reports_dir(cfg) + "/ratios.csv", ratios_csv(report));
  write_file(reports_dir(cfg) + "/summary.csv", summary_csv(report));
  write_file(reports_dir(cfg) + "/exclusions.csv", exclusions_csv(report));
  manifest_record(cfg, "evaluate", inputs,
                  {reports_dir(cfg) + "/ratios.csv", reports_dir(cfg) + "/summary.csv",
                   reports_dir(cfg) + "/exclusions.csv"});
}

void run_sensitivities(const RunConfig& cfg) {
  validate_config(cfg);
  Panel panel = load_panel_for(cfg, "sensitivities");
  if (cfg.sens_model.empty()) throw ConfigError("sens_model must be set for sensitivities");
  require_file(model_path(cfg, cfg.sens_model), "sensitivities", "fit");
  json art = json::parse(read_file(model_path(cfg, cfg.sens_model)));
  if (art.at("kind") != "lstm" || art.at("input_dim").get<int>() != 2)
    throw ConfigError("sensitivities need a pooled recurrent model with a return input");
  lstm::LstmConfig c;
  c.input_dim = art.at("input_dim").get<int>();
  c.hidden_dim = art.at("hidden_dim").get<int>();
  c.window = art.at("window").get<int>();
  lstm::Ensemble e = ensemble_from_json(c, art.at("members"));

  lstm::SensitivityResult res = lstm::sensitivities(e, panel, cfg.tau_max);

  std::string profile = "coin,tau,alpha_mean,alpha_std,beta_mean,beta_std,alpha_excluded\n";
  for (const auto& p : res.profiles)
    for (std::size_t t = 0; t < p.alpha_mean.size(); ++t)
      profile += p.coin + "," + std::to_string(t + 1) + "," + fmt_double(p.alpha_mean[t]) + "," +
                 fmt_double(p.alpha_std[t]) + "," + fmt_double(p.beta_mean[t]) + "," +
                 fmt_double(p.beta_std[t]) + "," + std::to_string(p.alpha_excluded[t]) + "\n";
  std::string scatter = "coin,date,sigma_hat,var_prev,ret_prev,alpha1,beta1\n";
  for (const auto& r : res.scatter)
    scatter += r.coin + "," + r.date.str() + "," + fmt_double(r.sigma_hat) + "," +
               fmt_double(r.var_prev) + "," + fmt_double(r.ret_prev) + "," +
               fmt_double(r.alpha1) + "," + fmt_double(r.beta1) + "\n";
  write_file(sens_dir(cfg) + "/profile.csv", profile);
  write_file(sens_dir(cfg) + "/scatter.csv", scatter);
  manifest_record(cfg, "sensitivities",
                  {panel_csv_path(cfg), panel_meta_path(cfg), model_path(cfg, cfg.sens_model)},
                  {sens_dir(cfg) + "/profile.csv", sens_dir(cfg) + "/scatter.csv"});
}

void run_sweep(const RunConfig& cfg) {
  validate_config(cfg);
  Panel panel = load_panel_for(cfg, "sweep-lambda");
  require_file(forecast_path(cfg, "rfsv"), "sweep-lambda", "forecast (rfsv)");
  require_file(forecast_path(cfg, "qrh"), "sweep-lambda", "forecast (qrh)");
  auto rfsv = load_forecasts(forecast_path(cfg, "rfsv"));
  auto qrh = load_forecasts(forecast_path(cfg, "qrh"));
  std::vector<std::string> inputs = {panel_csv_path(cfg), panel_meta_path(cfg),
                                     forecast_path(cfg, "rfsv"), forecast_path(cfg, "qrh")};

  std::string ref_id = cfg.sweep_reference;
  if (ref_id.empty() && fs::exists(forecast_path(cfg, "lstm30ret"))) ref_id = "lstm30ret";
  std::vector<ModelForecast> reference;
  if (!ref_id.empty()) {
    require_file(forecast_path(cfg, ref_id), "sweep-lambda", "forecast (" + ref_id + ")");
    reference = load_forecasts(forecast_path(cfg, ref_id));
    inputs.push_back(forecast_path(cfg, ref_id));
  }

  std::vector<double> lambdas = cfg.lambdas;
  if (lambdas.empty())
    for (int i = 0; i <= 20; ++i) lambdas.push_back(0.05 * i);

  LambdaSweepResult res =
      lambda_sweep(rfsv, qrh, panel, lambdas, reference.empty() ? nullptr : &reference);
  res.reference_id = ref_id;

  std::string sweep = "lambda,pooled_mse,median_ratio_vs_lambda0,median_ratio_vs_reference,best\n";
  for (std::size_t i = 0; i < res.lambdas.size(); ++i) {
    double vs0 = summary_median(res.vs_lambda0[i]);
    double vsr = res.vs_reference.empty() ? kNaN : summary_median(res.vs_reference[i]);
    sweep += fmt_double(res.lambdas[i]) + "," + fmt_double(res.pooled_mse[i]) + "," +
             fmt_double(vs0) + "," + fmt_double(vsr) + "," +
             (res.lambdas[i] == res.lambda_star ? "1" : "0") + "\n";
  }
  std::string detail = "lambda,versus,model,coin,days,mse,baseline_mse,ratio\n";
  auto add_detail = [&](const std::string& versus, const std::vector<EvalReport>& reps) {
    for (std::size_t i = 0; i < reps.size(); ++i)
      for (const auto& r : reps[i].rows)
        detail += fmt_double(res.lambdas[i]) + "," + versus + "," + r.model + "," + r.coin + "," +
                  std::to_string(r.days) + "," + fmt_double(r.mse) + "," +
                  fmt_double(r.baseline_mse) + "," + fmt_double(r.ratio) + "\n";
  };
  add_detail("lambda0", res.vs_lambda0);
  if (!res.vs_reference.empty()) add_detail(ref_id, res.vs_reference);

  write_file(reports_dir(cfg) + "/lambda_sweep.csv", sweep);
  write_file(reports_dir(cfg) + "/lambda_ratios.csv", detail);
  manifest_record(cfg, "sweep", inputs,
                  {reports_dir(cfg) + "/lambda_sweep.csv", reports_dir(cfg) + "/lambda_ratios.csv"});
}

void run_experiment(const RunConfig& cfg) {
  validate_config(cfg);
  bool have_data = false;
  if (fs::is_directory(cfg.data_dir))
    for (const auto& entry : fs::directory_iterator(cfg.data_dir))
      if (entry.is_regular_file() && entry.path().extension() == ".csv") have_data = true;
  if (!have_data) run_synth(cfg);
  run_ingest(cfg);
  run_fit(cfg);
  run_forecast(cfg);
  run_evaluate(cfg);
  auto listed = [&](const std::string& id) {
    return std::find(cfg.models.begin(), cfg.models.end(), id) != cfg.models.end();
  };
  if (!cfg.sens_model.empty() && listed(cfg.sens_model)) run_sensitivities(cfg);
  if (listed("rfsv") && listed("qrh")) run_sweep(cfg);
}

}  // namespace volcast
