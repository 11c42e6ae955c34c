#include "volcast/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "volcast/qrh.hpp"

namespace volcast {

double mse(std::span<const double> forecast, std::span<const double> realized) {
  if (forecast.size() != realized.size()) throw Error("mse: length mismatch");
  if (forecast.empty()) throw Error("mse: empty series");
  double acc = 0;
  for (std::size_t i = 0; i < forecast.size(); ++i) {
    double e = forecast[i] - realized[i];
    acc += e * e;
  }
  return acc / static_cast<double>(forecast.size());
}

namespace {

// realized sigma for complete test days, keyed by date
std::map<Date, double> realized_map(const CoinSeries& s, const DateRange& test) {
  std::map<Date, double> m;
  for (const auto& d : s.days)
    if (d.complete && test.contains(d.date)) m[d.date] = d.sigma;
  return m;
}

double mse_over(const std::vector<const ForecastRow*>& rows, const std::map<Date, double>& real) {
  double acc = 0;
  for (const ForecastRow* r : rows) {
    double e = r->sigma_hat - real.at(r->date);
    acc += e * e;
  }
  return acc / static_cast<double>(rows.size());
}

}  // namespace

double mse_on_days(const ModelForecast& forecast, const CoinSeries& realized,
                   const DateRange& test) {
  auto real = realized_map(realized, test);
  std::vector<const ForecastRow*> rows;
  for (const auto& r : forecast.rows)
    if (real.count(r.date)) rows.push_back(&r);
  if (rows.empty()) throw Error("mse: no shared days between forecast and realized series");
  return mse_over(rows, real);
}

BoxStats box_stats(std::vector<double> values) {
  BoxStats b;
  b.n = values.size();
  if (values.empty()) return b;
  std::sort(values.begin(), values.end());
  b.median = quantile(values, 0.5);
  b.q1 = quantile(values, 0.25);
  b.q3 = quantile(values, 0.75);
  double iqr = b.q3 - b.q1;
  double lo_fence = b.q1 - 1.5 * iqr, hi_fence = b.q3 + 1.5 * iqr;
  b.lo = b.hi = b.median;
  bool first = true;
  for (double v : values) {
    if (v < lo_fence || v > hi_fence) {
      ++b.outliers;
      continue;
    }
    if (first) {
      b.lo = b.hi = v;
      first = false;
    } else {
      b.lo = std::min(b.lo, v);
      b.hi = std::max(b.hi, v);
    }
  }
  return b;
}

EvalReport ratio_table(const std::vector<ModelForecast>& forecasts,
                       const std::string& baseline_id, const Panel& panel) {
  // index forecasts by (model, coin)
  std::map<std::pair<std::string, std::string>, const ModelForecast*> by_key;
  std::set<std::string> models;
  for (const auto& f : forecasts) {
    by_key[{f.model_id, f.coin}] = &f;
    models.insert(f.model_id);
  }
  if (!models.count(baseline_id))
    throw Error("ratio_table: no forecasts for baseline '" + baseline_id + "'");

  EvalReport rep;
  std::map<std::string, std::vector<double>> ratios_by_model;
  for (const std::string& model : models) {
    for (const CoinSeries& s : panel.coins) {
      auto mit = by_key.find({model, s.coin});
      auto bit = by_key.find({baseline_id, s.coin});
      if (mit == by_key.end()) continue;  // model never forecast this coin
      if (bit == by_key.end()) {
        rep.excluded.push_back({model + ":" + s.coin, "no-baseline-forecast"});
        continue;
      }
      auto real = realized_map(s, panel.test_range);
      // pairwise day intersection keeps the ratio fair when windows differ
      std::set<Date> model_days;
      for (const auto& r : mit->second->rows)
        if (real.count(r.date)) model_days.insert(r.date);
      std::vector<const ForecastRow*> mrows, brows;
      for (const auto& r : bit->second->rows)
        if (model_days.count(r.date)) brows.push_back(&r);
      std::set<Date> shared;
      for (const ForecastRow* r : brows) shared.insert(r->date);
      for (const auto& r : mit->second->rows)
        if (shared.count(r.date)) mrows.push_back(&r);
      if (mrows.empty()) {
        rep.excluded.push_back({model + ":" + s.coin, "no-shared-days"});
        continue;
      }
      double m = mse_over(mrows, real);
      double b = mse_over(brows, real);
      if (b == 0) {
        rep.excluded.push_back({model + ":" + s.coin, "zero-baseline-mse"});
        continue;
      }
      RatioRow row{model, s.coin, mrows.size(), m, b, m / b};
      ratios_by_model[model].push_back(row.ratio);
      rep.rows.push_back(std::move(row));
    }
  }
  for (auto& [model, ratios] : ratios_by_model)
    rep.summary.emplace_back(model, box_stats(std::move(ratios)));
  return rep;
}

LambdaSweepResult lambda_sweep(const std::vector<ModelForecast>& rfsv,
                               const std::vector<ModelForecast>& qrh, const Panel& panel,
                               std::span<const double> lambdas,
                               const std::vector<ModelForecast>* reference) {
  if (lambdas.empty()) throw Error("lambda_sweep: empty lambda grid");

  std::map<std::string, const ModelForecast*> rf, qf;
  for (const auto& f : rfsv) rf[f.coin] = &f;
  for (const auto& f : qrh) qf[f.coin] = &f;

  // per coin, the blendable days: shared by both streams and realized
  struct CoinDays {
    std::string coin;
    std::vector<Date> dates;
    std::vector<double> rfsv_hat, qrh_hat, realized;
  };
  std::vector<CoinDays> coins;
  for (const CoinSeries& s : panel.coins) {
    auto ri = rf.find(s.coin);
    auto qi = qf.find(s.coin);
    if (ri == rf.end() || qi == qf.end()) continue;
    auto real = realized_map(s, panel.test_range);
    std::map<Date, double> q_by_date;
    for (const auto& r : qi->second->rows) q_by_date[r.date] = r.sigma_hat;
    CoinDays cd;
    cd.coin = s.coin;
    for (const auto& r : ri->second->rows) {
      auto qd = q_by_date.find(r.date);
      if (qd == q_by_date.end() || !real.count(r.date)) continue;
      cd.dates.push_back(r.date);
      cd.rfsv_hat.push_back(r.sigma_hat);
      cd.qrh_hat.push_back(qd->second);
      cd.realized.push_back(real.at(r.date));
    }
    if (!cd.dates.empty()) coins.push_back(std::move(cd));
  }
  if (coins.empty()) throw Error("lambda_sweep: no coin has shared rfsv/qrh forecast days");

  auto blended = [&](double lambda) {
    std::vector<ModelForecast> out;
    for (const auto& cd : coins) {
      ModelForecast f;
      f.model_id = "blend";
      f.coin = cd.coin;
      for (std::size_t i = 0; i < cd.dates.size(); ++i)
        f.rows.push_back({cd.dates[i], blend(cd.rfsv_hat[i], cd.qrh_hat[i], lambda)});
      out.push_back(std::move(f));
    }
    return out;
  };

  LambdaSweepResult res;
  res.lambdas.assign(lambdas.begin(), lambdas.end());
  std::vector<ModelForecast> base0 = blended(0.0);
  for (auto& f : base0) f.model_id = "lambda0";

  for (double lambda : lambdas) {
    std::vector<ModelForecast> cur = blended(lambda);

    double acc = 0;
    std::size_t n = 0;
    for (std::size_t ci = 0; ci < coins.size(); ++ci) {
      for (std::size_t i = 0; i < coins[ci].dates.size(); ++i) {
        double e = cur[ci].rows[i].sigma_hat - coins[ci].realized[i];
        acc += e * e;
        ++n;
      }
    }
    res.pooled_mse.push_back(acc / static_cast<double>(n));

    std::vector<ModelForecast> both = cur;
    both.insert(both.end(), base0.begin(), base0.end());
    res.vs_lambda0.push_back(ratio_table(both, "lambda0", panel));

    if (reference) {
      std::vector<ModelForecast> vs = cur;
      vs.insert(vs.end(), reference->begin(), reference->end());
      res.reference_id = reference->empty() ? "" : reference->front().model_id;
      res.vs_reference.push_back(ratio_table(vs, res.reference_id, panel));
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < res.pooled_mse.size(); ++i)
    if (res.pooled_mse[i] < res.pooled_mse[best]) best = i;
  res.lambda_star = res.lambdas[best];
  return res;
}

}  // namespace volcast
