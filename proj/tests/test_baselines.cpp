#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "volcast/baselines.hpp"

#include <Eigen/Dense>
#include <cmath>

using namespace volcast;

namespace {

DayRecord complete_day(Date date, double sigma, double ret = 0.001) {
  DayRecord d;
  d.date = date;
  d.sigma = sigma;
  d.ret = ret;
  d.n_intervals = 288;
  d.volume = 1e6;
  d.complete = true;
  d.close = 100;
  return d;
}

// Series made of many short segments, each holding p free history values and
// one target that satisfies the planted linear relation exactly. Segment
// breaks come from missing calendar days, so every regression row is
// consistent with the plant and the history values keep the design well
// conditioned. Default norm stats (vol_scale 1) make norm_sigma == sigma.
CoinSeries planted_ar_series(int p, double alpha, const std::vector<double>& beta,
                             int n_segments, std::uint64_t seed) {
  Rng rng(seed);
  Date cur = Date::parse("2020-01-01");
  std::vector<DayRecord> recs;
  for (int s = 0; s < n_segments; ++s) {
    std::vector<double> h(p);
    for (auto& v : h) v = rng.uniform(0.5, 1.5);
    for (int k = 0; k < p; ++k) {
      recs.push_back(complete_day(cur, h[k]));
      cur = cur + 1;
    }
    double y = alpha;
    for (int j = 1; j <= p; ++j) y += beta[j - 1] * h[p - j];  // beta[0] is lag 1
    recs.push_back(complete_day(cur, y));
    cur = cur + 2;  // skip a day: segment boundary
  }
  return make_series("PLANT", std::move(recs));
}

// Same idea for HAR: 30 free history values, target from (lag1, sum7, sum30).
CoinSeries planted_har_series(double a0, double b1, double b7, double b30,
                              int n_segments, std::uint64_t seed) {
  Rng rng(seed);
  Date cur = Date::parse("2020-01-01");
  std::vector<DayRecord> recs;
  for (int s = 0; s < n_segments; ++s) {
    std::vector<double> h(30);
    for (auto& v : h) v = rng.uniform(0.5, 1.5);
    for (int k = 0; k < 30; ++k) {
      recs.push_back(complete_day(cur, h[k]));
      cur = cur + 1;
    }
    double sum7 = 0, sum30 = 0;
    for (int j = 1; j <= 30; ++j) {
      double v = h[30 - j];
      if (j <= 7) sum7 += v;
      sum30 += v;
    }
    double y = a0 + b1 * h[29] + b7 * sum7 + b30 * sum30;
    recs.push_back(complete_day(cur, y));
    cur = cur + 2;
  }
  return make_series("PLANT", std::move(recs));
}

const DateRange kWideRange{Date::parse("2019-01-01"), Date::parse("2030-01-01")};

}  // namespace

TEST_CASE("fit_ar recovers a planted noiseless AR(1) to 1e-10") {
  auto s = planted_ar_series(1, 0.2, {0.5}, 40, 11);
  auto m = fit_ar(s, kWideRange, 1);
  CHECK(m.spec == LinearSpec::ar);
  CHECK(m.p == 1);
  REQUIRE(m.coeffs.size() == 1);
  CHECK(std::fabs(m.intercept - 0.2) < 1e-10);
  CHECK(std::fabs(m.coeffs[0] - 0.5) < 1e-10);
}

TEST_CASE("fit_ar recovers planted AR(7) and AR(30) to 1e-10") {
  std::vector<double> b7{0.3, -0.1, 0.05, 0.2, -0.02, 0.01, 0.08};
  auto s7 = planted_ar_series(7, 0.1, b7, 60, 29);
  auto m7 = fit_ar(s7, kWideRange, 7);
  CHECK(std::fabs(m7.intercept - 0.1) < 1e-10);
  for (int j = 0; j < 7; ++j) CHECK(std::fabs(m7.coeffs[j] - b7[j]) < 1e-10);

  std::vector<double> b30(30);
  Rng rng(5);
  for (auto& v : b30) v = rng.uniform(-0.1, 0.1);
  auto s30 = planted_ar_series(30, 0.05, b30, 120, 31);
  auto m30 = fit_ar(s30, kWideRange, 30);
  CHECK(std::fabs(m30.intercept - 0.05) < 1e-10);
  for (int j = 0; j < 30; ++j) CHECK(std::fabs(m30.coeffs[j] - b30[j]) < 1e-10);
}

TEST_CASE("fit_har recovers a planted noiseless model to 1e-10") {
  auto s = planted_har_series(0.04, 0.35, 0.03, 0.008, 80, 17);
  auto m = fit_har(s, kWideRange);
  CHECK(m.spec == LinearSpec::har);
  CHECK(m.p == 30);
  REQUIRE(m.coeffs.size() == 3);
  CHECK(std::fabs(m.intercept - 0.04) < 1e-10);
  CHECK(std::fabs(m.coeffs[0] - 0.35) < 1e-10);
  CHECK(std::fabs(m.coeffs[1] - 0.03) < 1e-10);
  CHECK(std::fabs(m.coeffs[2] - 0.008) < 1e-10);
}

TEST_CASE("fit_ar on a noisy AR(1) lands within three standard errors") {
  // sigma_t = 0.5 + 0.3 sigma_{t-1} + eps, eps ~ N(0, 0.05^2), one long segment
  const double alpha = 0.5, beta = 0.3, noise = 0.05;
  Rng rng(101);
  Date cur = Date::parse("2020-01-01");
  std::vector<DayRecord> recs;
  double prev = alpha / (1 - beta);
  recs.push_back(complete_day(cur, prev));
  for (int i = 1; i < 2000; ++i) {
    cur = cur + 1;
    double v = alpha + beta * prev + noise * rng.normal();
    recs.push_back(complete_day(cur, v));
    prev = v;
  }
  auto s = make_series("NOISY", std::move(recs));
  auto m = fit_ar(s, kWideRange, 1);

  // standard errors computed here from the same regression rows
  std::vector<double> xs, ys;
  for (std::size_t i = 1; i < s.days.size(); ++i) {
    xs.push_back(s.days[i - 1].sigma);
    ys.push_back(s.days[i].sigma);
  }
  const std::size_t n = xs.size();
  double xbar = mean(xs);
  double sxx = 0, rss = 0;
  for (std::size_t i = 0; i < n; ++i) sxx += (xs[i] - xbar) * (xs[i] - xbar);
  for (std::size_t i = 0; i < n; ++i) {
    double resid = ys[i] - m.intercept - m.coeffs[0] * xs[i];
    rss += resid * resid;
  }
  double s2 = rss / static_cast<double>(n - 2);
  double se_beta = std::sqrt(s2 / sxx);
  double se_alpha = std::sqrt(s2 * (1.0 / static_cast<double>(n) + xbar * xbar / sxx));
  CHECK(std::fabs(m.coeffs[0] - beta) < 3 * se_beta);
  CHECK(std::fabs(m.intercept - alpha) < 3 * se_alpha);
  // the noise scale should be recovered too
  CHECK(std::sqrt(s2) == doctest::Approx(noise).epsilon(0.1));
}

TEST_CASE("fit_har on noisy planted data lands within three standard errors") {
  const double a0 = 0.04, b1 = 0.3, b7 = 0.04, b30 = 0.01, noise = 0.02;
  Rng rng(7);
  Date cur = Date::parse("2020-01-01");
  std::vector<DayRecord> recs;
  const int n_segments = 120;
  for (int seg = 0; seg < n_segments; ++seg) {
    std::vector<double> h(30);
    for (auto& v : h) v = rng.uniform(0.5, 1.5);
    for (int k = 0; k < 30; ++k) {
      recs.push_back(complete_day(cur, h[k]));
      cur = cur + 1;
    }
    double sum7 = 0, sum30 = 0;
    for (int j = 1; j <= 30; ++j) {
      double v = h[30 - j];
      if (j <= 7) sum7 += v;
      sum30 += v;
    }
    recs.push_back(complete_day(cur, a0 + b1 * h[29] + b7 * sum7 + b30 * sum30 +
                                        noise * rng.normal()));
    cur = cur + 2;
  }
  auto s = make_series("NOISY", std::move(recs));
  auto m = fit_har(s, kWideRange);

  // rebuild the design to get (X'X)^-1 based standard errors
  Eigen::MatrixXd x(n_segments, 4);
  Eigen::VectorXd y(n_segments);
  int r = 0;
  for (const Segment& seg : s.segments) {
    std::size_t t = seg.first + 30;
    double sum7 = 0, sum30 = 0;
    for (int j = 1; j <= 30; ++j) {
      double v = s.days[t - j].sigma;
      if (j <= 7) sum7 += v;
      sum30 += v;
    }
    x(r, 0) = 1;
    x(r, 1) = s.days[t - 1].sigma;
    x(r, 2) = sum7;
    x(r, 3) = sum30;
    y(r) = s.days[t].sigma;
    ++r;
  }
  REQUIRE(r == n_segments);
  Eigen::Vector4d est(m.intercept, m.coeffs[0], m.coeffs[1], m.coeffs[2]);
  Eigen::VectorXd resid = y - x * est;
  double s2 = resid.squaredNorm() / static_cast<double>(n_segments - 4);
  Eigen::Matrix4d cov = s2 * (x.transpose() * x).inverse();
  Eigen::Vector4d truth(a0, b1, b7, b30);
  for (int j = 0; j < 4; ++j)
    CHECK(std::fabs(est(j) - truth(j)) < 3 * std::sqrt(cov(j, j)));
}

TEST_CASE("fit_ar rejects degenerate and undersized inputs") {
  // constant series: lagged regressor collinear with the intercept
  Date cur = Date::parse("2020-01-01");
  std::vector<DayRecord> recs;
  for (int i = 0; i < 200; ++i) recs.push_back(complete_day(cur + i, 0.02));
  auto flat = make_series("FLAT", std::move(recs));
  CHECK_THROWS_AS(fit_ar(flat, kWideRange, 1), FitError);

  // 10 usable rows for AR(1) is one short of p + 10
  auto tiny = planted_ar_series(1, 0.2, {0.5}, 10, 3);
  CHECK_THROWS_AS(fit_ar(tiny, kWideRange, 1), FitError);
  auto enough = planted_ar_series(1, 0.2, {0.5}, 11, 3);
  CHECK_NOTHROW(fit_ar(enough, kWideRange, 1));

  // HAR needs 40 usable rows; 30-row example from the contract must throw
  auto h30 = planted_har_series(0.04, 0.3, 0.03, 0.01, 30, 9);
  CHECK_THROWS_AS(fit_har(h30, kWideRange), FitError);
  auto h40 = planted_har_series(0.04, 0.3, 0.03, 0.01, 40, 9);
  CHECK_NOTHROW(fit_har(h40, kWideRange));

  CHECK_THROWS_AS(fit_ar(flat, kWideRange, 0), FitError);
}

TEST_CASE("fit respects the train range boundary") {
  // same plant twice: restricting train to the first half must still work,
  // and rows whose lag window crosses train.first are not used
  auto s = planted_ar_series(1, 0.2, {0.5}, 40, 13);
  Date mid = s.days[s.days.size() / 2].date;
  auto m = fit_ar(s, DateRange{Date::parse("2019-01-01"), mid}, 1);
  CHECK(std::fabs(m.intercept - 0.2) < 1e-10);
  CHECK(std::fabs(m.coeffs[0] - 0.5) < 1e-10);

  // train range starting mid-series: still recovers (fewer segments)
  auto m2 = fit_ar(s, DateRange{mid, Date::parse("2030-01-01")}, 1);
  CHECK(std::fabs(m2.coeffs[0] - 0.5) < 1e-10);
}

TEST_CASE("predict_linear evaluates AR and HAR forms") {
  LinearModel flat;
  flat.spec = LinearSpec::ar;
  flat.p = 1;
  flat.intercept = 0.7;
  flat.coeffs = {0.0};
  std::vector<double> h{1.3};
  CHECK(predict_linear(flat, h) == 0.7);

  LinearModel ident;
  ident.spec = LinearSpec::ar;
  ident.p = 1;
  ident.intercept = 0.0;
  ident.coeffs = {1.0};
  CHECK(predict_linear(ident, h) == 1.3);

  // AR(2): order check, coeffs[0] applies to the most recent value
  LinearModel ar2;
  ar2.spec = LinearSpec::ar;
  ar2.p = 2;
  ar2.intercept = 0.0;
  ar2.coeffs = {1.0, 0.0};
  std::vector<double> h2{5.0, 1.3};  // chronological: 5 then 1.3
  CHECK(predict_linear(ar2, h2) == 1.3);
  ar2.coeffs = {0.0, 1.0};
  CHECK(predict_linear(ar2, h2) == 5.0);

  // HAR with only the weekly-sum coefficient: plain sum, not a mean
  LinearModel har;
  har.spec = LinearSpec::har;
  har.p = 30;
  har.intercept = 0.0;
  har.coeffs = {0.0, 1.0, 0.0};
  std::vector<double> h30(30, 0.0);
  for (int i = 0; i < 7; ++i) h30[29 - i] = 0.2;  // last 7 values
  CHECK(predict_linear(har, h30) == doctest::Approx(1.4).epsilon(1e-15));

  // monthly sum picks up all 30
  har.coeffs = {0.0, 0.0, 1.0};
  std::vector<double> ones(30, 1.0);
  CHECK(predict_linear(har, ones) == doctest::Approx(30.0).epsilon(1e-15));

  // too little history
  CHECK_THROWS_AS(predict_linear(har, h), Error);
}
