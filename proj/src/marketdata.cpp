#include "volcast/marketdata.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <filesystem>
#include <sstream>

#include "json.hpp"

namespace volcast {

using nlohmann::json;

// --- parsing ---------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

struct Columns {
  int open_time = -1, open = -1, high = -1, low = -1, close = -1;
  int quote_volume = -1, trades = -1;
  int max_needed = 0;
};

Columns parse_header(std::string_view line) {
  Columns c;
  auto fields = split(line, ',');
  for (std::size_t i = 0; i < fields.size(); ++i) {
    std::string name = lower(trim(fields[i]));
    int idx = static_cast<int>(i);
    if (name == "open_time") c.open_time = idx;
    else if (name == "open") c.open = idx;
    else if (name == "high") c.high = idx;
    else if (name == "low") c.low = idx;
    else if (name == "close") c.close = idx;
    else if (name == "quote_volume" || name == "quote_asset_volume") c.quote_volume = idx;
    else if (name == "trades" || name == "count" || name == "number_of_trades") c.trades = idx;
  }
  if (c.open_time < 0 || c.open < 0 || c.high < 0 || c.low < 0 || c.close < 0 ||
      c.quote_volume < 0 || c.trades < 0)
    throw FormatError("kline header missing required columns "
                      "(open_time, open, high, low, close, quote_volume, trades)");
  c.max_needed = std::max({c.open_time, c.open, c.high, c.low, c.close,
                           c.quote_volume, c.trades});
  return c;
}

Bar parse_row(const std::vector<std::string_view>& f, const Columns& c) {
  Bar b;
  b.ts_ms = parse_int(trim(f[c.open_time]), "open_time");
  b.open = parse_double(trim(f[c.open]), "open");
  b.high = parse_double(trim(f[c.high]), "high");
  b.low = parse_double(trim(f[c.low]), "low");
  b.close = parse_double(trim(f[c.close]), "close");
  b.volume = parse_double(trim(f[c.quote_volume]), "quote_volume");
  b.trades = parse_int(trim(f[c.trades]), "trades");
  if (!(b.open > 0) || !(b.high > 0) || !(b.low > 0) || !(b.close > 0))
    throw FormatError("non-positive price");
  if (b.low > std::min(b.open, b.close) || b.high < std::max(b.open, b.close))
    throw FormatError("high/low outside open/close range");
  if (b.ts_ms % 300000 != 0) throw FormatError("timestamp not 5-minute aligned");
  if (b.volume < 0) throw FormatError("negative volume");
  if (b.trades < 0) throw FormatError("negative trade count");
  return b;
}

bool same_bar(const Bar& a, const Bar& b) {
  return a.ts_ms == b.ts_ms && a.open == b.open && a.high == b.high && a.low == b.low &&
         a.close == b.close && a.volume == b.volume && a.trades == b.trades;
}

}  // namespace

ParseReport parse_klines(std::istream& in, std::string_view coin) {
  ParseReport rep;
  rep.coin = std::string(coin);

  std::string line;
  if (!std::getline(in, line)) throw FormatError(rep.coin + ": empty kline file, header required");
  Columns cols = parse_header(line);

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = trim(line);
    if (sv.empty()) continue;
    ++rep.rows;
    auto fields = split(sv, ',');
    try {
      if (static_cast<int>(fields.size()) <= cols.max_needed)
        throw FormatError("too few fields");
      rep.bars.push_back(parse_row(fields, cols));
    } catch (const FormatError& e) {
      ++rep.malformed;
      if (rep.samples.size() < 5)
        rep.samples.push_back("line " + std::to_string(lineno) + ": " + e.what());
    }
  }

  std::stable_sort(rep.bars.begin(), rep.bars.end(),
                   [](const Bar& a, const Bar& b) { return a.ts_ms < b.ts_ms; });
  // collapse byte-identical repeats, reject conflicting rows at one timestamp
  std::vector<Bar> dedup;
  dedup.reserve(rep.bars.size());
  for (const Bar& b : rep.bars) {
    if (!dedup.empty() && dedup.back().ts_ms == b.ts_ms) {
      if (same_bar(dedup.back(), b)) continue;
      throw DuplicateTimestampError(rep.coin + ": conflicting rows at timestamp " +
                                    std::to_string(b.ts_ms));
    }
    dedup.push_back(b);
  }
  rep.bars = std::move(dedup);
  return rep;
}

// --- daily aggregation -------------------------------------------------

std::vector<DayRecord> daily_aggregate(std::span<const Bar> bars, int min_bars) {
  std::vector<DayRecord> out;
  std::size_t i = 0;
  while (i < bars.size()) {
    Date day = Date::from_epoch_ms(bars[i].ts_ms);
    double sumsq = 0, volume = 0;
    double prev_price = bars[i].open;  // first return is measured from the open
    int n = 0;
    double close = kNaN;
    std::int64_t prev_ts = bars[i].ts_ms - 1;
    for (; i < bars.size() && Date::from_epoch_ms(bars[i].ts_ms) == day; ++i) {
      const Bar& b = bars[i];
      if (b.ts_ms <= prev_ts) throw Error("daily_aggregate: bars not sorted");
      prev_ts = b.ts_ms;
      double r = (b.close - prev_price) / prev_price;
      sumsq += r * r;
      prev_price = b.close;
      volume += b.volume;
      close = b.close;
      ++n;
    }
    DayRecord d;
    d.date = day;
    d.sigma = std::sqrt(sumsq);
    d.n_intervals = n;
    d.volume = volume;
    d.complete = n >= min_bars;
    d.close = close;
    if (!out.empty() && out.back().date + 1 == day && out.back().n_intervals > 0)
      d.ret = (close - out.back().close) / out.back().close;
    out.push_back(d);
  }
  return out;
}

// --- series & segments -------------------------------------------------

std::optional<std::size_t> CoinSeries::index_of(Date d) const {
  if (days.empty() || d < days.front().date || d > days.back().date) return std::nullopt;
  return static_cast<std::size_t>(d - days.front().date);
}

CoinSeries make_series(std::string coin, std::vector<DayRecord> days) {
  CoinSeries s;
  s.coin = std::move(coin);
  if (days.empty()) return s;

  // fill calendar gaps with incomplete placeholders so dates stay contiguous
  s.days.reserve(days.size());
  for (std::size_t i = 0; i < days.size(); ++i) {
    if (i > 0) {
      if (days[i].date <= days[i - 1].date)
        throw Error(s.coin + ": day records not strictly increasing");
      for (Date d = days[i - 1].date + 1; d < days[i].date; d = d + 1) {
        DayRecord gap;
        gap.date = d;
        s.days.push_back(gap);
      }
    }
    s.days.push_back(days[i]);
  }

  // maximal runs of consecutive complete days
  std::size_t run_start = 0;
  bool in_run = false;
  for (std::size_t i = 0; i <= s.days.size(); ++i) {
    bool complete = i < s.days.size() && s.days[i].complete;
    if (complete && !in_run) {
      run_start = i;
      in_run = true;
    } else if (!complete && in_run) {
      s.segments.push_back({run_start, i - run_start});
      in_run = false;
    }
  }
  return s;
}

// --- filtering -----------------------------------------------------------

FilterConfig default_filter_config() {
  FilterConfig c;
  c.stablecoins = {"USDT", "USDC", "BUSD", "TUSD", "USDP", "PAX",
                   "DAI",  "UST",  "USTC", "FDUSD", "SUSD", "GUSD", "EURS"};
  c.leveraged_patterns = {"*UP", "*DOWN", "*BULL", "*BEAR"};
  return c;
}

FilterResult filter_universe(std::vector<CoinSeries> series, const FilterConfig& config) {
  FilterResult out;
  for (auto& s : series) {
    std::string reason;
    if (std::find(config.stablecoins.begin(), config.stablecoins.end(), s.coin) !=
        config.stablecoins.end()) {
      reason = "stablecoin";
    }
    if (reason.empty()) {
      for (const auto& pat : config.leveraged_patterns) {
        if (glob_match(pat, s.coin)) {
          reason = "leveraged";
          break;
        }
      }
    }
    if (reason.empty()) {
      std::vector<double> volumes;
      int complete_days = 0;
      for (const auto& d : s.days) {
        if (d.complete) {
          ++complete_days;
          volumes.push_back(d.volume);
        }
      }
      if (complete_days < config.min_days)
        reason = "short-history";
      else if (median(std::move(volumes)) < config.min_median_volume)
        reason = "low-liquidity";
    }
    if (reason.empty())
      out.kept.push_back(std::move(s));
    else
      out.rejected.push_back({s.coin, reason});
  }
  return out;
}

// --- panel ---------------------------------------------------------------

const CoinSeries* Panel::find(std::string_view coin) const {
  for (const auto& c : coins)
    if (c.coin == coin) return &c;
  return nullptr;
}

Panel build_panel(std::vector<CoinSeries> coins, DateRange train, DateRange test) {
  if (train.last < train.first) throw ConfigError("train range is empty");
  if (test.last < test.first) throw ConfigError("test range is empty");
  if (!(train.last < test.first))
    throw ConfigError("train range must end before test range begins");
  std::sort(coins.begin(), coins.end(),
            [](const CoinSeries& a, const CoinSeries& b) { return a.coin < b.coin; });
  Panel p;
  p.coins = std::move(coins);
  p.train_range = train;
  p.test_range = test;
  return p;
}

std::vector<std::size_t> modeling_rows(const CoinSeries& s, const DateRange& range) {
  std::vector<std::size_t> rows;
  for (const Segment& seg : s.segments) {
    for (std::size_t i = seg.first + 1; i < seg.first + seg.count; ++i) {
      if (range.contains(s.days[i].date) && !std::isnan(s.days[i].ret)) rows.push_back(i);
    }
  }
  return rows;
}

NormalizeReport normalize(Panel& panel) {
  NormalizeReport rep;
  std::vector<CoinSeries> kept;
  for (auto& s : panel.coins) {
    auto rows = modeling_rows(s, panel.train_range);
    if (rows.size() < 2) {
      rep.excluded.push_back({s.coin, "insufficient-train-rows"});
      continue;
    }
    std::vector<double> sig, ret;
    sig.reserve(rows.size());
    ret.reserve(rows.size());
    for (auto i : rows) {
      sig.push_back(s.days[i].sigma);
      ret.push_back(s.days[i].ret);
    }
    NormStats n;
    n.vol_scale = mean(sig);
    n.ret_loc = mean(ret);
    n.ret_scale = stdev_pop(ret);
    if (!(n.vol_scale > 0)) {
      rep.excluded.push_back({s.coin, "degenerate-volatility"});
      continue;
    }
    if (!(n.ret_scale > 0)) {
      rep.excluded.push_back({s.coin, "degenerate-returns"});
      continue;
    }
    s.norm = n;
    kept.push_back(std::move(s));
  }
  panel.coins = std::move(kept);
  return rep;
}

// --- persistence -----------------------------------------------------------

void save_panel(const Panel& panel, const std::string& csv_path, const std::string& meta_path,
                const std::vector<Rejection>& filter_report,
                const std::vector<ParseReport>* parse_reports) {
  for (const auto& p : {csv_path, meta_path}) {
    auto dir = std::filesystem::path(p).parent_path();
    if (!dir.empty()) std::filesystem::create_directories(dir);
  }
  std::ofstream csv(csv_path);
  if (!csv) throw Error("cannot write " + csv_path);
  csv << "coin,date,sigma,ret,complete\n";
  for (const auto& s : panel.coins) {
    for (const auto& d : s.days) {
      csv << s.coin << ',' << d.date.str() << ',';
      if (!std::isnan(d.sigma)) csv << fmt_double(d.sigma);
      csv << ',';
      if (!std::isnan(d.ret)) csv << fmt_double(d.ret);
      csv << ',' << (d.complete ? '1' : '0') << '\n';
    }
  }
  csv.close();
  if (!csv) throw Error("failed writing " + csv_path);

  json meta;
  meta["format"] = 1;
  meta["train_range"] = {panel.train_range.first.str(), panel.train_range.last.str()};
  meta["test_range"] = {panel.test_range.first.str(), panel.test_range.last.str()};
  json coins = json::object();
  for (const auto& s : panel.coins) {
    coins[s.coin] = {{"vol_scale", s.norm.vol_scale},
                     {"ret_loc", s.norm.ret_loc},
                     {"ret_scale", s.norm.ret_scale}};
  }
  meta["coins"] = coins;
  json rej = json::array();
  for (const auto& r : filter_report) rej.push_back({{"coin", r.coin}, {"reason", r.reason}});
  meta["rejected"] = rej;
  if (parse_reports) {
    json parse = json::object();
    for (const auto& pr : *parse_reports) {
      json p = {{"rows", pr.rows}, {"malformed", pr.malformed}};
      if (!pr.samples.empty()) p["samples"] = pr.samples;
      parse[pr.coin] = p;
    }
    meta["parse"] = parse;
  }
  std::ofstream mf(meta_path);
  if (!mf) throw Error("cannot write " + meta_path);
  mf << meta.dump(2) << '\n';
}

Panel load_panel(const std::string& csv_path, const std::string& meta_path) {
  std::ifstream mf(meta_path);
  if (!mf) throw Error("cannot read " + meta_path + " (run ingest first)");
  json meta = json::parse(mf);

  std::ifstream csv(csv_path);
  if (!csv) throw Error("cannot read " + csv_path + " (run ingest first)");
  std::string line;
  if (!std::getline(csv, line) || trim(line) != "coin,date,sigma,ret,complete")
    throw FormatError(csv_path + ": bad panel header");

  std::map<std::string, std::vector<DayRecord>> by_coin;
  std::size_t lineno = 1;
  while (std::getline(csv, line)) {
    ++lineno;
    std::string_view sv = trim(line);
    if (sv.empty()) continue;
    auto f = split(sv, ',');
    if (f.size() != 5)
      throw FormatError(csv_path + " line " + std::to_string(lineno) + ": want 5 fields");
    DayRecord d;
    d.date = Date::parse(f[1]);
    d.sigma = f[2].empty() ? kNaN : parse_double(f[2], "sigma");
    d.ret = f[3].empty() ? kNaN : parse_double(f[3], "ret");
    if (f[4] == "1")
      d.complete = true;
    else if (f[4] != "0")
      throw FormatError(csv_path + " line " + std::to_string(lineno) + ": bad complete flag");
    // bar counts are pre-panel detail; the flag is what downstream code reads
    d.n_intervals = d.complete ? 288 : 0;
    by_coin[std::string(f[0])].push_back(d);
  }

  std::vector<CoinSeries> coins;
  for (auto& [coin, days] : by_coin) {
    CoinSeries s = make_series(coin, std::move(days));
    const auto& jc = meta.at("coins");
    if (!jc.contains(coin)) throw FormatError(meta_path + ": no norm stats for " + coin);
    s.norm.vol_scale = jc.at(coin).at("vol_scale").get<double>();
    s.norm.ret_loc = jc.at(coin).at("ret_loc").get<double>();
    s.norm.ret_scale = jc.at(coin).at("ret_scale").get<double>();
    coins.push_back(std::move(s));
  }
  DateRange train{Date::parse(meta.at("train_range")[0].get<std::string>()),
                  Date::parse(meta.at("train_range")[1].get<std::string>())};
  DateRange test{Date::parse(meta.at("test_range")[0].get<std::string>()),
                 Date::parse(meta.at("test_range")[1].get<std::string>())};
  if (meta.at("coins").size() != coins.size())
    throw FormatError(meta_path + ": coin set does not match panel csv");
  return build_panel(std::move(coins), train, test);
}

}  // namespace volcast
