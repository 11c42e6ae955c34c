#pragma once

// Ingestion of 5-minute bar files, daily realized-volatility aggregation,
// universe filtering, per-coin train-set normalization and panel assembly.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "volcast/common.hpp"

namespace volcast {

// One 5-minute bar. volume is quote-currency volume.
struct Bar {
  std::int64_t ts_ms = 0;
  double open = 0, high = 0, low = 0, close = 0;
  double volume = 0;
  std::int64_t trades = 0;
};

struct ParseReport {
  std::string coin;
  std::vector<Bar> bars;            // sorted by ts, duplicates rejected
  std::size_t rows = 0;             // data rows seen
  std::size_t malformed = 0;        // rows dropped, with samples below
  std::vector<std::string> samples; // first few malformed-row descriptions
};

// Reads a Binance-kline-layout CSV (header required; extra columns ignored).
// Malformed rows are counted and sampled, never silently dropped. Rows that
// are byte-identical duplicates are collapsed; conflicting rows at the same
// timestamp raise DuplicateTimestampError.
ParseReport parse_klines(std::istream& in, std::string_view coin);

// One UTC calendar day. sigma is the realized volatility over the day's
// 5-minute returns (first return measured from the day's open); ret is the
// close-to-close return versus the previous day's last close, NaN when there
// is no previous close. Days with fewer than the configured minimum bar
// count are kept but marked incomplete; zero-bar calendar days inside a
// series appear as empty placeholders so dates stay contiguous.
struct DayRecord {
  Date date;
  double sigma = kNaN;
  double ret = kNaN;
  int n_intervals = 0;
  double volume = 0;
  bool complete = false;
  double close = kNaN;  // last bar close, kept for return chaining
};

std::vector<DayRecord> daily_aggregate(std::span<const Bar> bars, int min_bars = 272);

// Per-coin normalization statistics, computed on training rows only.
struct NormStats {
  double vol_scale = 1;  // training mean of sigma; model-facing vol = sigma/vol_scale
  double ret_loc = 0;    // training mean of ret
  double ret_scale = 1;  // training population std of ret
};

// Maximal run of consecutive complete days, as an index range into days.
// The first row of a run is history only (its ret may be undefined or cross
// a gap); modeling rows are first+1 .. first+count-1.
struct Segment {
  std::size_t first = 0;
  std::size_t count = 0;
};

struct CoinSeries {
  std::string coin;
  std::vector<DayRecord> days;    // contiguous dates (placeholders fill gaps)
  std::vector<Segment> segments;  // runs of complete days
  NormStats norm;

  double norm_sigma(std::size_t i) const { return days[i].sigma / norm.vol_scale; }
  double norm_ret(std::size_t i) const { return (days[i].ret - norm.ret_loc) / norm.ret_scale; }
  std::optional<std::size_t> index_of(Date d) const;
};

// Fills calendar gaps with placeholders and derives segments.
CoinSeries make_series(std::string coin, std::vector<DayRecord> days);

struct FilterConfig {
  std::vector<std::string> stablecoins;          // exact-symbol denylist
  std::vector<std::string> leveraged_patterns;   // glob patterns, e.g. "*UP"
  int min_days = 400;                            // complete days required
  double min_median_volume = 1e5;                // median daily quote volume
};

FilterConfig default_filter_config();

struct Rejection {
  std::string coin;
  std::string reason;
};

struct FilterResult {
  std::vector<CoinSeries> kept;
  std::vector<Rejection> rejected;
};

FilterResult filter_universe(std::vector<CoinSeries> series, const FilterConfig& config);

struct Panel {
  std::vector<CoinSeries> coins;
  DateRange train_range, test_range;

  const CoinSeries* find(std::string_view coin) const;
};

// Validates that train precedes test without overlap.
Panel build_panel(std::vector<CoinSeries> coins, DateRange train, DateRange test);

// Indices of modeling rows (segment rows past the head) whose date falls in
// range; ascending.
std::vector<std::size_t> modeling_rows(const CoinSeries& s, const DateRange& range);

// Computes NormStats per coin from training modeling rows. Coins with fewer
// than two training rows or zero return variance are removed and reported.
struct NormalizeReport {
  std::vector<Rejection> excluded;
};
NormalizeReport normalize(Panel& panel);

// Canonical panel file plus JSON sidecar (norm stats, ranges, filter report).
void save_panel(const Panel& panel, const std::string& csv_path,
                const std::string& meta_path,
                const std::vector<Rejection>& filter_report = {},
                const std::vector<ParseReport>* parse_reports = nullptr);
Panel load_panel(const std::string& csv_path, const std::string& meta_path);

}  // namespace volcast
