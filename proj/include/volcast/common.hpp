#pragma once

// Shared plumbing: error types, calendar dates, deterministic RNG,
// small stats helpers and formatting used across the library.

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace volcast {

// --- errors --------------------------------------------------------------

// Base for everything thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input rows (bad field counts, unparseable numbers, bad prices).
struct FormatError : Error {
  using Error::Error;
};

// Two rows claim the same timestamp for the same coin.
struct DuplicateTimestampError : FormatError {
  using FormatError::FormatError;
};

// A regression or training step cannot produce a usable model.
struct FitError : Error {
  using Error::Error;
};

// A statistical estimator was handed degenerate data.
struct EstimationError : Error {
  using Error::Error;
};

// Bad user-facing configuration (CLI flags, config file, run setup).
struct ConfigError : Error {
  using Error::Error;
};

// A pipeline step was asked to run before the step it depends on.
struct DependencyError : Error {
  using Error::Error;
};

// --- calendar dates --------------------------------------------------------

// Civil date stored as days since 1970-01-01 (UTC). The conversion uses the
// classic days-from-civil algorithm so we do not depend on C++20 calendar
// support, which the minimum toolchain lacks.
class Date {
 public:
  Date() = default;
  explicit Date(std::int64_t days) : days_(days) {}

  static Date from_ymd(int y, int m, int d);
  static Date from_epoch_ms(std::int64_t ms);  // floors to the UTC day
  // Parses strict "YYYY-MM-DD"; throws FormatError otherwise.
  static Date parse(std::string_view s);

  std::int64_t days() const { return days_; }
  std::int64_t epoch_ms() const { return days_ * 86400000; }
  void to_ymd(int& y, int& m, int& d) const;
  std::string str() const;  // "YYYY-MM-DD"

  Date operator+(std::int64_t n) const { return Date(days_ + n); }
  Date operator-(std::int64_t n) const { return Date(days_ - n); }
  std::int64_t operator-(Date o) const { return days_ - o.days_; }
  auto operator<=>(const Date&) const = default;

 private:
  std::int64_t days_ = 0;
};

// Inclusive date interval.
struct DateRange {
  Date first, last;
  bool contains(Date d) const { return first <= d && d <= last; }
};

// --- deterministic RNG -----------------------------------------------------

// mt19937_64 with hand-rolled value mappings. std::*_distribution output is
// implementation defined, so uniforms and normals are produced here to keep
// every stream reproducible across platforms and library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // uniform double in [0, 1) with 53 random bits
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller, one cached mate
  double normal();

  // integer in [0, n) by rejection-free 128-bit multiply
  std::uint64_t below(std::uint64_t n);

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0;
  bool has_spare_ = false;
};

// Cheap stateless mixer for deriving per-stream seeds from (seed, index).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// --- small stats -------------------------------------------------------

double mean(std::span<const double> v);
// population standard deviation (divide by n)
double stdev_pop(std::span<const double> v);
// linear-interpolation quantile on a sorted copy, R type 7; q in [0, 1]
double quantile(std::vector<double> v, double q);
double median(std::vector<double> v);

// --- text helpers ------------------------------------------------------

// shortest-roundtrip-ish decimal for doubles: %.17g, with nan/inf spelled out
std::string fmt_double(double x);
// strict double parse of a full token; throws FormatError on trailing junk
double parse_double(std::string_view s, std::string_view what);
std::int64_t parse_int(std::string_view s, std::string_view what);
std::vector<std::string_view> split(std::string_view line, char sep);
std::string lower(std::string_view s);
// glob match supporting '*' (any run) and '?' (any one char)
bool glob_match(std::string_view pattern, std::string_view text);

// FNV-1a 64-bit over raw bytes, used for manifest content hashes.
std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t v);

// doubles <-> little-endian hex (16 chars per value), used to store model
// weights bit-exactly in JSON artifacts
std::string doubles_to_hex(std::span<const double> v);
std::vector<double> hex_to_doubles(std::string_view hex);

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace volcast
