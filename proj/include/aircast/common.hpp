/* Copyright (c) 2026 Aircast Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace aircast {

// ---------------------------------------------------------------------------
// Error taxonomy. Callers catch the base Error; the CLI maps subclasses to
// exit codes.
// ---------------------------------------------------------------------------
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ShapeError : Error {
  using Error::Error;
};
struct RangeError : Error {
  using Error::Error;
};
struct FormatError : Error {
  using Error::Error;
};
struct IntegrityError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct ArgumentError : Error {
  using Error::Error;
};
struct HistoryError : Error {
  using Error::Error;
};

#define AIRCAST_CHECK(cond, exc, msg) \
  do {                                \
    if (!(cond)) throw exc(msg);      \
  } while (0)

// ---------------------------------------------------------------------------
// UTC time. Stored as seconds since the Unix epoch; all conversions use the
// proleptic Gregorian calendar, no leap seconds, no time zones.
// ---------------------------------------------------------------------------
using UtcTime = std::int64_t;

constexpr std::int64_t kSecondsPerHour = 3600;
constexpr std::int64_t kSecondsPerDay = 86400;
constexpr std::int64_t kStepSeconds = 12 * kSecondsPerHour;  // one model step

struct CivilTime {
  int year;
  int month;   // 1..12
  int day;     // 1..31
  int hour;    // 0..23
  int minute;  // 0..59
  int second;  // 0..59
};

UtcTime utc_from_civil(const CivilTime& c);
CivilTime civil_from_utc(UtcTime t);

// Day index within the year, 0-based (Jan 1 -> 0).
int day_of_year(UtcTime t);
// Hour within the day, fractional, in [0, 24).
double hour_of_day(UtcTime t);

// ISO-8601 "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_to_iso(UtcTime t);
UtcTime iso_to_utc(const std::string& s);

// ---------------------------------------------------------------------------
// Deterministic RNG. mt19937_64 has a standard-fixed sequence; the transforms
// below avoid the implementation-defined std::*_distribution classes so that
// identical seeds give identical streams on every platform.
// ---------------------------------------------------------------------------
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller.
  double normal();

  // Uniform integer in [0, n).
  std::uint64_t integer(std::uint64_t n);

  // Independent child stream; distinct ids give decorrelated streams.
  Rng fork(std::uint64_t stream_id) const;

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Fisher-Yates shuffle driven by Rng (std::shuffle ordering is
// implementation-defined).
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.integer(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace aircast
