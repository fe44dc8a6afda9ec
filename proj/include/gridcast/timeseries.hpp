#ifndef GRIDCAST_TIMESERIES_HPP
#define GRIDCAST_TIMESERIES_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "gridcast/common.hpp"

namespace gridcast {

// Hours since 1970-01-01T00:00, timezone-naive market time.
using HourStamp = std::int64_t;

// Canonical series names; other columns are ingested too but the feature
// builder only consumes canonical exogenous series.
inline const std::vector<std::string>& canonical_exog_names() {
  static const std::vector<std::string> names = {
      "demand", "net_interchange", "solar_forecast", "wind_forecast",
      "temperature"};
  return names;
}

namespace detail {

// Civil-date conversion (proleptic Gregorian), days since 1970-01-01.
inline std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y = static_cast<int>(yy + (m <= 2));
}

}  // namespace detail

// Parses "YYYY-MM-DDTHH:MM" into minutes since epoch.
inline std::int64_t parse_minute_stamp(const std::string& s) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0;
  char sep = 0;
  if (std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d", &y, &mo, &d, &sep, &h, &mi) !=
          6 ||
      (sep != 'T' && sep != ' ')) {
    throw DataError("unparseable timestamp '" + s + "'");
  }
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 ||
      mi > 59) {
    throw DataError("timestamp out of range '" + s + "'");
  }
  return detail::days_from_civil(y, static_cast<unsigned>(mo),
                                 static_cast<unsigned>(d)) *
             1440 +
         h * 60 + mi;
}

inline std::string format_minute_stamp(std::int64_t minutes) {
  std::int64_t days = minutes / 1440;
  std::int64_t rem = minutes % 1440;
  if (rem < 0) {
    rem += 1440;
    days -= 1;
  }
  int y;
  unsigned m, d;
  detail::civil_from_days(days, y, m, d);
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02lld:%02lld", y, m, d,
                static_cast<long long>(rem / 60),
                static_cast<long long>(rem % 60));
  return buf;
}

inline std::int64_t parse_hour_stamp(const std::string& s) {
  const std::int64_t minutes = parse_minute_stamp(s);
  if (minutes % 60 != 0) {
    throw DataError("timestamp '" + s + "' is not hour-aligned");
  }
  return minutes / 60;
}

inline std::string format_hour_stamp(HourStamp hour) {
  return format_minute_stamp(hour * 60);
}

// Regular hourly series; the grid is implicit (start + index), so gaps
// cannot be represented. Values must be finite.
class TimeSeries {
 public:
  TimeSeries() = default;
  TimeSeries(HourStamp start, std::vector<double> values)
      : start_(start), values_(std::move(values)) {
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i])) {
        throw DataError("non-finite value at " +
                        format_hour_stamp(start_ + static_cast<HourStamp>(i)));
      }
    }
  }

  HourStamp start() const { return start_; }
  HourStamp end() const {
    return start_ + static_cast<HourStamp>(values_.size());
  }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }

  double at_hour(HourStamp hour) const {
    if (hour < start_ || hour >= end()) {
      throw DataError("hour " + format_hour_stamp(hour) +
                      " outside series range");
    }
    return values_[static_cast<std::size_t>(hour - start_)];
  }

 private:
  HourStamp start_ = 0;
  std::vector<double> values_;
};

// Named exogenous series on the same hourly grid as the price series.
// Order is preserved: it fixes the feature layout downstream.
class ExogenousSet {
 public:
  void add(const std::string& name, TimeSeries series) {
    for (const auto& [existing, _] : series_) {
      if (existing == name) {
        throw DataError("duplicate exogenous series '" + name + "'");
      }
    }
    series_.emplace_back(name, std::move(series));
  }

  bool has(const std::string& name) const { return find(name) != nullptr; }

  const TimeSeries& get(const std::string& name) const {
    if (const TimeSeries* s = find(name)) return *s;
    throw DataError("unknown exogenous series '" + name + "'");
  }

  const std::vector<std::pair<std::string, TimeSeries>>& items() const {
    return series_;
  }
  std::size_t size() const { return series_.size(); }

 private:
  const TimeSeries* find(const std::string& name) const {
    for (const auto& [n, s] : series_) {
      if (n == name) return &s;
    }
    return nullptr;
  }

  std::vector<std::pair<std::string, TimeSeries>> series_;
};

struct Dataset {
  TimeSeries price;
  ExogenousSet exog;
  std::string region = "synthetic";

  std::size_t size() const { return price.size(); }
  HourStamp start() const { return price.start(); }

  void validate_alignment() const {
    for (const auto& [name, s] : exog.items()) {
      if (s.start() != price.start() || s.size() != price.size()) {
        throw DataError("series '" + name + "' not aligned with price grid");
      }
    }
  }
};

// Mean-per-hour aggregation of a regular sub-hourly series.
// step_minutes must divide 60; partial leading/trailing hours are averaged
// over the observations present.
inline TimeSeries aggregate_to_hourly(std::int64_t start_minute,
                                      int step_minutes,
                                      const std::vector<double>& values) {
  if (step_minutes <= 0 || step_minutes >= 60 || 60 % step_minutes != 0) {
    throw DataError("irregular sub-hourly step of " +
                    std::to_string(step_minutes) + " minutes");
  }
  if (values.empty()) throw DataError("empty input series");

  const HourStamp first_hour = start_minute >= 0
                                   ? start_minute / 60
                                   : (start_minute - 59) / 60;
  const std::int64_t last_minute =
      start_minute + static_cast<std::int64_t>(values.size() - 1) * step_minutes;
  const HourStamp last_hour =
      last_minute >= 0 ? last_minute / 60 : (last_minute - 59) / 60;
  const std::size_t n_hours = static_cast<std::size_t>(last_hour - first_hour + 1);

  std::vector<double> sums(n_hours, 0.0);
  std::vector<int> counts(n_hours, 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::int64_t minute =
        start_minute + static_cast<std::int64_t>(i) * step_minutes;
    const HourStamp hour = minute >= 0 ? minute / 60 : (minute - 59) / 60;
    const std::size_t bucket = static_cast<std::size_t>(hour - first_hour);
    sums[bucket] += values[i];
    counts[bucket] += 1;
  }
  std::vector<double> hourly(n_hours);
  for (std::size_t b = 0; b < n_hours; ++b) {
    if (counts[b] == 0) {
      throw DataError("empty hour bucket at " +
                      format_hour_stamp(first_hour + static_cast<HourStamp>(b)));
    }
    hourly[b] = sums[b] / counts[b];
  }
  return TimeSeries(first_hour, std::move(hourly));
}

}  // namespace gridcast

#endif  // GRIDCAST_TIMESERIES_HPP
