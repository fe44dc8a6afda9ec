#ifndef GRIDCAST_FEATURES_HPP
#define GRIDCAST_FEATURES_HPP

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "gridcast/timeseries.hpp"
#include "gridcast/transform.hpp"

namespace gridcast {

// Lag L means the value observed L-1 hours before the anchor, so lag 1 is
// the most recent observation and lag 336 reaches the start of a two-week
// window.
struct FeatureSpec {
  std::size_t lookback = 336;   // L
  std::size_t horizon = 168;    // H
  std::vector<std::size_t> price_lags = default_price_lags();
  std::vector<std::size_t> exog_lags = {1, 24, 168};
  bool include_full_window = false;

  static std::vector<std::size_t> default_price_lags() {
    std::vector<std::size_t> lags;
    for (std::size_t l = 1; l <= 24; ++l) lags.push_back(l);
    for (std::size_t l : {36, 48, 72, 96, 120, 144, 168}) lags.push_back(l);
    return lags;
  }

  void validate() const {
    if (lookback == 0 || horizon == 0) {
      throw ConfigError("features: lookback and horizon must be positive");
    }
    auto check = [&](const std::vector<std::size_t>& lags, const char* which) {
      for (std::size_t l : lags) {
        if (l == 0) {
          throw ConfigError(std::string("features: ") + which +
                            " lag must be positive");
        }
        if (l > lookback) {
          throw ConfigError(std::string("features: ") + which + " lag " +
                            std::to_string(l) + " exceeds lookback " +
                            std::to_string(lookback));
        }
      }
      if (!std::is_sorted(lags.begin(), lags.end()) ||
          std::adjacent_find(lags.begin(), lags.end()) != lags.end()) {
        throw ConfigError(std::string("features: ") + which +
                          " lags must be strictly increasing");
      }
    };
    check(price_lags, "price");
    check(exog_lags, "exog");
  }

  std::size_t width(std::size_t n_exog) const {
    if (include_full_window) return lookback * (1 + n_exog);
    return price_lags.size() + n_exog * exog_lags.size();
  }
};

// One (feature row, horizon target) pair anchored at hour index t.
// x draws only on values at or before t; y covers t+1..t+H.
struct WindowSample {
  std::size_t anchor = 0;  // index into the dataset grid
  std::vector<double> x;
  std::vector<double> y;
};

struct WindowSet {
  std::vector<std::size_t> anchors;
  Matrix x;  // one row per anchor
  Matrix y;  // one row per anchor, horizon columns
  std::vector<std::string> exog_used;

  std::size_t size() const { return anchors.size(); }

  WindowSample sample(std::size_t i) const {
    WindowSample s;
    s.anchor = anchors.at(i);
    const auto xr = x.row(i);
    const auto yr = y.row(i);
    s.x.assign(xr.begin(), xr.end());
    s.y.assign(yr.begin(), yr.end());
    return s;
  }
};

namespace detail {

// Canonical exogenous series present in the dataset, in canonical order.
inline std::vector<std::string> feature_exog(const Dataset& ds) {
  std::vector<std::string> used;
  for (const auto& name : canonical_exog_names()) {
    if (ds.exog.has(name)) used.push_back(name);
  }
  return used;
}

inline void fill_feature_row(const Dataset& ds, const FeatureSpec& spec,
                             const std::vector<std::string>& exog_used,
                             std::size_t t, std::span<double> out) {
  std::size_t k = 0;
  if (spec.include_full_window) {
    for (std::size_t i = t + 1 - spec.lookback; i <= t; ++i) {
      out[k++] = ds.price[i];
    }
    for (const auto& name : exog_used) {
      const TimeSeries& s = ds.exog.get(name);
      for (std::size_t i = t + 1 - spec.lookback; i <= t; ++i) {
        out[k++] = s[i];
      }
    }
    return;
  }
  for (std::size_t lag : spec.price_lags) out[k++] = ds.price[t - (lag - 1)];
  for (const auto& name : exog_used) {
    const TimeSeries& s = ds.exog.get(name);
    for (std::size_t lag : spec.exog_lags) out[k++] = s[t - (lag - 1)];
  }
}

}  // namespace detail

// Builds every valid window over dataset indices [begin, end).
// Layout per row: price lags in ascending order, then each canonical
// exogenous series' lags in canonical order. Targets are raw prices.
inline WindowSet build_windows(const Dataset& ds, const FeatureSpec& spec,
                               std::size_t begin = 0,
                               std::size_t end = static_cast<std::size_t>(-1)) {
  spec.validate();
  ds.validate_alignment();
  if (end == static_cast<std::size_t>(-1)) end = ds.size();
  const std::size_t n = end - begin;
  if (end > ds.size() || begin > end) {
    throw ComputeError("build_windows: range out of bounds");
  }
  if (n < spec.lookback + spec.horizon) {
    throw ComputeError(
        "build_windows: need at least " +
        std::to_string(spec.lookback + spec.horizon) + " hours, got " +
        std::to_string(n));
  }

  WindowSet ws;
  ws.exog_used = detail::feature_exog(ds);
  const std::size_t count = n - spec.lookback - spec.horizon + 1;
  const std::size_t width = spec.width(ws.exog_used.size());
  ws.x = Matrix(count, width);
  ws.y = Matrix(count, spec.horizon);
  ws.anchors.resize(count);

  for (std::size_t s = 0; s < count; ++s) {
    const std::size_t t = begin + spec.lookback - 1 + s;
    ws.anchors[s] = t;
    detail::fill_feature_row(ds, spec, ws.exog_used, t, ws.x.row(s));
    for (std::size_t h = 0; h < spec.horizon; ++h) {
      ws.y(s, h) = ds.price[t + 1 + h];
    }
  }
  return ws;
}

// Feature row for a single anchor (forecast-time path).
inline std::vector<double> build_feature_row(const Dataset& ds,
                                             const FeatureSpec& spec,
                                             std::size_t anchor) {
  spec.validate();
  if (anchor + 1 < spec.lookback || anchor >= ds.size()) {
    throw ComputeError("feature anchor outside data range");
  }
  const std::vector<std::string> exog_used = detail::feature_exog(ds);
  std::vector<double> row(spec.width(exog_used.size()));
  detail::fill_feature_row(ds, spec, exog_used, anchor, row);
  return row;
}

// Expanding-window folds: test ranges are the final n_folds * fold_len
// hours, consecutive and non-overlapping; fold k trains on everything
// strictly before its test range.
struct FoldRange {
  std::size_t train_begin = 0;
  std::size_t train_end = 0;  // == test_begin
  std::size_t test_begin = 0;
  std::size_t test_end = 0;
};

inline std::vector<FoldRange> split_expanding(std::size_t n_hours,
                                              std::size_t n_folds,
                                              std::size_t fold_len,
                                              std::size_t min_train = 1) {
  if (n_folds == 0 || fold_len == 0) {
    throw ConfigError("split_expanding: folds and fold length must be positive");
  }
  const std::size_t test_total = n_folds * fold_len;
  if (n_hours < test_total + min_train) {
    throw DataError("split_expanding: need at least " +
                    std::to_string(test_total + min_train) + " hours (" +
                    std::to_string(n_folds) + " folds of " +
                    std::to_string(fold_len) + " test hours plus " +
                    std::to_string(min_train) + " training hours), got " +
                    std::to_string(n_hours));
  }
  std::vector<FoldRange> folds(n_folds);
  const std::size_t first_test = n_hours - test_total;
  for (std::size_t k = 0; k < n_folds; ++k) {
    folds[k].train_begin = 0;
    folds[k].test_begin = first_test + k * fold_len;
    folds[k].train_end = folds[k].test_begin;
    folds[k].test_end = folds[k].test_begin + fold_len;
  }
  return folds;
}

inline std::vector<FoldRange> split_expanding(const Dataset& ds,
                                              std::size_t n_folds,
                                              std::size_t fold_len,
                                              std::size_t min_train = 1) {
  return split_expanding(ds.size(), n_folds, fold_len, min_train);
}

}  // namespace gridcast

#endif  // GRIDCAST_FEATURES_HPP
