#ifndef GRIDCAST_METRICS_HPP
#define GRIDCAST_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gridcast/common.hpp"

namespace gridcast {

inline double mae(std::span<const double> pred, std::span<const double> actual) {
  if (pred.size() != actual.size()) throw ComputeError("mae: length mismatch");
  if (pred.empty()) throw ComputeError("mae: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    sum += std::abs(pred[i] - actual[i]);
  }
  return sum / static_cast<double>(pred.size());
}

inline double rmse(std::span<const double> pred,
                   std::span<const double> actual) {
  if (pred.size() != actual.size()) throw ComputeError("rmse: length mismatch");
  if (pred.empty()) throw ComputeError("rmse: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - actual[i];
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(pred.size()));
}

inline double rmae(double model_mae, double naive_mae) {
  if (!(naive_mae > 0.0)) {
    throw ComputeError("rmae: undefined for zero naive MAE");
  }
  return model_mae / naive_mae;
}

struct MetricSet {
  double mae = 0.0;
  double rmse = 0.0;
  double rmae = 0.0;
};

inline MetricSet compute_metrics(std::span<const double> pred,
                                 std::span<const double> actual,
                                 double naive_mae) {
  MetricSet m;
  m.mae = mae(pred, actual);
  m.rmse = rmse(pred, actual);
  m.rmae = rmae(m.mae, naive_mae);
  return m;
}

// Empirical quantile with linear interpolation at rank q * (n - 1).
inline double interpolated_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ComputeError("quantile: empty input");
  if (!(q >= 0.0 && q <= 1.0)) throw ComputeError("quantile: q out of [0, 1]");
  std::sort(values.begin(), values.end());
  const double rank = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(rank);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

// Peaks-over-threshold tail scoring: the threshold is the empirical
// q-quantile of the actuals, exceedances are the strictly greater
// observations, and extreme_mae is the MAE restricted to them.
struct ExtremeReport {
  double quantile = 0.95;
  double threshold = 0.0;
  std::size_t exceedance_count = 0;
  double extreme_mae = 0.0;
  bool defined = false;  // false when no observation exceeds the threshold
};

inline ExtremeReport evt_extreme_mae(std::span<const double> pred,
                                     std::span<const double> actual,
                                     double q = 0.95) {
  if (pred.size() != actual.size()) {
    throw ComputeError("evt_extreme_mae: length mismatch");
  }
  if (actual.empty()) throw ComputeError("evt_extreme_mae: empty input");
  if (!(q > 0.0 && q < 1.0)) {
    throw ComputeError("evt_extreme_mae: q must be in (0, 1)");
  }
  ExtremeReport rep;
  rep.quantile = q;
  rep.threshold = interpolated_quantile(
      std::vector<double>(actual.begin(), actual.end()), q);
  double sum = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] > rep.threshold) {
      sum += std::abs(pred[i] - actual[i]);
      rep.exceedance_count += 1;
    }
  }
  if (rep.exceedance_count > 0) {
    rep.extreme_mae = sum / static_cast<double>(rep.exceedance_count);
    rep.defined = true;
  }
  return rep;
}

}  // namespace gridcast

#endif  // GRIDCAST_METRICS_HPP
