#ifndef GRIDCAST_ENSEMBLE_HPP
#define GRIDCAST_ENSEMBLE_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gridcast/common.hpp"

namespace gridcast {

struct EnsembleWeight {
  double alpha = 0.5;  // weight on the KAN forecast
};

inline std::vector<double> combine(std::span<const double> pred_kan,
                                   std::span<const double> pred_xgb,
                                   double alpha) {
  if (pred_kan.size() != pred_xgb.size()) {
    throw ComputeError("combine: length mismatch");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ComputeError("combine: alpha out of [0, 1]");
  }
  std::vector<double> out(pred_kan.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = alpha * pred_kan[i] + (1.0 - alpha) * pred_xgb[i];
  }
  return out;
}

struct AlphaLoss {
  double alpha = 0.0;
  double mae = 0.0;
};

struct AlphaSelection {
  EnsembleWeight weight;
  std::vector<AlphaLoss> table;  // one row per grid point, ascending alpha
};

// Grid search over alpha in {0, step, ..., 1} minimizing validation MAE of
// the combined forecast. Ties resolve toward 0.5, then toward smaller
// alpha. The full table feeds the weight-ablation report.
inline AlphaSelection select_alpha(std::span<const double> pred_kan,
                                   std::span<const double> pred_xgb,
                                   std::span<const double> y_val,
                                   double grid_step = 0.05) {
  if (pred_kan.size() != pred_xgb.size() || pred_kan.size() != y_val.size()) {
    throw ComputeError("select_alpha: shape mismatch");
  }
  if (y_val.empty()) throw ComputeError("select_alpha: empty validation set");
  if (!(grid_step > 0.0) || grid_step > 1.0) {
    throw ComputeError("select_alpha: grid_step must be in (0, 1]");
  }
  const double n_real = 1.0 / grid_step;
  const long long n = std::llround(n_real);
  if (std::abs(n_real - static_cast<double>(n)) > 1e-9) {
    throw ComputeError("select_alpha: grid_step must divide 1 evenly");
  }

  AlphaSelection sel;
  sel.table.reserve(static_cast<std::size_t>(n) + 1);
  double best_mae = 0.0;
  double best_alpha = 0.0;
  bool first = true;
  for (long long i = 0; i <= n; ++i) {
    const double alpha = static_cast<double>(i) / static_cast<double>(n);
    double abs_sum = 0.0;
    for (std::size_t j = 0; j < y_val.size(); ++j) {
      const double c = alpha * pred_kan[j] + (1.0 - alpha) * pred_xgb[j];
      abs_sum += std::abs(c - y_val[j]);
    }
    const double mae = abs_sum / static_cast<double>(y_val.size());
    sel.table.push_back({alpha, mae});
    const bool better =
        first || mae < best_mae ||
        (mae == best_mae &&
         (std::abs(alpha - 0.5) < std::abs(best_alpha - 0.5)));
    // equal distance from 0.5 keeps the earlier (smaller) alpha
    if (better) {
      best_mae = mae;
      best_alpha = alpha;
      first = false;
    }
  }
  sel.weight.alpha = best_alpha;
  return sel;
}

}  // namespace gridcast

#endif  // GRIDCAST_ENSEMBLE_HPP
