#ifndef GRIDCAST_TRANSFORM_HPP
#define GRIDCAST_TRANSFORM_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gridcast/common.hpp"

namespace gridcast {

// Variance-stabilizing target transform; log-like for large magnitudes and
// defined for negative prices.
inline double asinh_apply(double v) {
  if (!std::isfinite(v)) throw ComputeError("asinh_apply: non-finite input");
  return std::asinh(v);
}

inline double asinh_invert(double u) {
  if (!std::isfinite(u)) throw ComputeError("asinh_invert: non-finite input");
  return std::sinh(u);
}

enum class TransformKind { Asinh, Identity };

struct TargetTransform {
  TransformKind kind = TransformKind::Asinh;

  double apply(double v) const {
    return kind == TransformKind::Asinh ? asinh_apply(v) : v;
  }
  double invert(double u) const {
    return kind == TransformKind::Asinh ? asinh_invert(u) : u;
  }
  std::vector<double> apply(const std::vector<double>& v) const {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = apply(v[i]);
    return out;
  }
  std::vector<double> invert(const std::vector<double>& u) const {
    std::vector<double> out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = invert(u[i]);
    return out;
  }

  std::string name() const {
    return kind == TransformKind::Asinh ? "asinh" : "identity";
  }
  static TargetTransform from_name(const std::string& name) {
    if (name == "asinh") return {TransformKind::Asinh};
    if (name == "identity") return {TransformKind::Identity};
    throw ConfigError("unknown target transform '" + name + "'");
  }
};

// Row-major matrix of feature rows; the workhorse container for model inputs.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) {
    return data[r * cols + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data[r * cols + c];
  }
  std::span<double> row(std::size_t r) {
    return std::span<double>(data.data() + r * cols, cols);
  }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data.data() + r * cols, cols);
  }
};

// Per-feature min/max fitted on training rows only. Constant features map
// to 0 on apply and back to their min on invert.
struct ScalerParams {
  std::vector<double> min;
  std::vector<double> max;

  std::size_t dim() const { return min.size(); }
};

inline ScalerParams scaler_fit(const Matrix& rows) {
  if (rows.rows == 0) throw ComputeError("scaler_fit: no rows");
  ScalerParams p;
  p.min.assign(rows.cols, 0.0);
  p.max.assign(rows.cols, 0.0);
  for (std::size_t c = 0; c < rows.cols; ++c) {
    double lo = rows(0, c), hi = rows(0, c);
    for (std::size_t r = 1; r < rows.rows; ++r) {
      const double v = rows(r, c);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    p.min[c] = lo;
    p.max[c] = hi;
  }
  return p;
}

inline void scaler_apply_inplace(const ScalerParams& p, std::span<double> row) {
  if (row.size() != p.dim()) {
    throw ComputeError("scaler_apply: dimension mismatch (" +
                       std::to_string(row.size()) + " vs " +
                       std::to_string(p.dim()) + ")");
  }
  for (std::size_t c = 0; c < row.size(); ++c) {
    const double range = p.max[c] - p.min[c];
    row[c] = range > 0.0 ? (row[c] - p.min[c]) / range : 0.0;
  }
}

inline std::vector<double> scaler_apply(const ScalerParams& p,
                                        std::span<const double> row) {
  std::vector<double> out(row.begin(), row.end());
  scaler_apply_inplace(p, out);
  return out;
}

inline std::vector<double> scaler_invert(const ScalerParams& p,
                                         std::span<const double> row) {
  if (row.size() != p.dim()) {
    throw ComputeError("scaler_invert: dimension mismatch");
  }
  std::vector<double> out(row.size());
  for (std::size_t c = 0; c < row.size(); ++c) {
    const double range = p.max[c] - p.min[c];
    out[c] = range > 0.0 ? row[c] * range + p.min[c] : p.min[c];
  }
  return out;
}

inline Matrix scaler_apply(const ScalerParams& p, const Matrix& rows) {
  Matrix out = rows;
  for (std::size_t r = 0; r < out.rows; ++r) {
    scaler_apply_inplace(p, out.row(r));
  }
  return out;
}

}  // namespace gridcast

#endif  // GRIDCAST_TRANSFORM_HPP
