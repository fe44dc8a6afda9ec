#ifndef GRIDCAST_BASELINES_HPP
#define GRIDCAST_BASELINES_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gridcast/common.hpp"
#include "gridcast/transform.hpp"

namespace gridcast {

enum class BaselineKind { NaiveLast, SeasonalNaive168, LinearArx };

// Persistence: every horizon step repeats the most recent observation.
inline std::vector<double> naive_forecast(std::span<const double> history,
                                          std::size_t horizon) {
  if (history.empty()) throw ComputeError("naive_forecast: empty history");
  return std::vector<double>(horizon, history.back());
}

// Weekly persistence: step h repeats the value observed 168 hours before
// t+1+h.
inline std::vector<double> seasonal_naive_forecast(
    std::span<const double> history, std::size_t horizon,
    std::size_t period = 168) {
  if (history.size() < period) {
    throw ComputeError("seasonal_naive_forecast: history shorter than period " +
                       std::to_string(period));
  }
  std::vector<double> out(horizon);
  for (std::size_t h = 0; h < horizon; ++h) {
    // value at t - period + 1 + h, wrapping forward by whole periods if
    // the horizon exceeds one period
    std::size_t back = period - 1 - (h % period);
    out[h] = history[history.size() - 1 - back];
  }
  return out;
}

// Ridge-stabilized least squares per horizon step, with intercept.
// A lightweight linear reference, not a SARIMAX reproduction.
struct LinearArx {
  std::size_t n_features = 0;
  std::size_t horizon = 0;
  Matrix weights;  // horizon x (n_features + 1), intercept last

  std::vector<double> predict(std::span<const double> x) const {
    if (x.size() != n_features) {
      throw ComputeError("linear_arx predict: dimension mismatch");
    }
    std::vector<double> out(horizon);
    for (std::size_t h = 0; h < horizon; ++h) {
      double acc = weights(h, n_features);
      for (std::size_t j = 0; j < n_features; ++j) {
        acc += weights(h, j) * x[j];
      }
      out[h] = acc;
    }
    return out;
  }
};

namespace detail {

// Dense Cholesky solve of (A + ridge I) W = B for symmetric positive
// definite A; B holds one right-hand side per column.
inline Matrix cholesky_solve(Matrix a, const Matrix& b, double ridge) {
  const std::size_t d = a.rows;
  for (std::size_t i = 0; i < d; ++i) a(i, i) += ridge;
  // in-place lower factor
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = a(i, j);
      for (std::size_t k = 0; k < j; ++k) sum -= a(i, k) * a(j, k);
      if (i == j) {
        if (sum <= 0.0) {
          throw ComputeError(
              "linear_arx: normal equations not positive definite beyond "
              "ridge rescue");
        }
        a(i, i) = std::sqrt(sum);
      } else {
        a(i, j) = sum / a(j, j);
      }
    }
  }
  Matrix w(b.rows, b.cols);
  std::vector<double> col(d);
  for (std::size_t c = 0; c < b.cols; ++c) {
    for (std::size_t i = 0; i < d; ++i) {
      double sum = b(i, c);
      for (std::size_t k = 0; k < i; ++k) sum -= a(i, k) * col[k];
      col[i] = sum / a(i, i);
    }
    for (std::size_t i = d; i-- > 0;) {
      double sum = col[i];
      for (std::size_t k = i + 1; k < d; ++k) sum -= a(k, i) * col[k];
      col[i] = sum / a(i, i);
    }
    for (std::size_t i = 0; i < d; ++i) w(i, c) = col[i];
  }
  return w;
}

}  // namespace detail

inline LinearArx linear_arx_fit(const Matrix& x, const Matrix& y,
                                double ridge = 1e-6) {
  if (x.rows != y.rows) throw ComputeError("linear_arx: row count mismatch");
  if (x.rows < x.cols + 1) {
    throw ComputeError("linear_arx: need at least " +
                       std::to_string(x.cols + 1) + " samples, got " +
                       std::to_string(x.rows));
  }
  const std::size_t d = x.cols + 1;  // intercept appended

  Matrix gram(d, d);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const auto row = x.row(i);
    for (std::size_t a = 0; a < d; ++a) {
      const double va = a < x.cols ? row[a] : 1.0;
      for (std::size_t b = a; b < d; ++b) {
        const double vb = b < x.cols ? row[b] : 1.0;
        gram(a, b) += va * vb;
      }
    }
  }
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < a; ++b) gram(a, b) = gram(b, a);
  }

  Matrix rhs(d, y.cols);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const auto row = x.row(i);
    for (std::size_t h = 0; h < y.cols; ++h) {
      const double t = y(i, h);
      for (std::size_t a = 0; a < x.cols; ++a) rhs(a, h) += row[a] * t;
      rhs(d - 1, h) += t;
    }
  }

  const Matrix w = detail::cholesky_solve(std::move(gram), rhs, ridge);

  LinearArx model;
  model.n_features = x.cols;
  model.horizon = y.cols;
  model.weights = Matrix(y.cols, d);
  for (std::size_t h = 0; h < y.cols; ++h) {
    for (std::size_t a = 0; a < d; ++a) model.weights(h, a) = w(a, h);
  }
  return model;
}

}  // namespace gridcast

#endif  // GRIDCAST_BASELINES_HPP
