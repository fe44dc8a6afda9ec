#ifndef GRIDCAST_BSPLINE_HPP
#define GRIDCAST_BSPLINE_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gridcast/common.hpp"

namespace gridcast {

// Uniform B-spline basis over [lo, hi] with G interior intervals and
// degree k. The knot sequence extends uniformly k intervals past each end,
// giving G + 2k + 1 knots and G + k basis functions that sum to one on the
// closed domain. Outside the domain the same recursion applies; the basis
// sum decays to zero across the extension band.
struct SplineGrid {
  static constexpr int kMaxOrder = 7;

  double lo = 0.0;
  double hi = 1.0;
  int grid_size = 3;  // G
  int order = 3;      // k
  std::vector<double> knots;

  SplineGrid() { rebuild(); }
  SplineGrid(double lo_, double hi_, int g, int k)
      : lo(lo_), hi(hi_), grid_size(g), order(k) {
    rebuild();
  }

  void rebuild() {
    if (!(lo < hi)) throw ConfigError("spline grid: lo must be < hi");
    if (grid_size < 1) throw ConfigError("spline grid: grid_size must be >= 1");
    if (order < 0 || order > kMaxOrder) {
      throw ConfigError("spline grid: order must be in [0, " +
                        std::to_string(kMaxOrder) + "]");
    }
    const int n = grid_size + 2 * order + 1;
    knots.resize(static_cast<std::size_t>(n));
    const double h = (hi - lo) / grid_size;
    for (int i = 0; i < n; ++i) {
      knots[static_cast<std::size_t>(i)] = lo + (i - order) * h;
    }
  }

  int basis_count() const { return grid_size + order; }
  double step() const { return (hi - lo) / grid_size; }

  // Knot value at any integer index; the stored knots continue the same
  // uniform progression, so virtual indices extrapolate it exactly.
  double knot(long long i) const {
    if (i >= 0 && i < static_cast<long long>(knots.size())) {
      return knots[static_cast<std::size_t>(i)];
    }
    return lo + (static_cast<double>(i) - order) * step();
  }

  // Interval index m with knot(m) <= x < knot(m+1); x == hi is assigned to
  // the last in-domain interval so the basis stays a partition of unity on
  // the closed domain.
  long long interval_of(double x) const {
    if (x == hi) return order + grid_size - 1;
    long long m =
        order + static_cast<long long>(std::floor((x - lo) / step()));
    while (x < knot(m)) --m;
    while (x >= knot(m + 1)) ++m;
    return m;
  }
};

// All G + k basis values of degree `order` at x by the plain Cox-de Boor
// recursion over the stored knots. Reference path; allocation per call.
inline void bspline_basis_into(const SplineGrid& g, double x,
                               std::span<double> out) {
  const int n_basis = g.basis_count();
  if (static_cast<int>(out.size()) != n_basis) {
    throw ComputeError("bspline_basis: output size mismatch");
  }
  const int n_knots = static_cast<int>(g.knots.size());
  std::vector<double> level(static_cast<std::size_t>(n_knots - 1), 0.0);
  for (int j = 0; j < n_knots - 1; ++j) {
    // x == hi belongs to the last in-domain interval (closed right end)
    const bool inside =
        (x == g.hi) ? (j == g.order + g.grid_size - 1)
                    : (x >= g.knots[static_cast<std::size_t>(j)] &&
                       x < g.knots[static_cast<std::size_t>(j + 1)]);
    level[static_cast<std::size_t>(j)] = inside ? 1.0 : 0.0;
  }
  for (int d = 1; d <= g.order; ++d) {
    for (int j = 0; j < n_knots - 1 - d; ++j) {
      const double t_j = g.knots[static_cast<std::size_t>(j)];
      const double t_jd = g.knots[static_cast<std::size_t>(j + d)];
      const double t_j1 = g.knots[static_cast<std::size_t>(j + 1)];
      const double t_jd1 = g.knots[static_cast<std::size_t>(j + d + 1)];
      double v = 0.0;
      const double left = level[static_cast<std::size_t>(j)];
      if (left != 0.0) v += (x - t_j) / (t_jd - t_j) * left;
      const double right = level[static_cast<std::size_t>(j + 1)];
      if (right != 0.0) v += (t_jd1 - x) / (t_jd1 - t_j1) * right;
      level[static_cast<std::size_t>(j)] = v;
    }
  }
  for (int j = 0; j < n_basis; ++j) {
    out[static_cast<std::size_t>(j)] = level[static_cast<std::size_t>(j)];
  }
}

inline std::vector<double> bspline_basis(const SplineGrid& g, double x) {
  std::vector<double> out(static_cast<std::size_t>(g.basis_count()));
  bspline_basis_into(g, x, out);
  return out;
}

// The at-most order+1 basis values that can be nonzero at x, with their
// first derivatives, anchored at index `first`. Allocation-free de Boor
// triangle on the (virtually extended) uniform knots; hot path for network
// evaluation. Entries whose index falls outside the basis range are zero.
struct BasisWindow {
  int first = 0;
  std::array<double, SplineGrid::kMaxOrder + 1> value{};
  std::array<double, SplineGrid::kMaxOrder + 1> deriv{};
};

inline BasisWindow basis_window(const SplineGrid& g, double x) {
  const int k = g.order;
  const int n_basis = g.basis_count();
  const long long m = g.interval_of(x);

  BasisWindow w;
  w.first = static_cast<int>(
      std::min<long long>(std::max<long long>(m - k, 0), n_basis - (k + 1)));

  std::array<double, SplineGrid::kMaxOrder + 1> vals{};
  std::array<double, SplineGrid::kMaxOrder + 1> nm1{};
  std::array<double, SplineGrid::kMaxOrder + 1> left{};
  std::array<double, SplineGrid::kMaxOrder + 1> right{};
  vals[0] = 1.0;
  for (int j = 1; j <= k; ++j) {
    left[static_cast<std::size_t>(j)] = x - g.knot(m + 1 - j);
    right[static_cast<std::size_t>(j)] = g.knot(m + j) - x;
    if (j == k) {
      for (int r = 0; r < k; ++r) {
        nm1[static_cast<std::size_t>(r)] = vals[static_cast<std::size_t>(r)];
      }
    }
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double den = right[static_cast<std::size_t>(r + 1)] +
                         left[static_cast<std::size_t>(j - r)];
      const double term = vals[static_cast<std::size_t>(r)] / den;
      vals[static_cast<std::size_t>(r)] =
          saved + right[static_cast<std::size_t>(r + 1)] * term;
      saved = left[static_cast<std::size_t>(j - r)] * term;
    }
    vals[static_cast<std::size_t>(j)] = saved;
  }

  // vals[r] = N_{m-k+r, k}(x); nm1[r] = N_{m-k+1+r, k-1}(x) for r in [0,k).
  auto base_val = [&](long long i) {
    const long long r = i - (m - k);
    return (r >= 0 && r <= k) ? vals[static_cast<std::size_t>(r)] : 0.0;
  };
  auto lower_val = [&](long long i) {
    const long long r = i - (m - k + 1);
    return (r >= 0 && r < k) ? nm1[static_cast<std::size_t>(r)] : 0.0;
  };
  for (int j = 0; j <= k; ++j) {
    const long long i = w.first + j;
    w.value[static_cast<std::size_t>(j)] = base_val(i);
    if (k >= 1) {
      const double left_den = g.knot(i + k) - g.knot(i);
      const double right_den = g.knot(i + k + 1) - g.knot(i + 1);
      w.deriv[static_cast<std::size_t>(j)] =
          k * (lower_val(i) / left_den - lower_val(i + 1) / right_den);
    }
  }
  return w;
}

}  // namespace gridcast

#endif  // GRIDCAST_BSPLINE_HPP
