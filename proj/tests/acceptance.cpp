// Acceptance suite: runs each acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion. Exits nonzero if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "gridcast/gridcast.hpp"

using namespace gridcast;
using clk = std::chrono::steady_clock;

namespace {

double seconds_since(clk::time_point t0) {
  return std::chrono::duration<double>(clk::now() - t0).count();
}

struct Harness {
  int failures = 0;

  void check(int id, const std::string& what, bool ok,
             const std::string& detail = "") {
    std::printf("[%s] criterion %2d: %s%s%s\n", ok ? "PASS" : "FAIL", id,
                what.c_str(), detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
};

// ---- 1: spline partition of unity --------------------------------------

bool partition_of_unity(std::string& detail) {
  const auto t0 = clk::now();
  for (int G = 1; G <= 5; ++G) {
    for (int k = 0; k <= 3; ++k) {
      SplineGrid g(0.0, 1.0, G, k);
      for (int i = 0; i < 1000; ++i) {
        const double x = static_cast<double>(i) / 999.0;
        double sum = 0.0;
        for (double v : bspline_basis(g, x)) sum += v;
        if (std::abs(sum - 1.0) > 1e-9) {
          detail = "sum " + format_double(sum) + " at x=" + format_double(x);
          return false;
        }
      }
    }
  }
  const double dt = seconds_since(t0);
  detail = format_double(dt) + " s";
  return dt < 1.0;
}

// ---- 2: gradient fidelity ----------------------------------------------

bool gradient_fidelity(std::string& detail) {
  const auto t0 = clk::now();
  rng::SplitMix64 gen(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::size_t> widths;
    widths.push_back(1 + gen.next_below(5));
    if (trial % 2 == 0) widths.push_back(1 + gen.next_below(5));
    widths.push_back(1 + gen.next_below(5));

    SplineGrid grid(0.0, 1.0, 3, 3);
    KanNetwork net(widths, grid, 1000 + static_cast<std::uint64_t>(trial));
    const std::size_t rows = 3 + gen.next_below(4);
    Matrix x(rows, widths.front());
    for (auto& v : x.data) v = gen.next_double();
    Matrix y = net.forward_batch(x);
    for (auto& v : y.data) v += (gen.next_double() < 0.5 ? -1.5 : 1.5);

    const BackwardResult res = backward(net, x, y);
    auto grads = const_cast<KanGradients&>(res.grads).views();
    auto params = net.param_views();
    const double h = 1e-5;
    for (std::size_t a = 0; a < params.size(); ++a) {
      for (std::size_t i = 0; i < params[a].size(); ++i) {
        const double saved = params[a][i];
        params[a][i] = saved + h;
        const double up = loss_mae(net.forward_batch(x), y);
        params[a][i] = saved - h;
        const double dn = loss_mae(net.forward_batch(x), y);
        params[a][i] = saved;
        const double fd = (up - dn) / (2.0 * h);
        const double got = grads[a][i];
        const double rel =
            std::abs(fd - got) / std::max({std::abs(fd), std::abs(got), 1e-8});
        worst = std::max(worst, rel);
        if (rel > 1e-4) {
          detail = "relative error " + format_double(rel);
          return false;
        }
      }
    }
  }
  const double dt = seconds_since(t0);
  detail = "max rel err " + format_double(worst) + ", " + format_double(dt) +
           " s";
  return dt < 30.0;
}

// ---- 3: boosting oracle -------------------------------------------------

struct BruteSplit {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

// Left sums accumulate in sorted (value, row) order so exactly tied gains
// compare identically with the implementation's scan.
BruteSplit brute_best_split(const Matrix& x,
                            const std::vector<std::size_t>& rows,
                            const std::vector<double>& g,
                            const std::vector<double>& h,
                            const GbtConfig& cfg) {
  BruteSplit best;
  for (std::size_t f = 0; f < x.cols; ++f) {
    std::vector<std::size_t> order = rows;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return x(a, f) < x(b, f) || (x(a, f) == x(b, f) && a < b);
    });
    double gtot = 0, htot = 0;
    for (std::size_t r : rows) {
      gtot += g[r];
      htot += h[r];
    }
    double gl = 0, hl = 0;
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      gl += g[order[i]];
      hl += h[order[i]];
      const double lo = x(order[i], f);
      const double hi = x(order[i + 1], f);
      if (hi <= lo) continue;
      const double thr = 0.5 * (lo + hi);
      const double hr = htot - hl;
      if (hl < cfg.min_child_weight || hr < cfg.min_child_weight) continue;
      const double gain =
          split_gain(gl, hl, gtot - gl, hr, cfg.lambda, cfg.gamma);
      if (gain > best.gain) best = {true, static_cast<int>(f), thr, gain};
    }
  }
  if (best.gain <= 0.0) best.found = false;
  return best;
}

bool check_tree_vs_brute(const RegressionTree& tree, int node, const Matrix& x,
                         std::vector<std::size_t> rows,
                         const std::vector<double>& g,
                         const std::vector<double>& h, const GbtConfig& cfg,
                         int depth, std::string& detail) {
  const TreeNode& tn = tree.nodes[static_cast<std::size_t>(node)];
  double gsum = 0, hsum = 0;
  for (std::size_t r : rows) {
    gsum += g[r];
    hsum += h[r];
  }
  const BruteSplit best = depth < cfg.max_depth
                              ? brute_best_split(x, rows, g, h, cfg)
                              : BruteSplit{};
  if (!best.found) {
    if (!tn.is_leaf()) {
      detail = "expected a leaf";
      return false;
    }
    const double expect = -gsum / (hsum + cfg.lambda);
    if (std::abs(tn.weight - expect) > 1e-12) {
      detail = "leaf weight off by " + format_double(tn.weight - expect);
      return false;
    }
    return true;
  }
  if (tn.is_leaf() || tn.feature != best.feature ||
      tn.threshold != best.threshold) {
    detail = "split mismatch vs exhaustive search";
    return false;
  }
  std::vector<std::size_t> left, right;
  for (std::size_t r : rows) {
    (x(r, static_cast<std::size_t>(tn.feature)) < tn.threshold ? left : right)
        .push_back(r);
  }
  return check_tree_vs_brute(tree, tn.left, x, left, g, h, cfg, depth + 1,
                             detail) &&
         check_tree_vs_brute(tree, tn.right, x, right, g, h, cfg, depth + 1,
                             detail);
}

bool boosting_oracle(std::string& detail) {
  const auto t0 = clk::now();
  rng::SplitMix64 gen(3033);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + gen.next_below(5);
    const std::size_t d = 1 + gen.next_below(2);
    Matrix x(n, d);
    for (auto& v : x.data) v = static_cast<double>(gen.next_below(5));
    std::vector<double> g(n), h(n, 1.0);
    for (auto& v : g) v = gen.next_gaussian();
    GbtConfig cfg;
    cfg.max_depth = 1 + static_cast<int>(gen.next_below(4));
    cfg.lambda = (trial % 2) ? 1.0 : 0.25;
    std::vector<int> feats;
    for (std::size_t f = 0; f < d; ++f) feats.push_back(static_cast<int>(f));
    const RegressionTree tree = build_tree(x, g, h, cfg, feats);
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    if (!check_tree_vs_brute(tree, 0, x, rows, g, h, cfg, 0, detail)) {
      detail += " (trial " + std::to_string(trial) + ")";
      return false;
    }
  }
  const double dt = seconds_since(t0);
  detail = format_double(dt) + " s";
  return dt < 10.0;
}

// ---- 4: boosting monotonicity -------------------------------------------

bool boosting_monotonicity(std::string& detail) {
  rng::SplitMix64 gen(4044);
  const std::size_t n = 200, d = 10;
  Matrix x(n, d);
  for (auto& v : x.data) v = gen.next_double();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = 3.0 * x(i, 0) - 2.0 * x(i, 1) * x(i, 2) + std::sin(6.0 * x(i, 3)) +
           0.3 * gen.next_gaussian();
  }
  GbtConfig cfg;
  cfg.n_estimators = 100;
  cfg.subsample = 1.0;
  cfg.colsample = 1.0;
  cfg.seed = 4;
  const Booster b = fit(x, y, cfg);

  std::vector<double> preds(n, b.base_score);
  double prev = std::numeric_limits<double>::infinity();
  int tree_idx = 0;
  for (const auto& tree : b.trees) {
    for (std::size_t i = 0; i < n; ++i) {
      preds[i] += b.learning_rate * tree.predict(x.row(i));
    }
    double mse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mse += (preds[i] - y[i]) * (preds[i] - y[i]);
    }
    mse /= static_cast<double>(n);
    if (mse > prev + 1e-12) {
      detail = "MSE rose at tree " + std::to_string(tree_idx);
      return false;
    }
    prev = mse;
    ++tree_idx;
  }
  detail = "final MSE " + format_double(prev) + " over 100 trees";
  return true;
}

// ---- 7: rMAE arithmetic --------------------------------------------------

bool rmae_spot_check(std::string& detail) {
  const double a = rmae(26.17, 52.50);
  const double b = rmae(29.49, 52.50);
  detail = format_double(a) + " and " + format_double(b);
  return std::abs(a - 0.498) <= 0.001 && std::abs(b - 0.562) <= 0.001;
}

// ---- 9: EVT scoring -------------------------------------------------------

bool evt_scoring(std::string& detail) {
  std::vector<double> actual;
  for (int i = 1; i <= 100; ++i) actual.push_back(i);
  const ExtremeReport rep = evt_extreme_mae(actual, actual, 0.95);
  detail = "threshold " + format_double(rep.threshold) + ", " +
           std::to_string(rep.exceedance_count) + " exceedances";
  if (std::abs(rep.threshold - 95.05) > 1e-9) return false;
  if (rep.exceedance_count != 5) return false;
  // the exceedance set is exactly {96..100}: check 95 is excluded
  std::vector<double> pred = actual;
  pred[94] += 1000.0;  // value 95: below the threshold, must not count
  const ExtremeReport rep2 = evt_extreme_mae(pred, actual, 0.95);
  if (rep2.extreme_mae != 0.0) return false;
  return rep.defined && rep.extreme_mae == 0.0;
}

// ---- 10/11: leakage and determinism on a reduced config -------------------

BacktestSettings reduced_settings() {
  BacktestSettings s;
  s.features.lookback = 48;
  s.features.horizon = 24;
  s.features.price_lags = {1, 2, 3, 4, 5, 6, 12, 24, 48};
  s.features.exog_lags = {1, 24};
  s.kan.hidden = {8};
  s.kan.train.max_steps = 20;
  s.kan.train.patience = 8;
  s.kan.train.adam.learning_rate = 0.01;
  s.gbt.n_estimators = 10;
  s.gbt.max_depth = 3;
  s.n_folds = 2;
  s.fold_len = 24;
  s.seed = 42;
  return s;
}

bool no_leakage(std::string& detail) {
  SynthConfig sc;
  sc.n_hours = 1200;
  sc.seed = 10;
  Dataset ds = generate(sc);
  const BacktestSettings cfg = reduced_settings();
  const BacktestReport base = run_backtest(ds, cfg);

  // perturb each fold's test week in turn; folds at or before the mutation
  // must keep their parameters and selected weight
  for (std::size_t fold = 0; fold < cfg.n_folds; ++fold) {
    const std::size_t test_begin =
        ds.size() - (cfg.n_folds - fold) * cfg.fold_len;
    for (const std::size_t offset : {std::size_t{0}, cfg.fold_len - 1}) {
      std::vector<double> prices(ds.price.values());
      prices[test_begin + offset] += 500.0;
      Dataset mutated = ds;
      mutated.price = TimeSeries(ds.price.start(), prices);
      const BacktestReport moved = run_backtest(mutated, cfg);
      for (std::size_t k = 0; k <= fold; ++k) {
        if (base.folds[k].param_hash != moved.folds[k].param_hash) {
          detail = "parameter hash changed for fold " + std::to_string(k);
          return false;
        }
        if (base.folds[k].alpha != moved.folds[k].alpha) {
          detail = "alpha changed for fold " + std::to_string(k);
          return false;
        }
      }
    }
  }
  detail = "hashes and alphas stable under test-week mutation";
  return true;
}

bool determinism(std::string& detail) {
  SynthConfig sc;
  sc.n_hours = 1200;
  sc.seed = 10;
  const Dataset ds = generate(sc);
  const BacktestSettings cfg = reduced_settings();

  setenv("GRIDCAST_THREADS", "1", 1);
  const std::string m1 = metrics_csv(run_backtest(ds, cfg));
  setenv("GRIDCAST_THREADS", "3", 1);
  const std::string m3 = metrics_csv(run_backtest(ds, cfg));
  unsetenv("GRIDCAST_THREADS");
  const std::string md = metrics_csv(run_backtest(ds, cfg));

  if (m1 != m3) {
    detail = "metrics differ between 1 and 3 workers";
    return false;
  }
  if (m1 != md) {
    detail = "metrics differ between pinned and default workers";
    return false;
  }
  detail = "byte-identical metrics.csv across worker counts";
  return true;
}

// ---- 12: serialization round trip -----------------------------------------

bool serialization_round_trip(std::string& detail) {
  rng::SplitMix64 gen(1212);

  SplineGrid grid(0.0, 1.0, 3, 3);
  KanNetwork net({6, 8, 4}, grid, 99);
  const KanNetwork net2 = kan_from_json(to_json(net));

  Matrix x(120, 6);
  for (auto& v : x.data) v = gen.next_double();
  std::vector<double> y(120);
  for (std::size_t i = 0; i < 120; ++i) {
    y[i] = x(i, 0) * 2 - x(i, 3) + 0.1 * gen.next_gaussian();
  }
  GbtConfig cfg;
  cfg.n_estimators = 20;
  cfg.max_depth = 4;
  cfg.seed = 12;
  const Booster booster = fit(x, y, cfg);
  const Booster booster2 = booster_from_json(to_json(booster));

  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> probe(6);
    for (auto& v : probe) v = -0.4 + 1.8 * gen.next_double();
    const std::vector<double> a = net.forward(probe);
    const std::vector<double> b = net2.forward(probe);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] != b[i]) {
        detail = "kan prediction differs after reload";
        return false;
      }
    }
    if (booster.predict(probe) != booster2.predict(probe)) {
      detail = "booster prediction differs after reload";
      return false;
    }
  }
  detail = "bit-exact on 1000 random inputs";
  return true;
}

}  // namespace

int main() {
  Harness h;
  std::string detail;

  detail.clear();
  h.check(1, "spline partition of unity (1e-9, G 1..5, k 0..3, < 1 s)",
          partition_of_unity(detail), detail);

  detail.clear();
  h.check(2, "backprop matches central differences (1e-4 rel, < 30 s)",
          gradient_fidelity(detail), detail);

  detail.clear();
  h.check(3, "exact-greedy splits match exhaustive search (1e-12, < 10 s)",
          boosting_oracle(detail), detail);

  detail.clear();
  h.check(4, "training MSE non-increasing over 100 trees",
          boosting_monotonicity(detail), detail);

  detail.clear();
  h.check(7, "rMAE arithmetic reproduces reported ratios",
          rmae_spot_check(detail), detail);

  detail.clear();
  h.check(9, "EVT threshold 95.05 with exceedances {96..100}",
          evt_scoring(detail), detail);

  detail.clear();
  h.check(10, "test-week mutations change no parameters or weights",
          no_leakage(detail), detail);

  detail.clear();
  h.check(11, "byte-identical metrics across worker counts",
          determinism(detail), detail);

  detail.clear();
  h.check(12, "model save/load reproduces predictions bit-exactly",
          serialization_round_trip(detail), detail);

  // ---- the pinned synthetic end-to-end benchmark (criteria 5, 6, 8) ----
  {
    SynthConfig sc;  // pinned defaults: 8760 hours, seed 42
    const Dataset ds = generate(sc);
    BacktestSettings cfg;  // spec defaults
    cfg.gbt.n_estimators = 50;
    cfg.seed = 42;

    const auto t0 = clk::now();
    const BacktestReport rep = run_backtest(ds, cfg);
    const double wall = seconds_since(t0);

    bool dominance = true;
    std::string dom_detail;
    for (const auto& fold : rep.folds) {
      const double hybrid = fold.val_mae.at("hybrid");
      if (hybrid > fold.val_mae.at("kan") || hybrid > fold.val_mae.at("gbt")) {
        dominance = false;
        dom_detail = "violated in fold " + std::to_string(fold.fold);
      }
    }
    if (dominance) {
      dom_detail = "holds in all " + std::to_string(rep.folds.size()) +
                   " folds";
    }
    h.check(5, "hybrid validation MAE dominates both components", dominance,
            dom_detail);

    const double naive_rmae = rep.pooled.at("naive").rmae;
    h.check(6, "pooled naive rMAE is exactly 1.0", naive_rmae == 1.0,
            format_double(naive_rmae));

    const double hybrid_mae = rep.pooled.at("hybrid").mae;
    const double min_component =
        std::min(rep.pooled.at("kan").mae, rep.pooled.at("gbt").mae);
    const bool quality = hybrid_mae <= 1.05 * min_component;
    const bool fast = wall < 600.0;
    h.check(8,
            "pinned synthetic benchmark: < 10 min and hybrid within 1.05x "
            "of the best component",
            quality && fast,
            "wall " + format_double(wall) + " s, hybrid " +
                format_double(hybrid_mae) + ", best component " +
                format_double(min_component) + " (kan " +
                format_double(rep.pooled.at("kan").mae) + ", gbt " +
                format_double(rep.pooled.at("gbt").mae) + ")");
  }

  if (h.failures > 0) {
    std::printf("%d criterion(s) failed\n", h.failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
