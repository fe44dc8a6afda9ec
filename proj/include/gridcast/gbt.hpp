#ifndef GRIDCAST_GBT_HPP
#define GRIDCAST_GBT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "gridcast/common.hpp"
#include "gridcast/transform.hpp"

namespace gridcast {

struct GbtConfig {
  int n_estimators = 500;
  int max_depth = 6;
  double learning_rate = 0.05;
  double subsample = 0.8;
  double colsample = 0.8;
  double lambda = 1.0;  // L2 leaf penalty
  double gamma = 0.0;   // split penalty
  double min_child_weight = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_estimators < 0) throw ConfigError("gbt: n_estimators must be >= 0");
    if (max_depth < 1) throw ConfigError("gbt: max_depth must be >= 1");
    if (!(learning_rate > 0.0)) {
      throw ConfigError("gbt: learning_rate must be > 0");
    }
    if (!(subsample > 0.0) || subsample > 1.0) {
      throw ConfigError("gbt: subsample must be in (0, 1]");
    }
    if (!(colsample > 0.0) || colsample > 1.0) {
      throw ConfigError("gbt: colsample must be in (0, 1]");
    }
    if (lambda < 0.0) throw ConfigError("gbt: lambda must be >= 0");
    if (gamma < 0.0) throw ConfigError("gbt: gamma must be >= 0");
    if (min_child_weight < 0.0) {
      throw ConfigError("gbt: min_child_weight must be >= 0");
    }
  }
};

// Squared-error objective: g = pred - y, h = 1 (global 1/2 absorbed).
inline void grad_hess(std::span<const double> pred, std::span<const double> y,
                      std::vector<double>& g, std::vector<double>& h) {
  if (pred.size() != y.size()) throw ComputeError("grad_hess: length mismatch");
  g.resize(pred.size());
  h.assign(pred.size(), 1.0);
  for (std::size_t i = 0; i < pred.size(); ++i) g[i] = pred[i] - y[i];
}

inline double split_gain(double gl, double hl, double gr, double hr,
                         double lambda, double gamma) {
  const double total = gl + gr;
  return 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) -
                total * total / (hl + hr + lambda)) -
         gamma;
}

struct TreeNode {
  int feature = -1;  // < 0 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double weight = 0.0;

  bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> row) const {
    int i = 0;
    while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
      const TreeNode& n = nodes[static_cast<std::size_t>(i)];
      i = row[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left
                                                                 : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].weight;
  }

  int depth() const {
    if (nodes.empty()) return 0;
    return depth_from(0);
  }

 private:
  int depth_from(int i) const {
    const TreeNode& n = nodes[static_cast<std::size_t>(i)];
    if (n.is_leaf()) return 0;
    return 1 + std::max(depth_from(n.left), depth_from(n.right));
  }
};

// Per-feature row order sorted by (value, row index); shared by every tree
// trained on the same matrix, read-only afterwards.
struct SortedFeatures {
  std::vector<std::vector<std::int32_t>> order;
  std::vector<std::vector<double>> values;

  static SortedFeatures build(const Matrix& x) {
    SortedFeatures sf;
    sf.order.resize(x.cols);
    sf.values.resize(x.cols);
    for (std::size_t f = 0; f < x.cols; ++f) {
      auto& ord = sf.order[f];
      ord.resize(x.rows);
      std::iota(ord.begin(), ord.end(), 0);
      std::sort(ord.begin(), ord.end(), [&](std::int32_t a, std::int32_t b) {
        const double va = x(static_cast<std::size_t>(a), f);
        const double vb = x(static_cast<std::size_t>(b), f);
        return va < vb || (va == vb && a < b);
      });
      auto& vals = sf.values[f];
      vals.resize(x.rows);
      for (std::size_t j = 0; j < x.rows; ++j) {
        vals[j] = x(static_cast<std::size_t>(ord[j]), f);
      }
    }
    return sf;
  }
};

namespace detail {

struct NodeStats {
  double g = 0.0;
  double h = 0.0;
};

struct SplitCandidate {
  double gain = 0.0;  // must end strictly positive to split
  int feature = -1;
  double threshold = 0.0;
};

struct ScanState {
  double gl = 0.0;
  double hl = 0.0;
  double last_val = 0.0;
  std::int64_t count = 0;
};

// Exact greedy splitting, one level at a time: a single ordered pass per
// feature accumulates left-side sums for every frontier node at once.
// Candidate thresholds are midpoints between adjacent distinct values of
// the rows routed to a node; ties in gain keep the lowest feature index,
// then the lowest threshold (scan order guarantees both).
inline RegressionTree build_tree_presorted(
    const Matrix& x, std::span<const double> g, std::span<const double> h,
    const GbtConfig& cfg, const std::vector<int>& active_features,
    const SortedFeatures& sf, const std::vector<std::int32_t>& sample_rows) {
  const std::size_t n = x.rows;
  RegressionTree tree;
  std::vector<std::int32_t> pos(n, -1);
  std::vector<NodeStats> stats;

  NodeStats root{};
  for (std::int32_t r : sample_rows) {
    pos[static_cast<std::size_t>(r)] = 0;
    root.g += g[static_cast<std::size_t>(r)];
    root.h += h[static_cast<std::size_t>(r)];
  }
  tree.nodes.push_back({});
  stats.push_back(root);

  std::vector<std::int32_t> frontier = {0};
  std::vector<std::int32_t> slot_of;  // node id -> frontier slot
  std::vector<SplitCandidate> best;
  std::vector<ScanState> scan;

  for (int depth = 0; depth < cfg.max_depth && !frontier.empty(); ++depth) {
    const std::size_t n_slots = frontier.size();
    slot_of.assign(tree.nodes.size(), -1);
    for (std::size_t s = 0; s < n_slots; ++s) {
      slot_of[static_cast<std::size_t>(frontier[s])] =
          static_cast<std::int32_t>(s);
    }
    best.assign(n_slots, {});

    for (const int f : active_features) {
      scan.assign(n_slots, {});
      const std::int32_t* ord = sf.order[static_cast<std::size_t>(f)].data();
      const double* vals = sf.values[static_cast<std::size_t>(f)].data();
      for (std::size_t j = 0; j < n; ++j) {
        const std::int32_t r = ord[j];
        const std::int32_t node = pos[static_cast<std::size_t>(r)];
        if (node < 0) continue;
        const std::int32_t s = slot_of[static_cast<std::size_t>(node)];
        if (s < 0) continue;
        ScanState& st = scan[static_cast<std::size_t>(s)];
        const double v = vals[j];
        if (st.count > 0 && v > st.last_val) {
          const NodeStats& tot = stats[static_cast<std::size_t>(node)];
          const double hr = tot.h - st.hl;
          if (st.hl >= cfg.min_child_weight && hr >= cfg.min_child_weight) {
            const double gain = split_gain(st.gl, st.hl, tot.g - st.gl, hr,
                                           cfg.lambda, cfg.gamma);
            SplitCandidate& b = best[static_cast<std::size_t>(s)];
            if (gain > b.gain) {
              b.gain = gain;
              b.feature = f;
              b.threshold = 0.5 * (st.last_val + v);
            }
          }
        }
        st.gl += g[static_cast<std::size_t>(r)];
        st.hl += h[static_cast<std::size_t>(r)];
        st.last_val = v;
        st.count += 1;
      }
    }

    std::vector<std::int32_t> next_frontier;
    for (std::size_t s = 0; s < n_slots; ++s) {
      const std::int32_t node = frontier[s];
      const SplitCandidate& b = best[s];
      if (b.gain > 0.0 && b.feature >= 0) {
        const int left = static_cast<int>(tree.nodes.size());
        const int right = left + 1;
        {
          // scoped: the push_backs below may reallocate the node storage
          TreeNode& tn = tree.nodes[static_cast<std::size_t>(node)];
          tn.feature = b.feature;
          tn.threshold = b.threshold;
          tn.left = left;
          tn.right = right;
        }
        tree.nodes.push_back({});
        tree.nodes.push_back({});
        stats.push_back({});
        stats.push_back({});
        next_frontier.push_back(left);
        next_frontier.push_back(right);
      } else {
        const NodeStats& tot = stats[static_cast<std::size_t>(node)];
        tree.nodes[static_cast<std::size_t>(node)].weight =
            -tot.g / (tot.h + cfg.lambda);
      }
    }

    if (!next_frontier.empty()) {
      for (std::size_t r = 0; r < n; ++r) {
        const std::int32_t node = pos[r];
        if (node < 0) continue;
        const TreeNode& tn = tree.nodes[static_cast<std::size_t>(node)];
        if (tn.is_leaf()) continue;  // settled as a leaf this level
        const std::int32_t child =
            x(r, static_cast<std::size_t>(tn.feature)) < tn.threshold
                ? tn.left
                : tn.right;
        pos[r] = child;
        stats[static_cast<std::size_t>(child)].g += g[r];
        stats[static_cast<std::size_t>(child)].h += h[r];
      }
    }
    frontier = std::move(next_frontier);
  }

  // depth cap reached: remaining frontier nodes become leaves
  for (std::int32_t node : frontier) {
    TreeNode& tn = tree.nodes[static_cast<std::size_t>(node)];
    const NodeStats& tot = stats[static_cast<std::size_t>(node)];
    tn.weight = -tot.g / (tot.h + cfg.lambda);
  }
  return tree;
}

}  // namespace detail

// Self-contained exact-greedy tree over the given rows.
inline RegressionTree build_tree(const Matrix& rows, std::span<const double> g,
                                 std::span<const double> h,
                                 const GbtConfig& cfg,
                                 const std::vector<int>& active_features) {
  cfg.validate();
  if (rows.rows == 0) throw ComputeError("build_tree: empty row set");
  if (g.size() != rows.rows || h.size() != rows.rows) {
    throw ComputeError("build_tree: gradient length mismatch");
  }
  std::vector<int> feats = active_features;
  std::sort(feats.begin(), feats.end());
  const SortedFeatures sf = SortedFeatures::build(rows);
  std::vector<std::int32_t> all(rows.rows);
  std::iota(all.begin(), all.end(), 0);
  return detail::build_tree_presorted(rows, g, h, cfg, feats, sf, all);
}

// Additive tree ensemble: prediction = base_score + lr * sum(tree outputs).
struct Booster {
  double base_score = 0.0;
  double learning_rate = 0.05;
  std::size_t n_features = 0;
  std::vector<RegressionTree> trees;

  double predict(std::span<const double> row) const {
    if (row.size() != n_features) {
      throw ComputeError("booster predict: feature dimension mismatch (" +
                         std::to_string(row.size()) + " vs " +
                         std::to_string(n_features) + ")");
    }
    double acc = 0.0;
    for (const auto& t : trees) acc += t.predict(row);
    return base_score + learning_rate * acc;
  }
};

namespace detail {

inline std::vector<std::int32_t> draw_subsample(std::size_t n, double rate,
                                                rng::SplitMix64& gen,
                                                std::vector<std::int32_t>& buf) {
  if (rate >= 1.0) {
    std::vector<std::int32_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    return all;
  }
  const std::size_t m = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(rate * static_cast<double>(n))));
  buf.resize(n);
  std::iota(buf.begin(), buf.end(), 0);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + gen.next_below(n - i);
    std::swap(buf[i], buf[j]);
  }
  std::vector<std::int32_t> picked(buf.begin(),
                                   buf.begin() + static_cast<std::ptrdiff_t>(m));
  std::sort(picked.begin(), picked.end());
  return picked;
}

}  // namespace detail

// Trains one booster. Row and column subsamples are drawn per tree
// (rows first, then columns) from a seed-derived stream, so results are
// reproducible and independent of call order.
inline Booster fit(const Matrix& x, std::span<const double> y,
                   const GbtConfig& cfg,
                   const SortedFeatures* presorted = nullptr) {
  cfg.validate();
  if (x.rows < 2) throw ComputeError("gbt fit: need at least 2 rows");
  if (y.size() != x.rows) throw ComputeError("gbt fit: target length mismatch");

  Booster booster;
  booster.learning_rate = cfg.learning_rate;
  booster.n_features = x.cols;
  booster.base_score =
      std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());

  SortedFeatures local;
  if (presorted == nullptr) {
    local = SortedFeatures::build(x);
    presorted = &local;
  }

  std::vector<double> preds(x.rows, booster.base_score);
  std::vector<double> g, h;
  std::vector<std::int32_t> row_buf, col_buf;
  rng::SplitMix64 gen(rng::derive_seed(cfg.seed, 0x474254 /* booster */));

  booster.trees.reserve(static_cast<std::size_t>(cfg.n_estimators));
  for (int m = 0; m < cfg.n_estimators; ++m) {
    grad_hess(preds, y, g, h);
    const std::vector<std::int32_t> rows =
        detail::draw_subsample(x.rows, cfg.subsample, gen, row_buf);
    const std::vector<std::int32_t> cols_raw =
        detail::draw_subsample(x.cols, cfg.colsample, gen, col_buf);
    std::vector<int> feats(cols_raw.begin(), cols_raw.end());

    RegressionTree tree =
        detail::build_tree_presorted(x, g, h, cfg, feats, *presorted, rows);
    for (std::size_t r = 0; r < x.rows; ++r) {
      preds[r] += cfg.learning_rate * tree.predict(x.row(r));
    }
    booster.trees.push_back(std::move(tree));
  }
  return booster;
}

// H independent boosters, one per horizon step, trained on the same
// feature rows. Boosters are independent given their derived seeds, so
// per-step training may run on any worker without affecting results.
struct MultiBooster {
  std::vector<Booster> boosters;

  std::size_t horizon() const { return boosters.size(); }

  std::vector<double> predict_multi(std::span<const double> row) const {
    std::vector<double> out(boosters.size());
    for (std::size_t i = 0; i < boosters.size(); ++i) {
      out[i] = boosters[i].predict(row);
    }
    return out;
  }
};

inline MultiBooster fit_multi(const Matrix& x, const Matrix& y,
                              const GbtConfig& cfg) {
  cfg.validate();
  if (y.rows != x.rows) throw ComputeError("gbt fit_multi: row mismatch");
  if (y.cols == 0) throw ComputeError("gbt fit_multi: empty horizon");

  const SortedFeatures sf = SortedFeatures::build(x);
  MultiBooster mb;
  mb.boosters.resize(y.cols);
  parallel_for_blocks(y.cols, 1, [&](std::size_t, std::size_t begin,
                                     std::size_t end) {
    std::vector<double> target(x.rows);
    for (std::size_t hcol = begin; hcol < end; ++hcol) {
      for (std::size_t r = 0; r < x.rows; ++r) target[r] = y(r, hcol);
      GbtConfig step_cfg = cfg;
      step_cfg.seed = rng::derive_seed(cfg.seed, 0x686f72 + hcol);
      mb.boosters[hcol] = fit(x, target, step_cfg, &sf);
    }
  });
  return mb;
}

}  // namespace gridcast

#endif  // GRIDCAST_GBT_HPP
