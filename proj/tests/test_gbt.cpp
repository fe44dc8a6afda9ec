#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include "gridcast/gbt.hpp"
#include "gridcast/serialize.hpp"

using namespace gridcast;

namespace {

// Exhaustive-search oracle: enumerates every (feature, midpoint threshold)
// pair over the rows of a node, with the same tie rules as the builder
// (lowest feature, then lowest threshold). Left sums accumulate in sorted
// (value, row) order so that exactly tied gains compare identically.
struct OracleSplit {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

OracleSplit oracle_best_split(const Matrix& x,
                              const std::vector<std::size_t>& rows,
                              std::span<const double> g,
                              std::span<const double> h, const GbtConfig& cfg,
                              const std::vector<int>& feats) {
  OracleSplit best;
  for (int f : feats) {
    std::vector<std::size_t> order = rows;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double va = x(a, static_cast<std::size_t>(f));
      const double vb = x(b, static_cast<std::size_t>(f));
      return va < vb || (va == vb && a < b);
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
      const double lo = x(order[i], static_cast<std::size_t>(f));
      const double hi = x(order[i + 1], static_cast<std::size_t>(f));
      if (hi <= lo) continue;
      const double thr = 0.5 * (lo + hi);
      const double hr = htot - hl;
      if (hl < cfg.min_child_weight || hr < cfg.min_child_weight) continue;
      const double gain =
          split_gain(gl, hl, gtot - gl, hr, cfg.lambda, cfg.gamma);
      if (gain > best.gain) {
        best = {true, f, thr, gain};
      }
    }
  }
  if (best.gain <= 0.0) best.found = false;
  return best;
}

void oracle_check_node(const RegressionTree& tree, int node, const Matrix& x,
                       std::vector<std::size_t> rows,
                       std::span<const double> g, std::span<const double> h,
                       const GbtConfig& cfg, const std::vector<int>& feats,
                       int depth) {
  const TreeNode& tn = tree.nodes[static_cast<std::size_t>(node)];
  double gsum = 0, hsum = 0;
  for (std::size_t r : rows) {
    gsum += g[r];
    hsum += h[r];
  }
  const OracleSplit best =
      depth < cfg.max_depth
          ? oracle_best_split(x, rows, g, h, cfg, feats)
          : OracleSplit{};
  if (!best.found) {
    REQUIRE(tn.is_leaf());
    REQUIRE_THAT(tn.weight,
                 Catch::Matchers::WithinAbs(-gsum / (hsum + cfg.lambda),
                                            1e-12));
    return;
  }
  REQUIRE_FALSE(tn.is_leaf());
  REQUIRE(tn.feature == best.feature);
  REQUIRE_THAT(tn.threshold, Catch::Matchers::WithinAbs(best.threshold, 0.0));
  std::vector<std::size_t> left, right;
  for (std::size_t r : rows) {
    (x(r, static_cast<std::size_t>(tn.feature)) < tn.threshold ? left : right)
        .push_back(r);
  }
  oracle_check_node(tree, tn.left, x, left, g, h, cfg, feats, depth + 1);
  oracle_check_node(tree, tn.right, x, right, g, h, cfg, feats, depth + 1);
}

}  // namespace

TEST_CASE("grad_hess implements the squared-error convention", "[gbt]") {
  std::vector<double> g, h;
  grad_hess(std::vector<double>{3.0}, std::vector<double>{1.0}, g, h);
  CHECK(g[0] == 2.0);
  CHECK(h[0] == 1.0);

  std::vector<double> y = {1.0, 2.0, 3.0};
  grad_hess(y, y, g, h);
  for (double v : g) CHECK(v == 0.0);

  rng::SplitMix64 gen(5);
  std::vector<double> pred(10), target(10);
  for (auto& v : pred) v = gen.next_gaussian();
  for (auto& v : target) v = gen.next_gaussian();
  grad_hess(pred, target, g, h);
  for (std::size_t i = 0; i < 10; ++i) {
    REQUIRE(g[i] == pred[i] - target[i]);
    REQUIRE(h[i] == 1.0);
  }
  CHECK_THROWS_AS(grad_hess(pred, std::vector<double>{1.0}, g, h),
                  ComputeError);
}

TEST_CASE("split_gain formula and symmetry", "[gbt]") {
  CHECK(split_gain(0, 1, 0, 1, 0.5, 0.3) == -0.3);
  // GL=-GR=2, HL=HR=1, lambda=0, gamma=0 -> 0.5*(4+4-0) = 4
  CHECK_THAT(split_gain(2, 1, -2, 1, 0, 0),
             Catch::Matchers::WithinAbs(4.0, 1e-14));
  rng::SplitMix64 gen(7);
  for (int i = 0; i < 20; ++i) {
    const double gl = gen.next_gaussian(), gr = gen.next_gaussian();
    const double hl = 1 + gen.next_double(), hr = 1 + gen.next_double();
    REQUIRE(split_gain(gl, hl, gr, hr, 0.7, 0.1) ==
            split_gain(gr, hr, gl, hl, 0.7, 0.1));
  }
}

TEST_CASE("homogeneous gradients give a single leaf", "[gbt]") {
  Matrix x(4, 1);
  x.data = {1.0, 2.0, 3.0, 4.0};
  std::vector<double> g(4, 0.75), h(4, 1.0);
  GbtConfig cfg;
  cfg.lambda = 0.0;
  const RegressionTree t = build_tree(x, g, h, cfg, {0});
  REQUIRE(t.nodes.size() == 1);
  CHECK_THAT(t.nodes[0].weight, Catch::Matchers::WithinAbs(-0.75, 1e-14));
}

TEST_CASE("hand-checked split on the 4-point step dataset", "[gbt]") {
  Matrix x(4, 1);
  x.data = {1.0, 2.0, 3.0, 4.0};
  // y = {0,0,1,1} with pred = 0 gives g = {0,0,-1,-1}
  std::vector<double> g = {0.0, 0.0, -1.0, -1.0}, h(4, 1.0);
  GbtConfig cfg;
  cfg.lambda = 0.0;
  cfg.max_depth = 1;
  const RegressionTree t = build_tree(x, g, h, cfg, {0});
  REQUIRE(t.nodes.size() == 3);
  CHECK(t.nodes[0].feature == 0);
  CHECK(t.nodes[0].threshold == 2.5);
  CHECK(t.predict(std::vector<double>{1.0}) == 0.0);
  CHECK(t.predict(std::vector<double>{4.0}) == 1.0);
  CHECK(t.depth() == 1);
}

TEST_CASE("build_tree matches the exhaustive oracle on small data", "[gbt]") {
  rng::SplitMix64 gen(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + gen.next_below(5);   // up to 6 rows
    const std::size_t d = 1 + gen.next_below(2);   // up to 2 features
    Matrix x(n, d);
    for (auto& v : x.data) {
      // small integer grid provokes ties and duplicate values
      v = static_cast<double>(gen.next_below(4));
    }
    std::vector<double> g(n), h(n, 1.0);
    for (auto& v : g) v = gen.next_gaussian();

    GbtConfig cfg;
    cfg.max_depth = 2 + static_cast<int>(gen.next_below(3));
    cfg.lambda = (trial % 3 == 0) ? 0.0 : 1.0;
    cfg.gamma = (trial % 5 == 0) ? 0.2 : 0.0;
    std::vector<int> feats;
    for (std::size_t f = 0; f < d; ++f) feats.push_back(static_cast<int>(f));

    const RegressionTree tree = build_tree(x, g, h, cfg, feats);
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    oracle_check_node(tree, 0, x, rows, g, h, cfg, feats, 0);
  }
}

TEST_CASE("empty booster predicts the target mean", "[gbt]") {
  Matrix x(4, 1);
  x.data = {1, 2, 3, 4};
  std::vector<double> y = {1.0, 2.0, 3.0, 6.0};
  GbtConfig cfg;
  cfg.n_estimators = 0;
  const Booster b = fit(x, y, cfg);
  CHECK(b.predict(std::vector<double>{2.5}) == 3.0);
}

TEST_CASE("single-tree booster matches hand-rolled boosting", "[gbt]") {
  Matrix x(4, 1);
  x.data = {1.0, 2.0, 3.0, 4.0};
  std::vector<double> y = {0.0, 0.0, 1.0, 1.0};
  GbtConfig cfg;
  cfg.n_estimators = 1;
  cfg.max_depth = 1;
  cfg.subsample = 1.0;
  cfg.colsample = 1.0;
  cfg.lambda = 0.0;
  cfg.learning_rate = 0.5;
  const Booster b = fit(x, y, cfg);
  // base 0.5; g = {.5,.5,-.5,-.5}; split at 2.5; leaves -0.5 and +0.5;
  // prediction = 0.5 + 0.5 * leaf
  CHECK_THAT(b.predict(std::vector<double>{1.0}),
             Catch::Matchers::WithinAbs(0.25, 1e-14));
  CHECK_THAT(b.predict(std::vector<double>{4.0}),
             Catch::Matchers::WithinAbs(0.75, 1e-14));
}

TEST_CASE("training MSE is non-increasing without subsampling", "[gbt]") {
  rng::SplitMix64 gen(13);
  const std::size_t n = 100, d = 5;
  Matrix x(n, d);
  for (auto& v : x.data) v = gen.next_double();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = 2.0 * x(i, 0) - x(i, 1) * x(i, 2) + 0.2 * gen.next_gaussian();
  }
  GbtConfig cfg;
  cfg.n_estimators = 60;
  cfg.subsample = 1.0;
  cfg.colsample = 1.0;
  cfg.seed = 13;
  const Booster b = fit(x, y, cfg);

  // replay predictions tree by tree
  std::vector<double> preds(n, b.base_score);
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& tree : b.trees) {
    for (std::size_t i = 0; i < n; ++i) {
      preds[i] += b.learning_rate * tree.predict(x.row(i));
    }
    double mse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mse += (preds[i] - y[i]) * (preds[i] - y[i]);
    }
    mse /= static_cast<double>(n);
    REQUIRE(mse <= prev + 1e-12);
    prev = mse;
  }
}

TEST_CASE("leaf weights equal -G/(H+lambda) over routed rows", "[gbt]") {
  rng::SplitMix64 gen(17);
  const std::size_t n = 40;
  Matrix x(n, 3);
  for (auto& v : x.data) v = gen.next_double();
  std::vector<double> g(n), h(n);
  for (auto& v : g) v = gen.next_gaussian();
  for (auto& v : h) v = 0.5 + gen.next_double();
  GbtConfig cfg;
  cfg.max_depth = 3;
  cfg.lambda = 1.3;
  cfg.min_child_weight = 0.0;
  const RegressionTree tree = build_tree(x, g, h, cfg, {0, 1, 2});

  // accumulate G/H per leaf by walking each row down
  std::map<int, std::pair<double, double>> sums;
  for (std::size_t r = 0; r < n; ++r) {
    int node = 0;
    while (!tree.nodes[static_cast<std::size_t>(node)].is_leaf()) {
      const TreeNode& tn = tree.nodes[static_cast<std::size_t>(node)];
      node = x(r, static_cast<std::size_t>(tn.feature)) < tn.threshold
                 ? tn.left
                 : tn.right;
    }
    sums[node].first += g[r];
    sums[node].second += h[r];
  }
  for (const auto& [node, gh] : sums) {
    REQUIRE_THAT(tree.nodes[static_cast<std::size_t>(node)].weight,
                 Catch::Matchers::WithinAbs(
                     -gh.first / (gh.second + cfg.lambda), 1e-12));
  }
}

TEST_CASE("routing is insensitive to within-region perturbations", "[gbt]") {
  rng::SplitMix64 gen(19);
  Matrix x(30, 2);
  for (auto& v : x.data) v = gen.next_double() * 10.0;
  std::vector<double> y(30);
  for (std::size_t i = 0; i < 30; ++i) y[i] = x(i, 0) > 5.0 ? 1.0 : 0.0;
  GbtConfig cfg;
  cfg.n_estimators = 5;
  cfg.subsample = 1.0;
  cfg.colsample = 1.0;
  const Booster b = fit(x, y, cfg);

  // collect all thresholds per feature
  std::vector<std::vector<double>> thr(2);
  for (const auto& tree : b.trees) {
    for (const auto& n : tree.nodes) {
      if (!n.is_leaf()) thr[static_cast<std::size_t>(n.feature)].push_back(n.threshold);
    }
  }
  std::vector<double> probe = {3.0, 7.0};
  const double before = b.predict(probe);
  // nudge each coordinate without crossing any threshold
  for (std::size_t f = 0; f < 2; ++f) {
    double gap = 1e9;
    for (double t : thr[f]) gap = std::min(gap, std::abs(probe[f] - t));
    std::vector<double> moved = probe;
    moved[f] += 0.49 * gap;
    CHECK(b.predict(moved) == before);
    moved[f] = probe[f] - 0.49 * gap;
    CHECK(b.predict(moved) == before);
  }
}

TEST_CASE("identical seeds give identical boosters", "[gbt]") {
  rng::SplitMix64 gen(23);
  Matrix x(60, 4);
  for (auto& v : x.data) v = gen.next_double();
  std::vector<double> y(60);
  for (auto& v : y) v = gen.next_gaussian();
  GbtConfig cfg;
  cfg.n_estimators = 12;
  cfg.seed = 555;
  const Booster a = fit(x, y, cfg);
  const Booster b = fit(x, y, cfg);
  CHECK(to_json(a).dump() == to_json(b).dump());

  GbtConfig other = cfg;
  other.seed = 556;
  const Booster c = fit(x, y, other);
  CHECK(to_json(a).dump() != to_json(c).dump());
}

TEST_CASE("identical rows with differing targets yield the mean", "[gbt]") {
  Matrix x(4, 2);
  for (auto& v : x.data) v = 3.0;
  std::vector<double> y = {1.0, 2.0, 3.0, 6.0};
  GbtConfig cfg;
  cfg.n_estimators = 10;
  cfg.subsample = 1.0;
  cfg.colsample = 1.0;
  const Booster b = fit(x, y, cfg);
  CHECK_THAT(b.predict(std::vector<double>{3.0, 3.0}),
             Catch::Matchers::WithinAbs(3.0, 1e-12));
}

TEST_CASE("multi booster stacks per-step boosters", "[gbt]") {
  rng::SplitMix64 gen(29);
  Matrix x(50, 3);
  for (auto& v : x.data) v = gen.next_double();
  Matrix y(50, 4);
  for (auto& v : y.data) v = gen.next_gaussian();
  GbtConfig cfg;
  cfg.n_estimators = 6;
  cfg.seed = 77;
  const MultiBooster mb = fit_multi(x, y, cfg);
  REQUIRE(mb.horizon() == 4);
  const std::vector<double> row(3, 0.4);
  const std::vector<double> out = mb.predict_multi(row);
  for (std::size_t hcol = 0; hcol < 4; ++hcol) {
    REQUIRE(out[hcol] == mb.boosters[hcol].predict(row));
  }
}

TEST_CASE("booster serialization round-trips bit-exactly", "[gbt]") {
  rng::SplitMix64 gen(31);
  Matrix x(80, 5);
  for (auto& v : x.data) v = gen.next_double();
  std::vector<double> y(80);
  for (auto& v : y) v = gen.next_gaussian();
  GbtConfig cfg;
  cfg.n_estimators = 15;
  cfg.seed = 3;
  const Booster b = fit(x, y, cfg);
  const Booster back = booster_from_json(to_json(b));
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> probe(5);
    for (auto& v : probe) v = -0.5 + 2.0 * gen.next_double();
    REQUIRE(b.predict(probe) == back.predict(probe));
  }
}

TEST_CASE("prediction dimension checks", "[gbt]") {
  Matrix x(4, 2);
  x.data = {1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<double> y = {1, 2, 3, 4};
  GbtConfig cfg;
  cfg.n_estimators = 1;
  const Booster b = fit(x, y, cfg);
  CHECK_THROWS_AS(b.predict(std::vector<double>{1.0}), ComputeError);
  CHECK_THROWS_AS(fit(Matrix(1, 2), std::vector<double>{1.0}, cfg),
                  ComputeError);
  GbtConfig bad;
  bad.subsample = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}
