#ifndef GRIDCAST_KAN_HPP
#define GRIDCAST_KAN_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "gridcast/bspline.hpp"
#include "gridcast/common.hpp"
#include "gridcast/transform.hpp"

namespace gridcast {

inline double silu(double x) { return x / (1.0 + std::exp(-x)); }

inline double silu_grad(double x) {
  const double s = 1.0 / (1.0 + std::exp(-x));
  return s * (1.0 + x * (1.0 - s));
}

// One learnable edge function: a residual silu term plus a spline in the
// shared grid's basis.
struct KanEdge {
  std::vector<double> spline_coeffs;  // basis_count() entries
  double w_spline = 1.0;
  double w_base = 1.0;
};

inline double edge_eval(const KanEdge& e, double x, const SplineGrid& g) {
  if (static_cast<int>(e.spline_coeffs.size()) != g.basis_count()) {
    throw ComputeError("edge_eval: coefficient count mismatch");
  }
  const BasisWindow w = basis_window(g, x);
  double spline = 0.0;
  for (int i = 0; i <= g.order; ++i) {
    spline += w.value[static_cast<std::size_t>(i)] *
              e.spline_coeffs[static_cast<std::size_t>(w.first + i)];
  }
  return e.w_base * silu(x) + e.w_spline * spline;
}

// A layer of out_dim x in_dim edges. Node q outputs the plain sum of its
// incoming edge values. Storage is packed for contiguous output-dim loops:
// coef[(p * C + i) * Q + q], w_spline[p * Q + q], w_base[p * Q + q].
class KanLayer {
 public:
  KanLayer() = default;
  KanLayer(std::size_t in_dim, std::size_t out_dim, int coeff_count)
      : coef(in_dim * static_cast<std::size_t>(coeff_count) * out_dim, 0.0),
        w_spline(in_dim * out_dim, 1.0),
        w_base(in_dim * out_dim, 1.0),
        in_(in_dim),
        out_(out_dim),
        c_(static_cast<std::size_t>(coeff_count)) {}

  std::size_t in_dim() const { return in_; }
  std::size_t out_dim() const { return out_; }
  std::size_t coeff_count() const { return c_; }

  KanEdge get_edge(std::size_t q, std::size_t p) const {
    check_qp(q, p);
    KanEdge e;
    e.spline_coeffs.resize(c_);
    for (std::size_t i = 0; i < c_; ++i) {
      e.spline_coeffs[i] = coef[(p * c_ + i) * out_ + q];
    }
    e.w_spline = w_spline[p * out_ + q];
    e.w_base = w_base[p * out_ + q];
    return e;
  }

  void set_edge(std::size_t q, std::size_t p, const KanEdge& e) {
    check_qp(q, p);
    if (e.spline_coeffs.size() != c_) {
      throw ComputeError("set_edge: coefficient count mismatch");
    }
    for (std::size_t i = 0; i < c_; ++i) {
      coef[(p * c_ + i) * out_ + q] = e.spline_coeffs[i];
    }
    w_spline[p * out_ + q] = e.w_spline;
    w_base[p * out_ + q] = e.w_base;
  }

  std::vector<double> coef;
  std::vector<double> w_spline;
  std::vector<double> w_base;

 private:
  void check_qp(std::size_t q, std::size_t p) const {
    if (q >= out_ || p >= in_) throw ComputeError("edge index out of range");
  }

  std::size_t in_ = 0;
  std::size_t out_ = 0;
  std::size_t c_ = 0;
};

// Parameter gradients in the same packed layout as the layers.
struct KanGradients {
  struct LayerGrads {
    std::vector<double> coef;
    std::vector<double> w_spline;
    std::vector<double> w_base;
  };
  std::vector<LayerGrads> layers;

  void accumulate(const KanGradients& other) {
    for (std::size_t l = 0; l < layers.size(); ++l) {
      auto& a = layers[l];
      const auto& b = other.layers[l];
      for (std::size_t i = 0; i < a.coef.size(); ++i) a.coef[i] += b.coef[i];
      for (std::size_t i = 0; i < a.w_spline.size(); ++i) {
        a.w_spline[i] += b.w_spline[i];
      }
      for (std::size_t i = 0; i < a.w_base.size(); ++i) {
        a.w_base[i] += b.w_base[i];
      }
    }
  }

  std::vector<std::span<double>> views() {
    std::vector<std::span<double>> v;
    for (auto& l : layers) {
      v.emplace_back(l.coef);
      v.emplace_back(l.w_spline);
      v.emplace_back(l.w_base);
    }
    return v;
  }
};

class KanNetwork {
 public:
  KanNetwork() = default;

  // widths = [d_in, hidden..., horizon]. Spline coefficients start as
  // N(0, 0.1^2) noise; w_base starts at 1/in_dim per layer so node sums
  // stay O(1) through depth and hidden inputs land where the splines live.
  KanNetwork(std::vector<std::size_t> widths, SplineGrid grid,
             std::uint64_t seed)
      : widths_(std::move(widths)), grid_(std::move(grid)) {
    if (widths_.size() < 2) {
      throw ConfigError("kan: need at least input and output widths");
    }
    for (std::size_t w : widths_) {
      if (w == 0) throw ConfigError("kan: zero layer width");
    }
    rng::SplitMix64 gen(rng::derive_seed(seed, 0x4b414e /* layer init */));
    layers_.reserve(widths_.size() - 1);
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
      KanLayer layer(widths_[l], widths_[l + 1], grid_.basis_count());
      for (double& c : layer.coef) c = 0.1 * gen.next_gaussian();
      const double base_scale = 1.0 / static_cast<double>(widths_[l]);
      for (double& w : layer.w_base) w = base_scale;
      layers_.push_back(std::move(layer));
    }
  }

  const std::vector<std::size_t>& widths() const { return widths_; }
  const SplineGrid& grid() const { return grid_; }
  std::size_t input_dim() const { return widths_.front(); }
  std::size_t output_dim() const { return widths_.back(); }
  std::size_t layer_count() const { return layers_.size(); }
  const KanLayer& layer(std::size_t l) const { return layers_.at(l); }
  KanLayer& layer(std::size_t l) { return layers_.at(l); }

  std::size_t param_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) {
      n += l.coef.size() + l.w_spline.size() + l.w_base.size();
    }
    return n;
  }

  std::vector<std::span<double>> param_views() {
    std::vector<std::span<double>> v;
    for (auto& l : layers_) {
      v.emplace_back(l.coef);
      v.emplace_back(l.w_spline);
      v.emplace_back(l.w_base);
    }
    return v;
  }

  std::vector<double> flatten_params() const {
    std::vector<double> out;
    out.reserve(param_count());
    for (const auto& l : layers_) {
      out.insert(out.end(), l.coef.begin(), l.coef.end());
      out.insert(out.end(), l.w_spline.begin(), l.w_spline.end());
      out.insert(out.end(), l.w_base.begin(), l.w_base.end());
    }
    return out;
  }

  void restore_params(const std::vector<double>& flat) {
    if (flat.size() != param_count()) {
      throw ComputeError("restore_params: size mismatch");
    }
    std::size_t off = 0;
    for (auto& l : layers_) {
      std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(off),
                  l.coef.size(), l.coef.begin());
      off += l.coef.size();
      std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(off),
                  l.w_spline.size(), l.w_spline.begin());
      off += l.w_spline.size();
      std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(off),
                  l.w_base.size(), l.w_base.begin());
      off += l.w_base.size();
    }
  }

  KanGradients zero_gradients() const {
    KanGradients g;
    g.layers.resize(layers_.size());
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      g.layers[l].coef.assign(layers_[l].coef.size(), 0.0);
      g.layers[l].w_spline.assign(layers_[l].w_spline.size(), 0.0);
      g.layers[l].w_base.assign(layers_[l].w_base.size(), 0.0);
    }
    return g;
  }

  std::vector<double> forward(std::span<const double> x) const;
  Matrix forward_batch(const Matrix& x) const;

 private:
  std::vector<std::size_t> widths_;
  SplineGrid grid_;
  std::vector<KanLayer> layers_;
};

namespace detail {

// Reusable per-worker scratch for the fused forward/backward pass.
struct KanScratch {
  std::vector<double> act;         // activations, all layers concatenated
  std::vector<std::size_t> aoff;   // offset of each layer's activations
  std::vector<BasisWindow> win;    // windows per input unit per layer
  std::vector<std::size_t> woff;
  std::vector<double> sval, sgrad;  // silu values / derivatives
  std::vector<double> spl;          // spline dot stash per layer (I*Q)
  std::vector<std::size_t> soff;
  std::vector<double> delta, delta_next, tq, dspl;

  explicit KanScratch(const KanNetwork& net) {
    const auto& w = net.widths();
    std::size_t atotal = 0, wtotal = 0, stotal = 0, maxw = 0;
    aoff.resize(w.size());
    woff.resize(net.layer_count());
    soff.resize(net.layer_count());
    for (std::size_t i = 0; i < w.size(); ++i) {
      aoff[i] = atotal;
      atotal += w[i];
      maxw = std::max(maxw, w[i]);
    }
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
      woff[l] = wtotal;
      wtotal += net.layer(l).in_dim();
      soff[l] = stotal;
      stotal += net.layer(l).in_dim() * net.layer(l).out_dim();
    }
    act.resize(atotal);
    win.resize(wtotal);
    sval.resize(wtotal);
    sgrad.resize(wtotal);
    spl.resize(stotal);
    delta.resize(maxw);
    delta_next.resize(maxw);
    tq.resize(maxw);
    dspl.resize(maxw);
  }
};

// Fused per-unit forward kernel: one pass over the output dimension
// computes the spline dot, stashes it, and accumulates the node sums.
template <int K>
inline void forward_unit(const double* __restrict__ cblock,
                         const double* __restrict__ bval,
                         const double* __restrict__ ws,
                         const double* __restrict__ wb, double s,
                         double* __restrict__ splrow,
                         double* __restrict__ out, std::size_t Q) {
  for (std::size_t q = 0; q < Q; ++q) {
    double spl = 0.0;
    for (int i = 0; i <= K; ++i) {
      spl += bval[i] * cblock[static_cast<std::size_t>(i) * Q + q];
    }
    splrow[q] = spl;
    out[q] += ws[q] * spl + wb[q] * s;
  }
}

// Fused per-unit gradient kernel (single pass), plus an optional second
// reduction pass that backpropagates through the spline and silu terms.
template <int K>
inline void backward_unit(const double* __restrict__ delta,
                          const double* __restrict__ ws,
                          const double* __restrict__ splrow, double s,
                          const double* __restrict__ bval,
                          double* __restrict__ gws, double* __restrict__ gwb,
                          double* __restrict__ gc, std::size_t Q) {
  for (std::size_t q = 0; q < Q; ++q) {
    const double d = delta[q];
    const double t = d * ws[q];
    gws[q] += d * splrow[q];
    gwb[q] += d * s;
    for (int i = 0; i <= K; ++i) {
      gc[static_cast<std::size_t>(i) * Q + q] += bval[i] * t;
    }
  }
}

template <int K>
inline double backward_unit_delta(const double* __restrict__ delta,
                                  const double* __restrict__ ws,
                                  const double* __restrict__ wb,
                                  const double* __restrict__ cblock,
                                  const double* __restrict__ bder,
                                  double sgrad, std::size_t Q) {
  double acc = 0.0, acc_base = 0.0;
  for (std::size_t q = 0; q < Q; ++q) {
    double dspl = 0.0;
    for (int i = 0; i <= K; ++i) {
      dspl += bder[i] * cblock[static_cast<std::size_t>(i) * Q + q];
    }
    acc += delta[q] * ws[q] * dspl;
    acc_base += delta[q] * wb[q];
  }
  return acc + sgrad * acc_base;
}

template <int K>
inline void kan_forward_sample_k(const KanNetwork& net,
                                 std::span<const double> x, KanScratch& sc,
                                 bool want_grad_info) {
  const SplineGrid& grid = net.grid();
  std::copy(x.begin(), x.end(), sc.act.begin());
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const KanLayer& layer = net.layer(l);
    const std::size_t I = layer.in_dim();
    const std::size_t Q = layer.out_dim();
    const std::size_t C = layer.coeff_count();
    const double* in = sc.act.data() + sc.aoff[l];
    double* out = sc.act.data() + sc.aoff[l + 1];
    std::fill(out, out + Q, 0.0);
    for (std::size_t p = 0; p < I; ++p) {
      const double u = in[p];
      BasisWindow& w = sc.win[sc.woff[l] + p];
      w = basis_window(grid, u);
      const double s = silu(u);
      sc.sval[sc.woff[l] + p] = s;
      if (want_grad_info && l > 0) sc.sgrad[sc.woff[l] + p] = silu_grad(u);
      const double* cblock = layer.coef.data() + p * C * Q +
                             static_cast<std::size_t>(w.first) * Q;
      double* splrow = sc.spl.data() + sc.soff[l] + p * Q;
      forward_unit<K>(cblock, w.value.data(), layer.w_spline.data() + p * Q,
                      layer.w_base.data() + p * Q, s, splrow, out, Q);
    }
  }
}

template <int K>
inline void kan_backward_sample_k(const KanNetwork& net, KanScratch& sc,
                                  KanGradients& g) {
  for (std::size_t l = net.layer_count(); l-- > 0;) {
    const KanLayer& layer = net.layer(l);
    const std::size_t I = layer.in_dim();
    const std::size_t Q = layer.out_dim();
    const std::size_t C = layer.coeff_count();
    auto& lg = g.layers[l];
    const bool propagate = l > 0;
    for (std::size_t p = 0; p < I; ++p) {
      const BasisWindow& w = sc.win[sc.woff[l] + p];
      const double s = sc.sval[sc.woff[l] + p];
      const std::size_t shift =
          p * C * Q + static_cast<std::size_t>(w.first) * Q;
      backward_unit<K>(sc.delta.data(), layer.w_spline.data() + p * Q,
                       sc.spl.data() + sc.soff[l] + p * Q, s, w.value.data(),
                       lg.w_spline.data() + p * Q, lg.w_base.data() + p * Q,
                       lg.coef.data() + shift, Q);
      if (propagate) {
        sc.delta_next[p] = backward_unit_delta<K>(
            sc.delta.data(), layer.w_spline.data() + p * Q,
            layer.w_base.data() + p * Q, layer.coef.data() + shift,
            w.deriv.data(), sc.sgrad[sc.woff[l] + p], Q);
      }
    }
    if (propagate) {
      std::copy_n(sc.delta_next.begin(), I, sc.delta.begin());
    }
  }
}

inline void kan_forward_sample(const KanNetwork& net,
                               std::span<const double> x, KanScratch& sc,
                               bool want_grad_info) {
  if (x.size() != net.input_dim()) {
    throw ComputeError("kan forward: input dimension mismatch (" +
                       std::to_string(x.size()) + " vs " +
                       std::to_string(net.input_dim()) + ")");
  }
  switch (net.grid().order) {
    case 0: kan_forward_sample_k<0>(net, x, sc, want_grad_info); break;
    case 1: kan_forward_sample_k<1>(net, x, sc, want_grad_info); break;
    case 2: kan_forward_sample_k<2>(net, x, sc, want_grad_info); break;
    case 3: kan_forward_sample_k<3>(net, x, sc, want_grad_info); break;
    case 4: kan_forward_sample_k<4>(net, x, sc, want_grad_info); break;
    case 5: kan_forward_sample_k<5>(net, x, sc, want_grad_info); break;
    case 6: kan_forward_sample_k<6>(net, x, sc, want_grad_info); break;
    case 7: kan_forward_sample_k<7>(net, x, sc, want_grad_info); break;
    default: throw ComputeError("kan: unsupported spline order");
  }
}

inline void kan_backward_sample(const KanNetwork& net, KanScratch& sc,
                                KanGradients& g) {
  switch (net.grid().order) {
    case 0: kan_backward_sample_k<0>(net, sc, g); break;
    case 1: kan_backward_sample_k<1>(net, sc, g); break;
    case 2: kan_backward_sample_k<2>(net, sc, g); break;
    case 3: kan_backward_sample_k<3>(net, sc, g); break;
    case 4: kan_backward_sample_k<4>(net, sc, g); break;
    case 5: kan_backward_sample_k<5>(net, sc, g); break;
    case 6: kan_backward_sample_k<6>(net, sc, g); break;
    case 7: kan_backward_sample_k<7>(net, sc, g); break;
    default: throw ComputeError("kan: unsupported spline order");
  }
}

}  // namespace detail

inline std::vector<double> KanNetwork::forward(
    std::span<const double> x) const {
  detail::KanScratch sc(*this);
  detail::kan_forward_sample(*this, x, sc, false);
  const std::size_t H = output_dim();
  const double* out = sc.act.data() + sc.aoff[layer_count()];
  return std::vector<double>(out, out + H);
}

inline Matrix KanNetwork::forward_batch(const Matrix& x) const {
  if (x.cols != input_dim()) {
    throw ComputeError("kan forward_batch: input dimension mismatch");
  }
  Matrix out(x.rows, output_dim());
  constexpr std::size_t kBlock = 256;
  parallel_for_blocks(x.rows, kBlock, [&](std::size_t, std::size_t begin,
                                          std::size_t end) {
    detail::KanScratch sc(*this);
    for (std::size_t r = begin; r < end; ++r) {
      detail::kan_forward_sample(*this, x.row(r), sc, false);
      const double* o = sc.act.data() + sc.aoff[layer_count()];
      std::copy_n(o, output_dim(), out.row(r).begin());
    }
  });
  return out;
}

// Mean absolute error over all entries of equally shaped matrices.
inline double loss_mae(const Matrix& pred, const Matrix& target) {
  if (pred.rows != target.rows || pred.cols != target.cols) {
    throw ComputeError("loss_mae: shape mismatch");
  }
  if (pred.rows == 0 || pred.cols == 0) {
    throw ComputeError("loss_mae: empty input");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.data.size(); ++i) {
    sum += std::abs(pred.data[i] - target.data[i]);
  }
  return sum / static_cast<double>(pred.data.size());
}

struct BackwardResult {
  KanGradients grads;
  double train_mae = 0.0;
};

// Exact MAE-loss gradients for every parameter over the batch.
// Subgradient 0 where prediction equals target. Per-block partial sums are
// reduced in block order, so results do not depend on the worker count.
inline BackwardResult backward(const KanNetwork& net, const Matrix& x,
                               const Matrix& y) {
  if (x.rows != y.rows) throw ComputeError("backward: row count mismatch");
  if (x.rows == 0) throw ComputeError("backward: empty batch");
  if (x.cols != net.input_dim() || y.cols != net.output_dim()) {
    throw ComputeError("backward: dimension mismatch");
  }
  const std::size_t n = x.rows;
  const std::size_t H = net.output_dim();
  const double inv = 1.0 / (static_cast<double>(n) * static_cast<double>(H));

  // fixed block size: the reduction grouping must not depend on the
  // worker count or results would vary with GRIDCAST_THREADS
  constexpr std::size_t kBlock = 1024;
  const std::size_t n_blocks = (n + kBlock - 1) / kBlock;
  std::vector<KanGradients> block_grads(n_blocks);
  std::vector<double> block_abs(n_blocks, 0.0);

  parallel_for_blocks(n, kBlock, [&](std::size_t b, std::size_t begin,
                                     std::size_t end) {
    detail::KanScratch sc(net);
    KanGradients g = net.zero_gradients();
    double abs_sum = 0.0;
    for (std::size_t r = begin; r < end; ++r) {
      detail::kan_forward_sample(net, x.row(r), sc, true);
      const double* pred = sc.act.data() + sc.aoff[net.layer_count()];
      const double* target = y.row(r).data();
      for (std::size_t h = 0; h < H; ++h) {
        const double res = pred[h] - target[h];
        abs_sum += std::abs(res);
        sc.delta[h] = res > 0.0 ? inv : (res < 0.0 ? -inv : 0.0);
      }
      detail::kan_backward_sample(net, sc, g);
    }
    block_grads[b] = std::move(g);
    block_abs[b] = abs_sum;
  });

  BackwardResult out;
  out.grads = std::move(block_grads[0]);
  double abs_total = block_abs[0];
  for (std::size_t b = 1; b < n_blocks; ++b) {
    out.grads.accumulate(block_grads[b]);
    abs_total += block_abs[b];
  }
  out.train_mae = abs_total * inv;
  return out;
}

// Bias-corrected Adam over a list of parameter arrays.
struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long long step = 0;

  explicit AdamState(std::size_t n_params = 0)
      : m(n_params, 0.0), v(n_params, 0.0) {}
};

inline void adam_step(std::vector<std::span<double>> params,
                      std::vector<std::span<double>> grads, AdamState& state,
                      const AdamConfig& cfg) {
  if (params.size() != grads.size()) {
    throw ComputeError("adam_step: parameter/gradient view mismatch");
  }
  std::size_t total = 0;
  for (const auto& p : params) total += p.size();
  if (state.m.size() != total) {
    throw ComputeError("adam_step: state size mismatch");
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  std::size_t off = 0;
  for (std::size_t a = 0; a < params.size(); ++a) {
    std::span<double> p = params[a];
    std::span<const double> g = grads[a];
    if (p.size() != g.size()) {
      throw ComputeError("adam_step: array shape mismatch");
    }
    double* m = state.m.data() + off;
    double* v = state.v.data() + off;
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
    }
    off += p.size();
  }
}

struct TrainConfig {
  int max_steps = 300;
  int patience = 30;
  AdamConfig adam;
  std::size_t batch_size = 0;  // 0 = full batch
  std::uint64_t seed = 0;

  void validate() const {
    if (max_steps < 1) throw ConfigError("kan: max_steps must be >= 1");
    if (patience < 1 || patience >= max_steps) {
      throw ConfigError("kan: patience must be in [1, max_steps)");
    }
    if (!(adam.learning_rate > 0.0)) {
      throw ConfigError("kan: learning_rate must be > 0");
    }
  }
};

struct TraceEntry {
  int step = 0;
  double train_mae = 0.0;
  double val_mae = 0.0;
};

struct TrainResult {
  std::vector<TraceEntry> trace;
  int best_step = 0;
  double best_val_mae = std::numeric_limits<double>::infinity();
};

// Full-batch (or optionally mini-batch) Adam on MAE loss with early
// stopping: training halts after `patience` consecutive steps without a
// new validation-MAE minimum and the best step's parameters are restored.
inline TrainResult train(KanNetwork& net, const Matrix& train_x,
                         const Matrix& train_y, const Matrix& val_x,
                         const Matrix& val_y, const TrainConfig& cfg) {
  cfg.validate();
  if (train_x.rows == 0 || val_x.rows == 0) {
    throw ComputeError("train: empty sample set");
  }

  AdamState state(net.param_count());
  TrainResult result;
  std::vector<double> best_params = net.flatten_params();
  int bad_steps = 0;

  std::vector<std::size_t> order(train_x.rows);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng::SplitMix64 shuffle_rng(rng::derive_seed(cfg.seed, 0x5348 /* shuffle */));
  std::size_t cursor = 0;

  Matrix batch_x, batch_y;
  for (int step = 1; step <= cfg.max_steps; ++step) {
    const Matrix* bx = &train_x;
    const Matrix* by = &train_y;
    if (cfg.batch_size > 0 && cfg.batch_size < train_x.rows) {
      const std::size_t bs = cfg.batch_size;
      if (cursor + bs > order.size()) {
        for (std::size_t i = order.size(); i-- > 1;) {
          std::swap(order[i], order[shuffle_rng.next_below(i + 1)]);
        }
        cursor = 0;
      }
      batch_x = Matrix(bs, train_x.cols);
      batch_y = Matrix(bs, train_y.cols);
      for (std::size_t r = 0; r < bs; ++r) {
        const std::size_t src = order[cursor + r];
        std::copy_n(train_x.row(src).begin(), train_x.cols,
                    batch_x.row(r).begin());
        std::copy_n(train_y.row(src).begin(), train_y.cols,
                    batch_y.row(r).begin());
      }
      cursor += bs;
      bx = &batch_x;
      by = &batch_y;
    }

    BackwardResult back = backward(net, *bx, *by);
    adam_step(net.param_views(), back.grads.views(), state, cfg.adam);

    const double val_mae = loss_mae(net.forward_batch(val_x), val_y);
    result.trace.push_back({step, back.train_mae, val_mae});

    if (val_mae < result.best_val_mae) {
      result.best_val_mae = val_mae;
      result.best_step = step;
      best_params = net.flatten_params();
      bad_steps = 0;
    } else {
      ++bad_steps;
    }
    if (bad_steps >= cfg.patience) break;
  }

  net.restore_params(best_params);
  return result;
}

}  // namespace gridcast

#endif  // GRIDCAST_KAN_HPP
