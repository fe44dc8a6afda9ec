#ifndef GRIDCAST_BACKTEST_HPP
#define GRIDCAST_BACKTEST_HPP

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "gridcast/baselines.hpp"
#include "gridcast/ensemble.hpp"
#include "gridcast/features.hpp"
#include "gridcast/gbt.hpp"
#include "gridcast/kan.hpp"
#include "gridcast/metrics.hpp"
#include "gridcast/serialize.hpp"
#include "gridcast/synth.hpp"
#include "gridcast/timeseries.hpp"
#include "gridcast/transform.hpp"

namespace gridcast {

inline const std::vector<std::string>& all_model_names() {
  static const std::vector<std::string> names = {
      "kan", "gbt", "hybrid", "naive", "seasonal_naive", "linear_arx"};
  return names;
}

struct KanSettings {
  std::vector<std::size_t> hidden = {64, 32};
  int grid_size = 3;
  int spline_order = 3;
  TrainConfig train;
};

struct BacktestSettings {
  FeatureSpec features;
  KanSettings kan;
  GbtConfig gbt;
  double ensemble_grid_step = 0.05;
  std::size_t n_folds = 4;
  std::size_t fold_len = 168;
  double evt_quantile = 0.95;
  std::vector<double> ablation_alphas = {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  std::uint64_t seed = 42;
  std::vector<std::string> models = all_model_names();
  std::string config_hash;  // caller-supplied metadata

  void validate() const {
    features.validate();
    gbt.validate();
    kan.train.validate();
    if (n_folds == 0 || fold_len == 0) {
      throw ConfigError("backtest: folds and fold length must be positive");
    }
    if (!(evt_quantile > 0.0 && evt_quantile < 1.0)) {
      throw ConfigError("backtest: evt_quantile must be in (0, 1)");
    }
    if (models.empty()) throw ConfigError("backtest: no models selected");
    for (const auto& m : models) {
      const auto& all = all_model_names();
      if (std::find(all.begin(), all.end(), m) == all.end()) {
        throw ConfigError("backtest: unknown model '" + m + "'");
      }
    }
    for (double a : ablation_alphas) {
      if (!(a >= 0.0 && a <= 1.0)) {
        throw ConfigError("backtest: ablation alpha out of [0, 1]");
      }
    }
  }

  bool wants(const std::string& m) const {
    return std::find(models.begin(), models.end(), m) != models.end();
  }
};

struct FoldReport {
  std::size_t fold = 0;
  HourStamp test_start = 0;
  double alpha = 0.5;
  std::map<std::string, double> val_mae;  // transform-space validation MAE
  std::map<std::string, MetricSet> metrics;  // price-space test metrics
  std::map<std::string, std::string> param_hash;
  std::vector<AlphaLoss> alpha_table;
};

struct AblationRow {
  double alpha_kan = 0.0;
  double alpha_gbt = 0.0;
  MetricSet metrics;
};

struct BacktestReport {
  std::string region;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string data_start;
  std::string data_end;
  std::vector<std::string> models;
  std::vector<FoldReport> folds;
  std::map<std::string, MetricSet> pooled;
  std::map<std::string, ExtremeReport> extreme;
  std::vector<AblationRow> ablation;
  std::vector<std::vector<double>> actual;  // per fold, price space
  std::vector<std::string> fold_start_stamps;
  std::map<std::string, std::vector<std::vector<double>>> forecasts;
};

namespace detail {

struct FoldArtifacts {
  FoldReport report;
  std::vector<double> actual_price;
  std::map<std::string, std::vector<double>> price_forecast;
  std::vector<double> kan_test_tf;  // transform-space, for the ablation
  std::vector<double> gbt_test_tf;
};

inline Matrix single_row(const std::vector<double>& v) {
  Matrix m(1, v.size());
  std::copy(v.begin(), v.end(), m.row(0).begin());
  return m;
}

inline std::vector<double> slice_price(const Dataset& ds, std::size_t begin,
                                       std::size_t end) {
  std::vector<double> out(end - begin);
  for (std::size_t i = begin; i < end; ++i) out[i - begin] = ds.price[i];
  return out;
}

inline FoldArtifacts run_fold(const Dataset& ds, const BacktestSettings& cfg,
                              const FoldRange& fold, std::size_t fold_idx,
                              const TargetTransform& tf) {
  const std::size_t t0 = fold.test_begin;
  const std::size_t fit_end = t0 - cfg.fold_len;  // validation carved out

  const bool need_kan = cfg.wants("kan") || cfg.wants("hybrid");
  const bool need_gbt = cfg.wants("gbt") || cfg.wants("hybrid");
  const bool need_val = need_kan || need_gbt;

  FoldArtifacts art;
  art.report.fold = fold_idx;
  art.report.test_start = ds.start() + static_cast<HourStamp>(t0);
  art.actual_price = slice_price(ds, t0, fold.test_end);

  // data preparation: windows and scaler fitted strictly before the
  // validation slice
  WindowSet train_ws;
  ScalerParams scaler;
  Matrix train_x, train_y;
  std::vector<double> val_x, test_x;
  Matrix val_x_m, val_y_m;
  std::vector<double> val_y_tf;
  const bool need_features =
      need_kan || need_gbt || cfg.wants("linear_arx");
  if (need_features) {
    train_ws = build_windows(ds, cfg.features, 0, fit_end);
    scaler = scaler_fit(train_ws.x);
    train_x = scaler_apply(scaler, train_ws.x);
    train_y = train_ws.y;
    for (double& v : train_y.data) v = tf.apply(v);

    val_x = scaler_apply(scaler, build_feature_row(ds, cfg.features, fit_end - 1));
    test_x = scaler_apply(scaler, build_feature_row(ds, cfg.features, t0 - 1));

    val_y_tf = tf.apply(slice_price(ds, fit_end, t0));
    val_x_m = single_row(val_x);
    val_y_m = single_row(val_y_tf);
  }

  std::map<std::string, std::vector<double>> test_tf;  // transform space
  std::map<std::string, std::vector<double>> val_tf;

  if (need_kan) {
    std::vector<std::size_t> widths;
    widths.push_back(train_x.cols);
    widths.insert(widths.end(), cfg.kan.hidden.begin(), cfg.kan.hidden.end());
    widths.push_back(cfg.features.horizon);
    SplineGrid grid(0.0, 1.0, cfg.kan.grid_size, cfg.kan.spline_order);
    TrainConfig tc = cfg.kan.train;
    tc.seed = rng::derive_seed(cfg.seed, 100 + fold_idx);
    KanNetwork net(widths, grid, tc.seed);
    train(net, train_x, train_y, val_x_m, val_y_m, tc);
    test_tf["kan"] = net.forward(test_x);
    val_tf["kan"] = net.forward(val_x);
    art.report.param_hash["kan"] = to_hex(param_hash(net));
  }
  if (need_gbt) {
    GbtConfig gc = cfg.gbt;
    gc.seed = rng::derive_seed(cfg.seed, 200 + fold_idx);
    const MultiBooster mb = fit_multi(train_x, train_y, gc);
    test_tf["gbt"] = mb.predict_multi(test_x);
    val_tf["gbt"] = mb.predict_multi(val_x);
    art.report.param_hash["gbt"] = to_hex(param_hash(mb));
  }
  if (cfg.wants("linear_arx")) {
    const LinearArx arx = linear_arx_fit(train_x, train_y);
    test_tf["linear_arx"] = arx.predict(test_x);
    art.report.param_hash["linear_arx"] =
        to_hex(fnv1a_bytes(arx.weights.data.data(),
                           arx.weights.data.size() * sizeof(double)));
  }

  // ensemble weight from the validation week
  if (need_kan && need_gbt && need_val) {
    const AlphaSelection sel = select_alpha(val_tf["kan"], val_tf["gbt"],
                                            val_y_tf, cfg.ensemble_grid_step);
    art.report.alpha = sel.weight.alpha;
    art.report.alpha_table = sel.table;
    art.report.val_mae["kan"] = sel.table.back().mae;   // alpha = 1
    art.report.val_mae["gbt"] = sel.table.front().mae;  // alpha = 0
    double best = sel.table.front().mae;
    for (const auto& row : sel.table) best = std::min(best, row.mae);
    art.report.val_mae["hybrid"] = best;
    test_tf["hybrid"] = combine(test_tf["kan"], test_tf["gbt"],
                                art.report.alpha);
  }

  // price-space forecasts
  for (const auto& [name, pred] : test_tf) {
    art.price_forecast[name] = tf.invert(pred);
  }
  {
    const std::vector<double> history = slice_price(ds, 0, t0);
    art.price_forecast["naive"] = naive_forecast(history, cfg.fold_len);
    if (cfg.wants("seasonal_naive")) {
      art.price_forecast["seasonal_naive"] =
          seasonal_naive_forecast(history, cfg.fold_len);
    }
  }

  const double fold_naive_mae =
      mae(art.price_forecast["naive"], art.actual_price);
  for (const auto& [name, pred] : art.price_forecast) {
    art.report.metrics[name] =
        compute_metrics(pred, art.actual_price, fold_naive_mae);
  }

  if (need_kan) art.kan_test_tf = test_tf["kan"];
  if (need_gbt) art.gbt_test_tf = test_tf["gbt"];
  return art;
}

}  // namespace detail

// Fixed-weight ablation over pooled test weeks, sorted by MAE.
// kan_tf/gbt_tf hold transform-space forecasts per fold; combination
// happens there and is inverted once before scoring, matching the hybrid
// path.
inline std::vector<AblationRow> run_weight_ablation(
    const std::vector<std::vector<double>>& kan_tf,
    const std::vector<std::vector<double>>& gbt_tf,
    const std::vector<std::vector<double>>& actual_price,
    const TargetTransform& tf, double pooled_naive_mae,
    const std::vector<double>& alphas) {
  std::vector<AblationRow> rows;
  for (double a : alphas) {
    std::vector<double> pred_all, actual_all;
    for (std::size_t k = 0; k < kan_tf.size(); ++k) {
      const std::vector<double> mix = combine(kan_tf[k], gbt_tf[k], a);
      for (double v : tf.invert(mix)) pred_all.push_back(v);
      for (double v : actual_price[k]) actual_all.push_back(v);
    }
    AblationRow row;
    row.alpha_kan = a;
    row.alpha_gbt = 1.0 - a;
    row.metrics = compute_metrics(pred_all, actual_all, pooled_naive_mae);
    rows.push_back(row);
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const AblationRow& a, const AblationRow& b) {
                     return a.metrics.mae < b.metrics.mae;
                   });
  return rows;
}

// Expanding-window backtest: per fold, fit transforms and models on data
// strictly before the fold's validation week, select the ensemble weight
// on that week, then forecast the test week from its last training hour.
// Metrics are computed in price space; pooled rows concatenate fold errors.
inline BacktestReport run_backtest(const Dataset& ds,
                                   const BacktestSettings& cfg) {
  cfg.validate();
  ds.validate_alignment();
  const TargetTransform tf{TransformKind::Asinh};

  const std::size_t min_train =
      cfg.features.lookback + cfg.features.horizon + cfg.fold_len;
  const std::vector<FoldRange> folds =
      split_expanding(ds.size(), cfg.n_folds, cfg.fold_len, min_train);

  BacktestReport report;
  report.region = ds.region;
  report.seed = cfg.seed;
  report.config_hash = cfg.config_hash;
  report.models = cfg.models;
  report.data_start = format_hour_stamp(ds.start());
  report.data_end =
      format_hour_stamp(ds.start() + static_cast<HourStamp>(ds.size() - 1));

  std::vector<detail::FoldArtifacts> arts;
  arts.reserve(folds.size());
  for (std::size_t k = 0; k < folds.size(); ++k) {
    try {
      arts.push_back(detail::run_fold(ds, cfg, folds[k], k, tf));
    } catch (const ConfigError& e) {
      throw ConfigError("fold " + std::to_string(k) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("fold " + std::to_string(k) + ": " + e.what());
    } catch (const std::exception& e) {
      throw ComputeError("fold " + std::to_string(k) + ": " + e.what());
    }
  }

  // assemble per-fold rows restricted to the requested models
  for (auto& art : arts) {
    FoldReport fr = art.report;
    std::map<std::string, MetricSet> kept;
    for (const auto& name : cfg.models) {
      auto it = fr.metrics.find(name);
      if (it != fr.metrics.end()) kept[name] = it->second;
    }
    fr.metrics = std::move(kept);
    report.folds.push_back(std::move(fr));
    report.actual.push_back(art.actual_price);
    report.fold_start_stamps.push_back(
        format_hour_stamp(art.report.test_start));
  }

  // pooled metrics over concatenated fold errors
  std::vector<double> actual_all;
  for (const auto& art : arts) {
    actual_all.insert(actual_all.end(), art.actual_price.begin(),
                      art.actual_price.end());
  }
  std::vector<double> naive_all;
  for (const auto& art : arts) {
    const auto& p = art.price_forecast.at("naive");
    naive_all.insert(naive_all.end(), p.begin(), p.end());
  }
  const double pooled_naive_mae = mae(naive_all, actual_all);

  for (const auto& name : cfg.models) {
    std::vector<double> pred_all;
    bool available = true;
    for (const auto& art : arts) {
      auto it = art.price_forecast.find(name);
      if (it == art.price_forecast.end()) {
        available = false;
        break;
      }
      pred_all.insert(pred_all.end(), it->second.begin(), it->second.end());
    }
    if (!available) continue;
    report.pooled[name] =
        compute_metrics(pred_all, actual_all, pooled_naive_mae);
    report.extreme[name] = evt_extreme_mae(pred_all, actual_all,
                                           cfg.evt_quantile);
    std::vector<std::vector<double>> per_fold;
    for (const auto& art : arts) per_fold.push_back(art.price_forecast.at(name));
    report.forecasts[name] = std::move(per_fold);
  }

  // fixed-weight ablation when both component models were trained
  if (!arts.empty() && !arts.front().kan_test_tf.empty() &&
      !arts.front().gbt_test_tf.empty() && !cfg.ablation_alphas.empty()) {
    std::vector<std::vector<double>> kan_tf, gbt_tf, actual_per_fold;
    for (const auto& art : arts) {
      kan_tf.push_back(art.kan_test_tf);
      gbt_tf.push_back(art.gbt_test_tf);
      actual_per_fold.push_back(art.actual_price);
    }
    report.ablation = run_weight_ablation(kan_tf, gbt_tf, actual_per_fold, tf,
                                          pooled_naive_mae,
                                          cfg.ablation_alphas);
  }

  return report;
}

}  // namespace gridcast

#endif  // GRIDCAST_BACKTEST_HPP
