// gridcast command-line interface: synthetic data generation, expanding
// window backtests, model training, and week-ahead forecasting.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gridcast/gridcast.hpp"

namespace gc = gridcast;
namespace fs = std::filesystem;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out;
  std::int64_t seed = -1;
  std::string models;
  bool quiet = false;
};

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : csv) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

gc::RunConfig load_config(const CommonOpts& opts) {
  gc::RunConfig cfg = gc::load_run_config(opts.config_path);
  if (opts.seed >= 0) {
    cfg.seed = static_cast<std::uint64_t>(opts.seed);
    cfg.data.synth.seed = cfg.seed;
  }
  if (!opts.models.empty()) {
    cfg.models = split_list(opts.models);
    cfg.validate();
  }
  if (!opts.out.empty()) cfg.output.dir = opts.out;
  return cfg;
}

gc::Dataset load_dataset(const gc::RunConfig& cfg) {
  if (cfg.data.source == "csv") {
    return gc::ingest_csv(cfg.data.csv_path, cfg.data.schema, cfg.region);
  }
  gc::Dataset ds = gc::generate(cfg.data.synth);
  ds.region = cfg.region;
  return ds;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw gc::DataError("cannot create directory '" + dir + "'");
}

int cmd_synth(const CommonOpts& opts) {
  const gc::RunConfig cfg = load_config(opts);
  const gc::Dataset ds = gc::generate(cfg.data.synth);
  std::string path = opts.out;
  if (path.empty()) {
    ensure_dir(cfg.output.dir);
    path = cfg.output.dir + "/synthetic.csv";
  } else if (path.find('/') != std::string::npos) {
    ensure_dir(fs::path(path).parent_path().string());
  }
  gc::write_dataset_csv(ds, path);
  if (!opts.quiet) {
    std::cout << "wrote " << ds.size() << " rows to " << path << "\n";
  }
  return 0;
}

int cmd_backtest(const CommonOpts& opts) {
  const gc::RunConfig cfg = load_config(opts);
  const gc::Dataset ds = load_dataset(cfg);
  const gc::BacktestReport report =
      gc::run_backtest(ds, cfg.backtest_settings());
  ensure_dir(cfg.output.dir);
  gc::write_report_files(report, cfg.output.dir, cfg.output.plots);
  if (!opts.quiet) {
    std::cout << "backtest over " << report.folds.size() << " folds ("
              << report.data_start << " .. " << report.data_end << ")\n";
    for (const auto& [name, m] : report.pooled) {
      std::cout << "  " << name << ": mae=" << gc::format_double(m.mae)
                << " rmse=" << gc::format_double(m.rmse)
                << " rmae=" << gc::format_double(m.rmae) << "\n";
    }
    std::cout << "reports written to " << cfg.output.dir << "\n";
  }
  return 0;
}

int cmd_train(const CommonOpts& opts) {
  const gc::RunConfig cfg = load_config(opts);
  const gc::Dataset ds = load_dataset(cfg);
  const gc::TargetTransform tf{gc::TransformKind::Asinh};

  const std::size_t val_len = cfg.fold_len;
  if (ds.size() < cfg.features.lookback + cfg.features.horizon + val_len) {
    throw gc::DataError("dataset too short for training plus validation");
  }
  const std::size_t fit_end = ds.size() - val_len;

  gc::WindowSet ws = gc::build_windows(ds, cfg.features, 0, fit_end);
  const gc::ScalerParams scaler = gc::scaler_fit(ws.x);
  gc::Matrix x = gc::scaler_apply(scaler, ws.x);
  gc::Matrix y = ws.y;
  for (double& v : y.data) v = tf.apply(v);

  const std::vector<double> val_x =
      gc::scaler_apply(scaler, gc::build_feature_row(ds, cfg.features, fit_end - 1));
  std::vector<double> val_y(val_len);
  for (std::size_t i = 0; i < val_len; ++i) {
    val_y[i] = tf.apply(ds.price[fit_end + i]);
  }
  gc::Matrix val_x_m(1, val_x.size());
  std::copy(val_x.begin(), val_x.end(), val_x_m.row(0).begin());
  gc::Matrix val_y_m(1, val_y.size());
  std::copy(val_y.begin(), val_y.end(), val_y_m.row(0).begin());

  std::vector<std::size_t> widths;
  widths.push_back(x.cols);
  widths.insert(widths.end(), cfg.kan.hidden.begin(), cfg.kan.hidden.end());
  widths.push_back(cfg.features.horizon);
  gc::SplineGrid grid(0.0, 1.0, cfg.kan.grid_size, cfg.kan.spline_order);
  gc::TrainConfig tc = cfg.kan.train;
  tc.seed = gc::rng::derive_seed(cfg.seed, 100);
  gc::KanNetwork net(widths, grid, tc.seed);
  const gc::TrainResult tr = gc::train(net, x, y, val_x_m, val_y_m, tc);

  gc::GbtConfig gbt_cfg = cfg.gbt;
  gbt_cfg.seed = gc::rng::derive_seed(cfg.seed, 200);
  const gc::MultiBooster mb = gc::fit_multi(x, y, gbt_cfg);

  const gc::AlphaSelection sel =
      gc::select_alpha(net.forward(val_x), mb.predict_multi(val_x), val_y,
                       cfg.ensemble_grid_step);

  gc::PipelineState pipe;
  pipe.spec = cfg.features;
  pipe.exog_used = ws.exog_used;
  pipe.scaler = scaler;
  pipe.transform = tf;
  pipe.region = ds.region;

  ensure_dir(cfg.output.dir);
  gc::save_json(gc::to_json(net), cfg.output.dir + "/kan.json");
  gc::save_json(gc::to_json(mb), cfg.output.dir + "/gbt.json");
  gc::save_json(gc::to_json(pipe), cfg.output.dir + "/pipeline.json");
  gc::json ens;
  ens["type"] = "ensemble";
  ens["alpha"] = sel.weight.alpha;
  gc::json table = gc::json::array();
  for (const auto& row : sel.table) {
    table.push_back({{"alpha", row.alpha}, {"mae", row.mae}});
  }
  ens["validation_table"] = std::move(table);
  gc::save_json(ens, cfg.output.dir + "/ensemble.json");

  if (!opts.quiet) {
    std::cout << "trained on " << x.rows << " windows; kan stopped at step "
              << tr.best_step << " (val mae "
              << gc::format_double(tr.best_val_mae) << "), alpha="
              << gc::format_double(sel.weight.alpha) << "\n"
              << "models written to " << cfg.output.dir << "\n";
  }
  return 0;
}

int cmd_forecast(const CommonOpts& opts, const std::string& models_dir,
                 const std::string& anchor) {
  const gc::RunConfig cfg = load_config(opts);
  const gc::Dataset ds = load_dataset(cfg);
  const gc::PipelineState pipe =
      gc::pipeline_from_json(gc::load_json(models_dir + "/pipeline.json"));

  std::size_t anchor_idx = ds.size() - 1;
  if (!anchor.empty()) {
    const gc::HourStamp stamp = gc::parse_hour_stamp(anchor);
    if (stamp < ds.start() ||
        stamp >= ds.start() + static_cast<gc::HourStamp>(ds.size())) {
      throw gc::DataError("anchor " + anchor + " outside data range " +
                          gc::format_hour_stamp(ds.start()) + " .. " +
                          gc::format_hour_stamp(ds.start() +
                                                static_cast<gc::HourStamp>(
                                                    ds.size() - 1)));
    }
    anchor_idx = static_cast<std::size_t>(stamp - ds.start());
  }
  if (anchor_idx + 1 < pipe.spec.lookback) {
    throw gc::DataError("anchor leaves less than the lookback window");
  }

  const std::vector<double> raw =
      gc::build_feature_row(ds, pipe.spec, anchor_idx);
  const std::vector<double> x = gc::scaler_apply(pipe.scaler, raw);

  const gc::HourStamp anchor_stamp =
      ds.start() + static_cast<gc::HourStamp>(anchor_idx);

  auto write_forecast = [&](const std::string& name,
                            const std::vector<double>& price_pred) {
    std::string body = "timestamp,price_forecast\n";
    for (std::size_t h = 0; h < price_pred.size(); ++h) {
      body += gc::format_hour_stamp(anchor_stamp + 1 +
                                    static_cast<gc::HourStamp>(h)) +
              ',' + gc::format_double(price_pred[h]) + '\n';
    }
    gc::write_text_file(cfg.output.dir + "/forecast_" + name + ".csv", body);
  };

  ensure_dir(cfg.output.dir);
  const std::vector<std::string> wanted =
      opts.models.empty()
          ? std::vector<std::string>{"kan", "gbt", "hybrid"}
          : split_list(opts.models);

  auto want = [&](const std::string& m) {
    return std::find(wanted.begin(), wanted.end(), m) != wanted.end();
  };

  std::vector<double> kan_tf, gbt_tf;
  if (want("kan") || want("hybrid")) {
    const gc::KanNetwork net =
        gc::kan_from_json(gc::load_json(models_dir + "/kan.json"));
    if (net.input_dim() != x.size()) {
      throw gc::DataError("kan model feature dimension mismatch");
    }
    kan_tf = net.forward(x);
    if (want("kan")) write_forecast("kan", pipe.transform.invert(kan_tf));
  }
  if (want("gbt") || want("hybrid")) {
    const gc::MultiBooster mb =
        gc::multi_booster_from_json(gc::load_json(models_dir + "/gbt.json"));
    gbt_tf = mb.predict_multi(x);
    if (want("gbt")) write_forecast("gbt", pipe.transform.invert(gbt_tf));
  }
  if (want("hybrid")) {
    const gc::json ens = gc::load_json(models_dir + "/ensemble.json");
    const double alpha = ens.at("alpha").get<double>();
    write_forecast("hybrid",
                   pipe.transform.invert(gc::combine(kan_tf, gbt_tf, alpha)));
  }
  if (!opts.quiet) {
    std::cout << "forecast anchored at "
              << gc::format_hour_stamp(anchor_stamp) << " written to "
              << cfg.output.dir << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gridcast: hybrid KAN + gradient-boosted-tree week-ahead "
               "electricity price forecasting"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string models_dir, anchor;

  auto add_common = [&](CLI::App* sub, bool config_required = true) {
    auto* c = sub->add_option("--config", opts.config_path,
                              "JSON experiment config");
    if (config_required) c->required();
    sub->add_option("--out", opts.out, "output path (overrides config)");
    sub->add_option("--seed", opts.seed, "seed override");
    sub->add_option("--models", opts.models, "comma-separated model list");
    sub->add_flag("--quiet", opts.quiet, "suppress progress output");
  };

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic CSV");
  add_common(synth);
  CLI::App* backtest =
      app.add_subcommand("backtest", "run the expanding-window backtest");
  add_common(backtest);
  CLI::App* train =
      app.add_subcommand("train", "train and serialize the models");
  add_common(train);
  CLI::App* forecast =
      app.add_subcommand("forecast", "forecast a week from saved models");
  add_common(forecast);
  forecast->add_option("--models-dir", models_dir,
                       "directory holding kan.json/gbt.json/pipeline.json")
      ->required();
  forecast->add_option("--anchor", anchor,
                       "forecast anchor hour (default: last data hour)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) return cmd_synth(opts);
    if (backtest->parsed()) return cmd_backtest(opts);
    if (train->parsed()) return cmd_train(opts);
    if (forecast->parsed()) return cmd_forecast(opts, models_dir, anchor);
  } catch (const gc::ConfigError& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return 2;
  } catch (const gc::DataError& e) {
    std::cerr << "error: data: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: runtime: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
