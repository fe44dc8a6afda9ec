#ifndef GRIDCAST_CONFIG_HPP
#define GRIDCAST_CONFIG_HPP

#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridcast/backtest.hpp"
#include "gridcast/common.hpp"
#include "gridcast/synth.hpp"

namespace gridcast {

struct DataConfig {
  std::string source = "synth";  // "synth" | "csv"
  std::string csv_path;
  std::map<std::string, std::string> schema;  // file column -> canonical
  SynthConfig synth;
};

struct OutputConfig {
  std::string dir = "out";
  bool plots = true;
};

// Full experiment description; every component invariant is validated
// before any work starts.
struct RunConfig {
  std::uint64_t seed = 42;
  std::string region = "synthetic";
  DataConfig data;
  FeatureSpec features;
  KanSettings kan;
  GbtConfig gbt;
  double ensemble_grid_step = 0.05;
  std::size_t n_folds = 4;
  std::size_t fold_len = 168;
  double evt_quantile = 0.95;
  std::vector<double> ablation_alphas = {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  std::vector<std::string> models = all_model_names();
  OutputConfig output;

  BacktestSettings backtest_settings() const {
    BacktestSettings s;
    s.features = features;
    s.kan = kan;
    s.gbt = gbt;
    s.ensemble_grid_step = ensemble_grid_step;
    s.n_folds = n_folds;
    s.fold_len = fold_len;
    s.evt_quantile = evt_quantile;
    s.ablation_alphas = ablation_alphas;
    s.seed = seed;
    s.models = models;
    s.config_hash = to_hex(hash());
    return s;
  }

  json to_json_canonical() const;
  std::uint64_t hash() const { return fnv1a(to_json_canonical().dump()); }

  void validate() const { backtest_settings().validate(); }
};

namespace detail {

inline void reject_unknown_keys(const json& j, const std::string& path,
                                const std::set<std::string>& allowed) {
  if (!j.is_object()) {
    throw ConfigError(path + ": expected an object");
  }
  for (const auto& [key, _] : j.items()) {
    if (allowed.find(key) == allowed.end()) {
      throw ConfigError(path + "." + key + ": unknown key");
    }
  }
}

template <typename T>
T get_or(const json& j, const std::string& key, const std::string& path,
         T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const std::exception&) {
    throw ConfigError(path + "." + key + ": wrong type");
  }
}

}  // namespace detail

inline RunConfig parse_run_config(const json& j) {
  using detail::get_or;
  using detail::reject_unknown_keys;

  RunConfig cfg;
  reject_unknown_keys(j, "config",
                      {"seed", "region", "data", "features", "kan", "gbt",
                       "ensemble", "backtest", "models", "output"});
  cfg.seed = get_or<std::uint64_t>(j, "seed", "config", cfg.seed);
  cfg.region = get_or<std::string>(j, "region", "config", cfg.region);

  if (j.contains("data")) {
    const json& jd = j.at("data");
    reject_unknown_keys(jd, "config.data", {"source", "csv", "synth"});
    cfg.data.source =
        get_or<std::string>(jd, "source", "config.data", cfg.data.source);
    if (cfg.data.source != "synth" && cfg.data.source != "csv") {
      throw ConfigError("config.data.source: must be 'synth' or 'csv'");
    }
    if (jd.contains("csv")) {
      const json& jc = jd.at("csv");
      reject_unknown_keys(jc, "config.data.csv", {"path", "schema"});
      cfg.data.csv_path =
          get_or<std::string>(jc, "path", "config.data.csv", "");
      if (jc.contains("schema")) {
        if (!jc.at("schema").is_object()) {
          throw ConfigError("config.data.csv.schema: expected an object");
        }
        for (const auto& [k, v] : jc.at("schema").items()) {
          if (!v.is_string()) {
            throw ConfigError("config.data.csv.schema." + k +
                              ": expected a string");
          }
          cfg.data.schema[k] = v.get<std::string>();
        }
      }
    }
    if (jd.contains("synth")) {
      const json& js = jd.at("synth");
      reject_unknown_keys(
          js, "config.data.synth",
          {"hours", "seed", "daily_amplitude", "weekly_amplitude",
           "base_price", "demand_coupling", "spike_prob", "spike_scale",
           "noise_sd", "price_cap", "price_floor"});
      SynthConfig& s = cfg.data.synth;
      const std::string p = "config.data.synth";
      s.n_hours = get_or<std::size_t>(js, "hours", p, s.n_hours);
      s.seed = get_or<std::uint64_t>(js, "seed", p, cfg.seed);
      s.daily_amplitude =
          get_or<double>(js, "daily_amplitude", p, s.daily_amplitude);
      s.weekly_amplitude =
          get_or<double>(js, "weekly_amplitude", p, s.weekly_amplitude);
      s.base_price = get_or<double>(js, "base_price", p, s.base_price);
      s.demand_coupling =
          get_or<double>(js, "demand_coupling", p, s.demand_coupling);
      s.spike_prob = get_or<double>(js, "spike_prob", p, s.spike_prob);
      s.spike_scale = get_or<double>(js, "spike_scale", p, s.spike_scale);
      s.noise_sd = get_or<double>(js, "noise_sd", p, s.noise_sd);
      s.price_cap = get_or<double>(js, "price_cap", p, s.price_cap);
      s.price_floor = get_or<double>(js, "price_floor", p, s.price_floor);
    } else {
      cfg.data.synth.seed = cfg.seed;
    }
  } else {
    cfg.data.synth.seed = cfg.seed;
  }
  if (cfg.data.source == "csv" && cfg.data.csv_path.empty()) {
    throw ConfigError("config.data.csv.path: required when source is 'csv'");
  }

  if (j.contains("features")) {
    const json& jf = j.at("features");
    reject_unknown_keys(jf, "config.features",
                        {"lookback", "horizon", "price_lags", "exog_lags",
                         "include_full_window"});
    const std::string p = "config.features";
    cfg.features.lookback =
        get_or<std::size_t>(jf, "lookback", p, cfg.features.lookback);
    cfg.features.horizon =
        get_or<std::size_t>(jf, "horizon", p, cfg.features.horizon);
    cfg.features.price_lags = get_or<std::vector<std::size_t>>(
        jf, "price_lags", p, cfg.features.price_lags);
    cfg.features.exog_lags = get_or<std::vector<std::size_t>>(
        jf, "exog_lags", p, cfg.features.exog_lags);
    cfg.features.include_full_window = get_or<bool>(
        jf, "include_full_window", p, cfg.features.include_full_window);
  }

  if (j.contains("kan")) {
    const json& jk = j.at("kan");
    reject_unknown_keys(jk, "config.kan",
                        {"hidden", "grid_size", "spline_order", "max_steps",
                         "patience", "learning_rate", "batch_size"});
    const std::string p = "config.kan";
    cfg.kan.hidden =
        get_or<std::vector<std::size_t>>(jk, "hidden", p, cfg.kan.hidden);
    cfg.kan.grid_size = get_or<int>(jk, "grid_size", p, cfg.kan.grid_size);
    cfg.kan.spline_order =
        get_or<int>(jk, "spline_order", p, cfg.kan.spline_order);
    cfg.kan.train.max_steps =
        get_or<int>(jk, "max_steps", p, cfg.kan.train.max_steps);
    cfg.kan.train.patience =
        get_or<int>(jk, "patience", p, cfg.kan.train.patience);
    cfg.kan.train.adam.learning_rate = get_or<double>(
        jk, "learning_rate", p, cfg.kan.train.adam.learning_rate);
    cfg.kan.train.batch_size =
        get_or<std::size_t>(jk, "batch_size", p, cfg.kan.train.batch_size);
  }

  if (j.contains("gbt")) {
    const json& jg = j.at("gbt");
    reject_unknown_keys(jg, "config.gbt",
                        {"n_estimators", "max_depth", "learning_rate",
                         "subsample", "colsample", "lambda", "gamma",
                         "min_child_weight"});
    const std::string p = "config.gbt";
    cfg.gbt.n_estimators =
        get_or<int>(jg, "n_estimators", p, cfg.gbt.n_estimators);
    cfg.gbt.max_depth = get_or<int>(jg, "max_depth", p, cfg.gbt.max_depth);
    cfg.gbt.learning_rate =
        get_or<double>(jg, "learning_rate", p, cfg.gbt.learning_rate);
    cfg.gbt.subsample = get_or<double>(jg, "subsample", p, cfg.gbt.subsample);
    cfg.gbt.colsample = get_or<double>(jg, "colsample", p, cfg.gbt.colsample);
    cfg.gbt.lambda = get_or<double>(jg, "lambda", p, cfg.gbt.lambda);
    cfg.gbt.gamma = get_or<double>(jg, "gamma", p, cfg.gbt.gamma);
    cfg.gbt.min_child_weight =
        get_or<double>(jg, "min_child_weight", p, cfg.gbt.min_child_weight);
  }

  if (j.contains("ensemble")) {
    const json& je = j.at("ensemble");
    reject_unknown_keys(je, "config.ensemble", {"grid_step"});
    cfg.ensemble_grid_step = get_or<double>(je, "grid_step", "config.ensemble",
                                            cfg.ensemble_grid_step);
  }

  if (j.contains("backtest")) {
    const json& jb = j.at("backtest");
    reject_unknown_keys(jb, "config.backtest",
                        {"folds", "fold_hours", "evt_quantile",
                         "ablation_alphas"});
    const std::string p = "config.backtest";
    cfg.n_folds = get_or<std::size_t>(jb, "folds", p, cfg.n_folds);
    cfg.fold_len = get_or<std::size_t>(jb, "fold_hours", p, cfg.fold_len);
    cfg.evt_quantile =
        get_or<double>(jb, "evt_quantile", p, cfg.evt_quantile);
    cfg.ablation_alphas = get_or<std::vector<double>>(jb, "ablation_alphas", p,
                                                      cfg.ablation_alphas);
  }

  cfg.models =
      detail::get_or<std::vector<std::string>>(j, "models", "config",
                                               cfg.models);

  if (j.contains("output")) {
    const json& jo = j.at("output");
    reject_unknown_keys(jo, "config.output", {"dir", "plots"});
    cfg.output.dir = get_or<std::string>(jo, "dir", "config.output",
                                         cfg.output.dir);
    cfg.output.plots =
        get_or<bool>(jo, "plots", "config.output", cfg.output.plots);
  }

  cfg.validate();
  cfg.data.synth.validate();
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("invalid JSON in '" + path + "': " + e.what());
  }
  return parse_run_config(j);
}

inline json RunConfig::to_json_canonical() const {
  json j;
  j["seed"] = seed;
  j["region"] = region;
  j["data"] = {{"source", data.source}};
  if (data.source == "csv") {
    json schema = json::object();
    for (const auto& [k, v] : data.schema) schema[k] = v;
    j["data"]["csv"] = {{"path", data.csv_path}, {"schema", schema}};
  } else {
    const SynthConfig& s = data.synth;
    j["data"]["synth"] = {{"hours", s.n_hours},
                          {"seed", s.seed},
                          {"daily_amplitude", s.daily_amplitude},
                          {"weekly_amplitude", s.weekly_amplitude},
                          {"base_price", s.base_price},
                          {"demand_coupling", s.demand_coupling},
                          {"spike_prob", s.spike_prob},
                          {"spike_scale", s.spike_scale},
                          {"noise_sd", s.noise_sd},
                          {"price_cap", s.price_cap},
                          {"price_floor", s.price_floor}};
  }
  j["features"] = {{"lookback", features.lookback},
                   {"horizon", features.horizon},
                   {"price_lags", features.price_lags},
                   {"exog_lags", features.exog_lags},
                   {"include_full_window", features.include_full_window}};
  j["kan"] = {{"hidden", kan.hidden},
              {"grid_size", kan.grid_size},
              {"spline_order", kan.spline_order},
              {"max_steps", kan.train.max_steps},
              {"patience", kan.train.patience},
              {"learning_rate", kan.train.adam.learning_rate},
              {"batch_size", kan.train.batch_size}};
  j["gbt"] = {{"n_estimators", gbt.n_estimators},
              {"max_depth", gbt.max_depth},
              {"learning_rate", gbt.learning_rate},
              {"subsample", gbt.subsample},
              {"colsample", gbt.colsample},
              {"lambda", gbt.lambda},
              {"gamma", gbt.gamma},
              {"min_child_weight", gbt.min_child_weight}};
  j["ensemble"] = {{"grid_step", ensemble_grid_step}};
  j["backtest"] = {{"folds", n_folds},
                   {"fold_hours", fold_len},
                   {"evt_quantile", evt_quantile},
                   {"ablation_alphas", ablation_alphas}};
  j["models"] = models;
  // output location is deliberately excluded: the hash identifies the
  // experiment, not where its files land
  return j;
}

}  // namespace gridcast

#endif  // GRIDCAST_CONFIG_HPP
