#ifndef GRIDCAST_SERIALIZE_HPP
#define GRIDCAST_SERIALIZE_HPP

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridcast/common.hpp"
#include "gridcast/features.hpp"
#include "gridcast/gbt.hpp"
#include "gridcast/kan.hpp"
#include "gridcast/transform.hpp"

namespace gridcast {

using json = nlohmann::json;

// --- KAN -------------------------------------------------------------

inline json to_json(const KanNetwork& net) {
  json j;
  j["type"] = "kan_network";
  j["widths"] = net.widths();
  j["grid"] = {{"lo", net.grid().lo},
               {"hi", net.grid().hi},
               {"grid_size", net.grid().grid_size},
               {"order", net.grid().order}};
  json layers = json::array();
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const KanLayer& layer = net.layer(l);
    json jl;
    jl["in"] = layer.in_dim();
    jl["out"] = layer.out_dim();
    jl["coeffs_per_edge"] = layer.coeff_count();
    // packed order: index (p * coeffs_per_edge + i) * out + q
    jl["coef"] = layer.coef;
    jl["w_spline"] = layer.w_spline;
    jl["w_base"] = layer.w_base;
    layers.push_back(std::move(jl));
  }
  j["layers"] = std::move(layers);
  return j;
}

inline KanNetwork kan_from_json(const json& j) {
  if (j.value("type", "") != "kan_network") {
    throw DataError("model file is not a kan_network document");
  }
  const std::vector<std::size_t> widths = j.at("widths").get<std::vector<std::size_t>>();
  const json& jg = j.at("grid");
  SplineGrid grid(jg.at("lo").get<double>(), jg.at("hi").get<double>(),
                  jg.at("grid_size").get<int>(), jg.at("order").get<int>());
  KanNetwork net(widths, grid, 0);
  const json& layers = j.at("layers");
  if (layers.size() != net.layer_count()) {
    throw DataError("kan model: layer count mismatch");
  }
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    KanLayer& layer = net.layer(l);
    const json& jl = layers.at(l);
    if (jl.at("in").get<std::size_t>() != layer.in_dim() ||
        jl.at("out").get<std::size_t>() != layer.out_dim() ||
        jl.at("coeffs_per_edge").get<std::size_t>() != layer.coeff_count()) {
      throw DataError("kan model: layer shape mismatch");
    }
    auto load = [&](const char* key, std::vector<double>& dst) {
      std::vector<double> v = jl.at(key).get<std::vector<double>>();
      if (v.size() != dst.size()) {
        throw DataError(std::string("kan model: array size mismatch for ") +
                        key);
      }
      dst = std::move(v);
    };
    load("coef", layer.coef);
    load("w_spline", layer.w_spline);
    load("w_base", layer.w_base);
  }
  return net;
}

// --- GBT -------------------------------------------------------------

inline json to_json(const RegressionTree& tree) {
  json nodes = json::array();
  for (const TreeNode& n : tree.nodes) {
    if (n.is_leaf()) {
      nodes.push_back({{"w", n.weight}});
    } else {
      nodes.push_back(
          {{"f", n.feature}, {"t", n.threshold}, {"l", n.left}, {"r", n.right}});
    }
  }
  return nodes;
}

inline RegressionTree tree_from_json(const json& j) {
  RegressionTree tree;
  tree.nodes.reserve(j.size());
  for (const json& jn : j) {
    TreeNode n;
    if (jn.contains("w")) {
      n.weight = jn.at("w").get<double>();
    } else {
      n.feature = jn.at("f").get<int>();
      n.threshold = jn.at("t").get<double>();
      n.left = jn.at("l").get<int>();
      n.right = jn.at("r").get<int>();
    }
    tree.nodes.push_back(n);
  }
  if (tree.nodes.empty()) throw DataError("gbt model: empty tree");
  return tree;
}

inline json to_json(const Booster& b) {
  json j;
  j["type"] = "gbt_booster";
  j["base_score"] = b.base_score;
  j["learning_rate"] = b.learning_rate;
  j["n_features"] = b.n_features;
  json trees = json::array();
  for (const auto& t : b.trees) trees.push_back(to_json(t));
  j["trees"] = std::move(trees);
  return j;
}

inline Booster booster_from_json(const json& j) {
  if (j.value("type", "") != "gbt_booster") {
    throw DataError("model file is not a gbt_booster document");
  }
  Booster b;
  b.base_score = j.at("base_score").get<double>();
  b.learning_rate = j.at("learning_rate").get<double>();
  b.n_features = j.at("n_features").get<std::size_t>();
  for (const json& jt : j.at("trees")) b.trees.push_back(tree_from_json(jt));
  return b;
}

inline json to_json(const MultiBooster& mb) {
  json j;
  j["type"] = "gbt_multi_booster";
  j["horizon"] = mb.horizon();
  json boosters = json::array();
  for (const auto& b : mb.boosters) boosters.push_back(to_json(b));
  j["boosters"] = std::move(boosters);
  return j;
}

inline MultiBooster multi_booster_from_json(const json& j) {
  if (j.value("type", "") != "gbt_multi_booster") {
    throw DataError("model file is not a gbt_multi_booster document");
  }
  MultiBooster mb;
  for (const json& jb : j.at("boosters")) {
    mb.boosters.push_back(booster_from_json(jb));
  }
  if (mb.boosters.size() != j.at("horizon").get<std::size_t>()) {
    throw DataError("gbt model: horizon mismatch");
  }
  return mb;
}

// --- feature pipeline state -------------------------------------------

// Everything needed to turn raw history into model inputs at forecast
// time: the feature spec, the exogenous series the features were built
// from, the training-fitted scaler, and the target transform.
struct PipelineState {
  FeatureSpec spec;
  std::vector<std::string> exog_used;
  ScalerParams scaler;
  TargetTransform transform;
  std::string region = "synthetic";
};

inline json to_json(const PipelineState& p) {
  json j;
  j["type"] = "pipeline";
  j["region"] = p.region;
  j["features"] = {{"lookback", p.spec.lookback},
                   {"horizon", p.spec.horizon},
                   {"price_lags", p.spec.price_lags},
                   {"exog_lags", p.spec.exog_lags},
                   {"include_full_window", p.spec.include_full_window}};
  j["exog_used"] = p.exog_used;
  j["scaler"] = {{"min", p.scaler.min}, {"max", p.scaler.max}};
  j["target_transform"] = p.transform.name();
  return j;
}

inline PipelineState pipeline_from_json(const json& j) {
  if (j.value("type", "") != "pipeline") {
    throw DataError("file is not a pipeline document");
  }
  PipelineState p;
  p.region = j.at("region").get<std::string>();
  const json& jf = j.at("features");
  p.spec.lookback = jf.at("lookback").get<std::size_t>();
  p.spec.horizon = jf.at("horizon").get<std::size_t>();
  p.spec.price_lags = jf.at("price_lags").get<std::vector<std::size_t>>();
  p.spec.exog_lags = jf.at("exog_lags").get<std::vector<std::size_t>>();
  p.spec.include_full_window = jf.at("include_full_window").get<bool>();
  p.exog_used = j.at("exog_used").get<std::vector<std::string>>();
  p.scaler.min = j.at("scaler").at("min").get<std::vector<double>>();
  p.scaler.max = j.at("scaler").at("max").get<std::vector<double>>();
  p.transform =
      TargetTransform::from_name(j.at("target_transform").get<std::string>());
  p.spec.validate();
  return p;
}

// --- file helpers ------------------------------------------------------

inline void save_json(const json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out) throw DataError("write failed for '" + path + "'");
}

inline json load_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw DataError("invalid JSON in '" + path + "': " + e.what());
  }
  return j;
}

// Stable digest of a model's parameters, for leakage and determinism checks.
template <typename Model>
std::uint64_t param_hash(const Model& m) {
  return fnv1a(to_json(m).dump());
}

}  // namespace gridcast

#endif  // GRIDCAST_SERIALIZE_HPP
