#ifndef GRIDCAST_REPORT_HPP
#define GRIDCAST_REPORT_HPP

#include <algorithm>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridcast/backtest.hpp"
#include "gridcast/common.hpp"

namespace gridcast {

inline json to_json(const MetricSet& m) {
  return {{"mae", m.mae}, {"rmse", m.rmse}, {"rmae", m.rmae}};
}

inline json to_json(const ExtremeReport& e) {
  json j;
  j["quantile"] = e.quantile;
  j["threshold"] = e.threshold;
  j["exceedance_count"] = e.exceedance_count;
  if (e.defined) {
    j["extreme_mae"] = e.extreme_mae;
  } else {
    j["extreme_mae"] = nullptr;
  }
  return j;
}

inline json to_json(const BacktestReport& r) {
  json j;
  j["region"] = r.region;
  j["seed"] = r.seed;
  j["config_hash"] = r.config_hash;
  j["data_start"] = r.data_start;
  j["data_end"] = r.data_end;
  j["models"] = r.models;

  json folds = json::array();
  for (const auto& f : r.folds) {
    json jf;
    jf["fold"] = f.fold;
    jf["test_start"] = format_hour_stamp(f.test_start);
    if (!f.alpha_table.empty()) {
      jf["alpha"] = f.alpha;
      json table = json::array();
      for (const auto& row : f.alpha_table) {
        table.push_back({{"alpha", row.alpha}, {"mae", row.mae}});
      }
      jf["alpha_table"] = std::move(table);
    }
    json val = json::object();
    for (const auto& [name, v] : f.val_mae) val[name] = v;
    jf["val_mae"] = std::move(val);
    json metrics = json::object();
    for (const auto& [name, m] : f.metrics) metrics[name] = to_json(m);
    jf["metrics"] = std::move(metrics);
    json hashes = json::object();
    for (const auto& [name, h] : f.param_hash) hashes[name] = h;
    jf["param_hash"] = std::move(hashes);
    folds.push_back(std::move(jf));
  }
  j["folds"] = std::move(folds);

  json pooled = json::object();
  for (const auto& [name, m] : r.pooled) pooled[name] = to_json(m);
  j["pooled"] = std::move(pooled);

  json extreme = json::object();
  for (const auto& [name, e] : r.extreme) extreme[name] = to_json(e);
  j["extreme"] = std::move(extreme);

  json ablation = json::array();
  for (const auto& row : r.ablation) {
    json ja = to_json(row.metrics);
    ja["alpha_kan"] = row.alpha_kan;
    ja["alpha_gbt"] = row.alpha_gbt;
    ablation.push_back(std::move(ja));
  }
  j["ablation"] = std::move(ablation);

  j["fold_test_starts"] = r.fold_start_stamps;
  j["actual"] = r.actual;
  json fc = json::object();
  for (const auto& [name, folds_fc] : r.forecasts) fc[name] = folds_fc;
  j["forecasts"] = std::move(fc);
  return j;
}

// Flat per-fold metric rows plus pooled rows; byte-stable across runs.
inline std::string metrics_csv(const BacktestReport& r) {
  std::string out = "fold,model,mae,rmse,rmae\n";
  for (const auto& f : r.folds) {
    for (const auto& [name, m] : f.metrics) {
      out += std::to_string(f.fold) + ',' + name + ',' + format_double(m.mae) +
             ',' + format_double(m.rmse) + ',' + format_double(m.rmae) + '\n';
    }
  }
  for (const auto& [name, m] : r.pooled) {
    out += "pooled," + name + ',' + format_double(m.mae) + ',' +
           format_double(m.rmse) + ',' + format_double(m.rmae) + '\n';
  }
  return out;
}

inline void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << body;
  if (!out) throw DataError("write failed for '" + path + "'");
}

namespace detail {

inline const char* model_color(const std::string& name) {
  if (name == "hybrid") return "#c0392b";
  if (name == "kan") return "#2980b9";
  if (name == "gbt") return "#27ae60";
  if (name == "naive") return "#7f8c8d";
  if (name == "seasonal_naive") return "#8e44ad";
  if (name == "linear_arx") return "#d35400";
  return "#16a085";
}

}  // namespace detail

// One line chart per test week: the actual price and each model forecast.
inline std::string fold_svg(const std::vector<double>& actual,
                            const std::map<std::string, std::vector<double>>&
                                forecasts,
                            const std::string& title) {
  const double width = 960.0, height = 420.0;
  const double ml = 64.0, mr = 16.0, mt = 34.0, mb = 34.0;
  const double px = width - ml - mr;
  const double py = height - mt - mb;

  double lo = actual.empty() ? 0.0 : actual[0];
  double hi = lo;
  auto widen = [&](const std::vector<double>& v) {
    for (double x : v) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  };
  widen(actual);
  for (const auto& [_, v] : forecasts) widen(v);
  if (hi <= lo) hi = lo + 1.0;
  const double span = hi - lo;
  lo -= 0.05 * span;
  hi += 0.05 * span;

  const std::size_t n = actual.size();
  auto sx = [&](std::size_t i) {
    return ml + px * static_cast<double>(i) /
                    static_cast<double>(n > 1 ? n - 1 : 1);
  };
  auto sy = [&](double v) { return mt + py * (1.0 - (v - lo) / (hi - lo)); };

  auto polyline = [&](const std::vector<double>& v, const char* color,
                      double w) {
    std::string s = "<polyline fill=\"none\" stroke=\"" + std::string(color) +
                    "\" stroke-width=\"" + format_double(w) + "\" points=\"";
    for (std::size_t i = 0; i < v.size(); ++i) {
      s += format_double(sx(i)) + ',' + format_double(sy(v[i])) + ' ';
    }
    s += "\"/>\n";
    return s;
  };

  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"960\" "
      "height=\"420\" viewBox=\"0 0 960 420\">\n"
      "<rect width=\"960\" height=\"420\" fill=\"white\"/>\n";
  svg += "<text x=\"" + format_double(ml) +
         "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" + title +
         "</text>\n";
  // axes
  svg += "<line x1=\"" + format_double(ml) + "\" y1=\"" + format_double(mt) +
         "\" x2=\"" + format_double(ml) + "\" y2=\"" +
         format_double(mt + py) + "\" stroke=\"#222\"/>\n";
  svg += "<line x1=\"" + format_double(ml) + "\" y1=\"" +
         format_double(mt + py) + "\" x2=\"" + format_double(ml + px) +
         "\" y2=\"" + format_double(mt + py) + "\" stroke=\"#222\"/>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double v = lo + (hi - lo) * tick / 4.0;
    const double y = sy(v);
    svg += "<text x=\"4\" y=\"" + format_double(y + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" +
           format_double(std::round(v * 100.0) / 100.0) + "</text>\n";
    svg += "<line x1=\"" + format_double(ml - 4) + "\" y1=\"" +
           format_double(y) + "\" x2=\"" + format_double(ml) + "\" y2=\"" +
           format_double(y) + "\" stroke=\"#222\"/>\n";
  }
  svg += "<text x=\"" + format_double(ml + px / 2 - 30) + "\" y=\"" +
         format_double(height - 8) +
         "\" font-family=\"sans-serif\" font-size=\"11\">test hour</text>\n";

  svg += polyline(actual, "#111111", 1.8);
  for (const auto& [name, v] : forecasts) {
    svg += polyline(v, detail::model_color(name), 1.2);
  }

  // legend
  double lx = ml + 8.0, ly = mt + 14.0;
  auto legend_row = [&](const std::string& label, const char* color) {
    std::string s = "<rect x=\"" + format_double(lx) + "\" y=\"" +
                    format_double(ly - 9) +
                    "\" width=\"14\" height=\"4\" fill=\"" + color + "\"/>";
    s += "<text x=\"" + format_double(lx + 20) + "\" y=\"" +
         format_double(ly) +
         "\" font-family=\"sans-serif\" font-size=\"11\">" + label +
         "</text>\n";
    ly += 15.0;
    return s;
  };
  svg += legend_row("actual", "#111111");
  for (const auto& [name, _] : forecasts) {
    svg += legend_row(name, detail::model_color(name));
  }
  svg += "</svg>\n";
  return svg;
}

// Writes report.json, metrics.csv and (optionally) one SVG per fold under
// out_dir, named {region}_fold{k}.svg.
inline void write_report_files(const BacktestReport& r,
                               const std::string& out_dir, bool plots) {
  write_text_file(out_dir + "/report.json", to_json(r).dump(2) + "\n");
  write_text_file(out_dir + "/metrics.csv", metrics_csv(r));
  if (!plots) return;
  for (std::size_t k = 0; k < r.actual.size(); ++k) {
    std::map<std::string, std::vector<double>> fc;
    for (const auto& [name, folds_fc] : r.forecasts) {
      fc[name] = folds_fc[k];
    }
    const std::string title = r.region + " test week starting " +
                              (k < r.fold_start_stamps.size()
                                   ? r.fold_start_stamps[k]
                                   : std::to_string(k));
    write_text_file(
        out_dir + "/" + r.region + "_fold" + std::to_string(k) + ".svg",
        fold_svg(r.actual[k], fc, title));
  }
}

}  // namespace gridcast

#endif  // GRIDCAST_REPORT_HPP
