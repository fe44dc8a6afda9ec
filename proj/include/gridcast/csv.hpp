#ifndef GRIDCAST_CSV_HPP
#define GRIDCAST_CSV_HPP

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gridcast/timeseries.hpp"

namespace gridcast {

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_csv_double(const std::string& s, std::size_t line_no,
                               const std::string& col) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw DataError("line " + std::to_string(line_no) + ": column '" + col +
                    "': unparseable number '" + s + "'");
  }
  return v;
}

}  // namespace detail

// Reads an aligned multi-series CSV. The header must contain `timestamp`;
// `schema` maps file column names to canonical series names (identity for
// columns not mentioned). Sub-hourly grids are averaged to hourly.
inline Dataset ingest_csv(const std::string& path,
                          const std::map<std::string, std::string>& schema = {},
                          const std::string& region = "synthetic") {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> header = detail::split_csv_line(line);
  int ts_col = -1;
  std::vector<std::string> col_names(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    auto it = schema.find(header[c]);
    col_names[c] = (it != schema.end()) ? it->second : header[c];
    if (col_names[c] == "timestamp") ts_col = static_cast<int>(c);
  }
  if (ts_col < 0) throw DataError("'" + path + "': missing timestamp column");

  bool has_price = false;
  for (const auto& n : col_names) has_price |= (n == "price");
  if (!has_price) throw DataError("'" + path + "': missing column 'price'");

  std::vector<std::int64_t> minutes;
  std::vector<std::vector<double>> columns(header.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = detail::split_csv_line(line);
    if (fields.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    minutes.push_back(parse_minute_stamp(fields[static_cast<std::size_t>(ts_col)]));
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (static_cast<int>(c) == ts_col) continue;
      const double v = detail::parse_csv_double(fields[c], line_no, header[c]);
      if (!std::isfinite(v)) {
        throw DataError("line " + std::to_string(line_no) + ": column '" +
                        header[c] + "': non-finite value");
      }
      columns[c].push_back(v);
    }
  }
  if (minutes.size() < 2) throw DataError("'" + path + "': needs >= 2 rows");

  for (std::size_t i = 1; i < minutes.size(); ++i) {
    if (minutes[i] == minutes[i - 1]) {
      throw DataError("duplicate timestamp " +
                      format_minute_stamp(minutes[i]));
    }
    if (minutes[i] < minutes[i - 1]) {
      throw DataError("timestamps not ascending at " +
                      format_minute_stamp(minutes[i]));
    }
  }
  const std::int64_t step = minutes[1] - minutes[0];
  for (std::size_t i = 1; i < minutes.size(); ++i) {
    const std::int64_t expected = minutes[0] + static_cast<std::int64_t>(i) * step;
    if (minutes[i] != expected) {
      throw DataError("gap in grid: first missing timestamp " +
                      format_minute_stamp(expected));
    }
  }

  auto make_series = [&](const std::vector<double>& vals) {
    if (step == 60) {
      if (minutes[0] % 60 != 0) {
        throw DataError("hourly grid not hour-aligned, starts at " +
                        format_minute_stamp(minutes[0]));
      }
      return TimeSeries(minutes[0] / 60, vals);
    }
    if (step < 60) {
      return aggregate_to_hourly(minutes[0], static_cast<int>(step), vals);
    }
    throw DataError("grid step of " + std::to_string(step) +
                    " minutes is coarser than hourly");
  };

  Dataset ds;
  ds.region = region;
  bool price_set = false;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (static_cast<int>(c) == ts_col) continue;
    if (col_names[c] == "price") {
      ds.price = make_series(columns[c]);
      price_set = true;
    } else {
      ds.exog.add(col_names[c], make_series(columns[c]));
    }
  }
  if (!price_set) throw DataError("'" + path + "': missing column 'price'");
  ds.validate_alignment();
  return ds;
}

// Writes a dataset in the same schema ingest_csv consumes.
inline void write_dataset_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "timestamp,price";
  for (const auto& [name, _] : ds.exog.items()) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out << format_hour_stamp(ds.start() + static_cast<HourStamp>(i)) << ','
        << format_double(ds.price[i]);
    for (const auto& [_, series] : ds.exog.items()) {
      out << ',' << format_double(series[i]);
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed for '" + path + "'");
}

}  // namespace gridcast

#endif  // GRIDCAST_CSV_HPP
