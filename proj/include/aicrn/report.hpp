// Copyright 2026 The AICRN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef AICRN_REPORT_HPP_
#define AICRN_REPORT_HPP_

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aicrn/data.hpp"
#include "aicrn/error.hpp"
#include "aicrn/timeutil.hpp"

namespace aicrn {

/// Least-squares slope of values against times; nullopt with fewer than two
/// points or when every time is equal.
inline std::optional<double> trend_slope(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size()) throw DimensionError("trend_slope: time and value lengths differ");
  if (t.size() < 2) return std::nullopt;
  const double n = static_cast<double>(t.size());
  const double tm = std::accumulate(t.begin(), t.end(), 0.0) / n;
  const double ym = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sty = 0.0, stt = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    sty += (t[i] - tm) * (y[i] - ym);
    stt += (t[i] - tm) * (t[i] - tm);
  }
  if (stt == 0.0) return std::nullopt;
  return sty / stt;
}

struct PredictionTable {
  std::vector<std::string> parameters;
  std::vector<std::string> record_ids;
  std::vector<std::string> timestamps;
  std::vector<std::vector<std::optional<double>>> values;  // [parameter][row]
};

inline PredictionTable read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open predictions " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IngestionError("empty predictions file " + path.string());
  const auto header = detail::split_csv_line(line);
  if (header.size() < 3 || detail::trim(header[0]) != "record_id" || detail::trim(header[1]) != "timestamp") {
    throw IngestionError("predictions header must start with record_id,timestamp and name at least one parameter");
  }
  PredictionTable t;
  for (std::size_t i = 2; i < header.size(); ++i) t.parameters.push_back(detail::trim(header[i]));
  t.values.resize(t.parameters.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) {
      throw IngestionError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                           std::to_string(header.size()) + " cells");
    }
    t.record_ids.push_back(detail::trim(cells[0]));
    t.timestamps.push_back(detail::trim(cells[1]));
    for (std::size_t p = 0; p < t.parameters.size(); ++p) t.values[p].push_back(parse_number(cells[p + 2]));
  }
  return t;
}

struct SeriesSummary {
  std::string parameter;
  std::size_t n = 0;
  double min = 0.0, max = 0.0, mean = 0.0;
  std::optional<double> slope_per_day;
};

/// Writes <out>/<parameter>.csv (time,value sorted by time) for every
/// parameter plus summary.csv and summary.json. Every row needs a timestamp.
inline std::vector<SeriesSummary> write_report(const PredictionTable& table, const std::filesystem::path& out_dir) {
  std::vector<double> secs(table.timestamps.size());
  for (std::size_t i = 0; i < secs.size(); ++i) {
    const auto s = parse_iso8601(table.timestamps[i]);
    if (table.timestamps[i].empty() || !s) throw IngestionError("report requires timestamps");
    secs[i] = *s;
  }
  std::vector<std::size_t> order(secs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return secs[a] < secs[b]; });

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create report directory " + out_dir.string() + ": " + ec.message());

  std::vector<SeriesSummary> summaries;
  for (std::size_t p = 0; p < table.parameters.size(); ++p) {
    const auto path = out_dir / (table.parameters[p] + ".csv");
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot write " + path.string());
    f << "time,value\n";
    SeriesSummary s;
    s.parameter = table.parameters[p];
    std::vector<double> days, vals;
    for (std::size_t i : order) {
      const auto v = table.values[p][i];
      if (!v) continue;
      f << table.timestamps[i] << ',' << format_exact(*v) << '\n';
      days.push_back((secs[i] - secs[order.front()]) / 86400.0);
      vals.push_back(*v);
    }
    s.n = vals.size();
    if (!vals.empty()) {
      s.min = *std::min_element(vals.begin(), vals.end());
      s.max = *std::max_element(vals.begin(), vals.end());
      s.mean = std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
    }
    s.slope_per_day = trend_slope(days, vals);
    summaries.push_back(s);
  }

  std::ofstream csv(out_dir / "summary.csv", std::ios::trunc);
  if (!csv) throw IoError("cannot write summary.csv");
  csv << "parameter,n,min,max,mean,trend_slope_per_day\n";
  nlohmann::json j = nlohmann::json::array();
  for (const auto& s : summaries) {
    csv << s.parameter << ',' << s.n << ',' << format_exact(s.min) << ',' << format_exact(s.max) << ','
        << format_exact(s.mean) << ',' << (s.slope_per_day ? format_exact(*s.slope_per_day) : "") << '\n';
    j.push_back({{"parameter", s.parameter},
                 {"n", s.n},
                 {"min", s.min},
                 {"max", s.max},
                 {"mean", s.mean},
                 {"trend_slope_per_day", s.slope_per_day ? nlohmann::json(*s.slope_per_day) : nlohmann::json(nullptr)}});
  }
  std::ofstream js(out_dir / "summary.json", std::ios::trunc);
  if (!js) throw IoError("cannot write summary.json");
  js << j.dump(2) << '\n';
  return summaries;
}

}  // namespace aicrn

#endif  // AICRN_REPORT_HPP_
