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

// ECG record ingestion and preparation: CSV interchange, lead selection,
// cleaning, per-lead z-scoring, seeded splits and minibatching.
//
// Metadata CSV (header required):
//   record_id,signal_path,sample_rate_hz,timestamp,pr_ms,qt_ms,qrs_ms,hr_bpm,rpa_mv,twa_mv
// An empty label cell means "missing". signal_path is relative to the
// metadata file's directory unless absolute.
//
// Signal CSV: a header row of lead names, then one row per sample (mV).

#ifndef AICRN_DATA_HPP_
#define AICRN_DATA_HPP_

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "aicrn/error.hpp"
#include "aicrn/layers.hpp"
#include "aicrn/tensor.hpp"

namespace aicrn {

// ---------------------------------------------------------------------------
// Targets

enum class Target { pr, qt, qrs, hr, rpa, twa };

inline constexpr std::array<Target, 6> kAllTargets = {Target::pr, Target::qt,  Target::qrs,
                                                      Target::hr, Target::rpa, Target::twa};

inline std::string_view target_name(Target t) {
  static constexpr std::array<std::string_view, 6> names = {"pr", "qt", "qrs", "hr", "rpa", "twa"};
  return names[static_cast<std::size_t>(t)];
}

/// Metadata column holding the target's label.
inline std::string_view target_column(Target t) {
  static constexpr std::array<std::string_view, 6> cols = {"pr_ms", "qt_ms", "qrs_ms", "hr_bpm", "rpa_mv", "twa_mv"};
  return cols[static_cast<std::size_t>(t)];
}

inline Target parse_target(std::string_view name) {
  for (Target t : kAllTargets) {
    if (name == target_name(t) || name == target_column(t)) return t;
  }
  throw ConfigError("unknown target '" + std::string(name) + "' (expected pr, qt, qrs, hr, rpa or twa)");
}

// ---------------------------------------------------------------------------
// Records

inline const std::array<std::string, 8>& canonical_leads() {
  static const std::array<std::string, 8> leads = {"I", "II", "V1", "V2", "V3", "V4", "V5", "V6"};
  return leads;
}

inline const std::array<std::string, 12>& standard_leads() {
  static const std::array<std::string, 12> leads = {"I",  "II", "III", "aVR", "aVL", "aVF",
                                                    "V1", "V2", "V3",  "V4",  "V5",  "V6"};
  return leads;
}

/// One subject's recording. `signal` is lead-major: signal[lead * length + t].
struct EcgRecord {
  std::string id;
  std::vector<std::string> lead_names;
  std::size_t length = 0;
  std::vector<double> signal;
  double sample_rate_hz = 100.0;
  std::optional<std::string> timestamp;
  std::array<std::optional<double>, 6> labels{};

  std::size_t n_leads() const { return lead_names.size(); }
  std::optional<double> label(Target t) const { return labels[static_cast<std::size_t>(t)]; }
  void set_label(Target t, double v) { labels[static_cast<std::size_t>(t)] = v; }
  std::span<const double> lead(std::size_t i) const { return {signal.data() + i * length, length}; }
  std::span<double> lead(std::size_t i) { return {signal.data() + i * length, length}; }
};

// ---------------------------------------------------------------------------
// Number formatting. Signals are written with 9 significant digits; labels
// use the shortest representation that round-trips exactly.

inline std::string format_signal_value(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
  return std::string(buf, end);
}

inline std::string format_exact(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

inline std::optional<double> parse_number(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// Value exactly as it reads back from the signal CSV.
inline double round_to_signal_precision(double v) { return *parse_number(format_signal_value(v)); }

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      return out;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

}  // namespace detail

inline constexpr std::array<std::string_view, 10> kMetadataColumns = {
    "record_id", "signal_path", "sample_rate_hz", "timestamp", "pr_ms",
    "qt_ms",     "qrs_ms",      "hr_bpm",         "rpa_mv",    "twa_mv"};

struct SignalTable {
  std::vector<std::string> lead_names;
  std::size_t length = 0;
  std::vector<double> signal;  // lead-major
};

inline SignalTable read_signal_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open signal file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IngestionError("empty signal file " + path.string());
  SignalTable table;
  for (auto& name : detail::split_csv_line(line)) table.lead_names.push_back(detail::trim(name));
  const std::size_t n = table.lead_names.size();
  std::vector<double> rows;  // sample-major as read
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto cells = detail::split_csv_line(line);
    if (cells.size() != n) {
      throw IngestionError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(n) +
                           " values, got " + std::to_string(cells.size()));
    }
    for (const auto& c : cells) {
      auto v = parse_number(c);
      if (!v) throw IngestionError(path.string() + ":" + std::to_string(line_no) + ": bad number '" + c + "'");
      rows.push_back(*v);
    }
  }
  table.length = n ? rows.size() / n : 0;
  table.signal.resize(rows.size());
  for (std::size_t t = 0; t < table.length; ++t)
    for (std::size_t l = 0; l < n; ++l) table.signal[l * table.length + t] = rows[t * n + l];
  return table;
}

inline void write_signal_csv(const std::filesystem::path& path, const EcgRecord& r) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write signal file " + path.string());
  for (std::size_t l = 0; l < r.n_leads(); ++l) out << (l ? "," : "") << r.lead_names[l];
  out << '\n';
  std::string row;
  for (std::size_t t = 0; t < r.length; ++t) {
    row.clear();
    for (std::size_t l = 0; l < r.n_leads(); ++l) {
      if (l) row += ',';
      row += format_signal_value(r.signal[l * r.length + t]);
    }
    out << row << '\n';
  }
  if (!out) throw IoError("failed writing signal file " + path.string());
}

inline void write_metadata_csv(const std::filesystem::path& path, const std::vector<EcgRecord>& records,
                               const std::vector<std::string>& signal_paths) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write metadata file " + path.string());
  for (std::size_t i = 0; i < kMetadataColumns.size(); ++i) out << (i ? "," : "") << kMetadataColumns[i];
  out << '\n';
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    out << r.id << ',' << signal_paths.at(i) << ',' << format_exact(r.sample_rate_hz) << ','
        << r.timestamp.value_or("");
    for (Target t : kAllTargets) {
      out << ',';
      if (auto v = r.label(t)) out << format_exact(*v);
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing metadata file " + path.string());
}

/// Loads every record listed in a metadata CSV, signals included, with the
/// leads exactly as stored in the signal files.
inline std::vector<EcgRecord> load_metadata(const std::filesystem::path& meta_path) {
  std::ifstream in(meta_path);
  if (!in) throw IngestionError("cannot open metadata file " + meta_path.string());
  std::string line;
  if (!std::getline(in, line)) throw IngestionError("empty metadata file " + meta_path.string());
  const auto header = detail::split_csv_line(line);
  std::array<std::size_t, kMetadataColumns.size()> col{};
  for (std::size_t k = 0; k < kMetadataColumns.size(); ++k) {
    auto it = std::find_if(header.begin(), header.end(),
                           [&](const std::string& h) { return detail::trim(h) == kMetadataColumns[k]; });
    if (it == header.end()) {
      throw IngestionError("metadata file " + meta_path.string() + " lacks column '" + std::string(kMetadataColumns[k]) + "'");
    }
    col[k] = static_cast<std::size_t>(it - header.begin());
  }
  const auto base = meta_path.parent_path();
  std::vector<EcgRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) {
      throw IngestionError(meta_path.string() + ":" + std::to_string(line_no) + ": expected " +
                           std::to_string(header.size()) + " columns, got " + std::to_string(cells.size()));
    }
    EcgRecord r;
    r.id = detail::trim(cells[col[0]]);
    std::filesystem::path sp = detail::trim(cells[col[1]]);
    if (sp.is_relative()) sp = base / sp;
    const auto rate = parse_number(cells[col[2]]);
    if (!rate || !(*rate > 0.0)) throw IngestionError("record " + r.id + ": invalid sample_rate_hz");
    r.sample_rate_hz = *rate;
    if (auto ts = detail::trim(cells[col[3]]); !ts.empty()) r.timestamp = ts;
    for (std::size_t k = 0; k < kAllTargets.size(); ++k) {
      const auto cell = detail::trim(cells[col[4 + k]]);
      if (cell.empty()) continue;
      const auto v = parse_number(cell);
      if (!v || !std::isfinite(*v) || !(*v > 0.0)) {
        throw IngestionError("record " + r.id + ": label " + std::string(kMetadataColumns[4 + k]) +
                             " must be a finite positive number, got '" + cell + "'");
      }
      r.labels[k] = *v;
    }
    auto table = read_signal_csv(sp);
    r.lead_names = std::move(table.lead_names);
    r.length = table.length;
    r.signal = std::move(table.signal);
    records.push_back(std::move(r));
  }
  return records;
}

// ---------------------------------------------------------------------------
// Preprocessing

/// Keeps leads I, II, V1..V6 in that order; any other leads are dropped.
/// Names match case-insensitively.
inline EcgRecord select_leads(const EcgRecord& r) {
  EcgRecord out = r;
  out.lead_names.assign(canonical_leads().begin(), canonical_leads().end());
  out.signal.assign(canonical_leads().size() * r.length, 0.0);
  for (std::size_t k = 0; k < canonical_leads().size(); ++k) {
    const auto want = detail::lower(canonical_leads()[k]);
    auto it = std::find_if(r.lead_names.begin(), r.lead_names.end(),
                           [&](const std::string& n) { return detail::lower(n) == want; });
    if (it == r.lead_names.end()) {
      throw IngestionError("record " + r.id + ": missing lead " + canonical_leads()[k]);
    }
    const auto src = r.lead(static_cast<std::size_t>(it - r.lead_names.begin()));
    std::copy(src.begin(), src.end(), out.signal.begin() + static_cast<std::ptrdiff_t>(k * r.length));
  }
  return out;
}

inline std::vector<EcgRecord> select_leads(const std::vector<EcgRecord>& records) {
  std::vector<EcgRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(select_leads(r));
  return out;
}

/// Metadata load followed by lead selection: records ready for cleaning.
inline std::vector<EcgRecord> load_dataset(const std::filesystem::path& meta_path) {
  return select_leads(load_metadata(meta_path));
}

struct CleanReport {
  std::vector<EcgRecord> records;
  std::size_t missing_label = 0;
  std::size_t non_finite_signal = 0;

  std::size_t excluded() const { return missing_label + non_finite_signal; }
};

/// Drops records without the target label or with non-finite samples.
inline CleanReport clean(const std::vector<EcgRecord>& records, Target target) {
  CleanReport rep;
  for (const auto& r : records) {
    if (!r.label(target)) {
      ++rep.missing_label;
      continue;
    }
    if (!std::all_of(r.signal.begin(), r.signal.end(), [](double v) { return std::isfinite(v); })) {
      ++rep.non_finite_signal;
      continue;
    }
    rep.records.push_back(r);
  }
  if (rep.records.empty()) {
    throw IngestionError("no usable records for target " + std::string(target_name(target)));
  }
  return rep;
}

/// Per-lead mean and standard deviation, in millivolts.
struct NormalizationStats {
  std::vector<std::string> lead_names;
  std::vector<double> mean;
  std::vector<double> std;

  static NormalizationStats identity(const std::vector<std::string>& leads) {
    return {leads, std::vector<double>(leads.size(), 0.0), std::vector<double>(leads.size(), 1.0)};
  }
};

/// Population statistics over every sample of every record; intended for the
/// training split only.
inline NormalizationStats compute_stats(const std::vector<EcgRecord>& records) {
  if (records.empty()) throw IngestionError("cannot compute normalization stats from zero records");
  const auto& leads = records.front().lead_names;
  NormalizationStats s{leads, std::vector<double>(leads.size(), 0.0), std::vector<double>(leads.size(), 0.0)};
  for (std::size_t l = 0; l < leads.size(); ++l) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : records) {
      if (r.lead_names != leads) throw IngestionError("record " + r.id + " has a different lead layout");
      for (double v : r.lead(l)) sum += v;
      n += r.length;
    }
    const double mu = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const auto& r : records)
      for (double v : r.lead(l)) ss += (v - mu) * (v - mu);
    const double sd = std::sqrt(ss / static_cast<double>(n));
    if (!(sd > 0.0)) throw IngestionError("constant lead " + leads[l] + ": standard deviation is zero");
    s.mean[l] = mu;
    s.std[l] = sd;
  }
  return s;
}

/// (x - mean_lead) / std_lead on every sample; labels are untouched.
inline std::vector<EcgRecord> normalize(const std::vector<EcgRecord>& records, const NormalizationStats& stats) {
  for (double sd : stats.std) {
    if (!(sd > 0.0)) throw IngestionError("constant lead: normalization std must be positive");
  }
  std::vector<EcgRecord> out = records;
  for (auto& r : out) {
    if (r.n_leads() != stats.mean.size()) {
      throw DimensionError("record " + r.id + " has " + std::to_string(r.n_leads()) + " leads, stats cover " +
                           std::to_string(stats.mean.size()));
    }
    for (std::size_t l = 0; l < r.n_leads(); ++l)
      for (double& v : r.lead(l)) v = (v - stats.mean[l]) / stats.std[l];
  }
  return out;
}

struct SplitSpec {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
  std::uint64_t seed = 0;
};

struct DataSplit {
  std::vector<EcgRecord> train, val, test;
};

/// Subset sizes: floor(ratio * n) each, then the remaining records go one at a
/// time to the largest fractional parts (train, val, test on ties).
inline std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitSpec& spec) {
  const std::array<double, 3> ratios = {spec.train, spec.val, spec.test};
  double total = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0)) throw ConfigError("split ratios must be non-negative");
    total += r;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> frac{};
  std::size_t used = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double exact = ratios[i] * static_cast<double>(n);
    sizes[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    frac[i] = exact - static_cast<double>(sizes[i]);
    used += sizes[i];
  }
  for (std::size_t left = n - used; left > 0; --left) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < 3; ++i)
      if (frac[i] > frac[best]) best = i;
    ++sizes[best];
    frac[best] = -1.0;
  }
  for (std::size_t i = 0; i < 3; ++i) {
    if (ratios[i] > 0.0 && sizes[i] == 0) {
      throw ConfigError("split ratio " + std::to_string(ratios[i]) + " yields an empty subset for " +
                        std::to_string(n) + " records");
    }
  }
  return sizes;
}

/// Seeded shuffle, then contiguous train/val/test partition.
inline DataSplit split(const std::vector<EcgRecord>& records, const SplitSpec& spec) {
  const auto sizes = split_sizes(records.size(), spec);
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(spec.seed);
  std::shuffle(order.begin(), order.end(), rng);
  DataSplit out;
  std::size_t i = 0;
  for (; i < sizes[0]; ++i) out.train.push_back(records[order[i]]);
  for (; i < sizes[0] + sizes[1]; ++i) out.val.push_back(records[order[i]]);
  for (; i < order.size(); ++i) out.test.push_back(records[order[i]]);
  return out;
}

/// Heart rate in beats per minute from an RR interval in milliseconds.
inline double hr_from_rr(double rr_ms) {
  if (!(rr_ms > 0.0) || !std::isfinite(rr_ms)) throw DomainError("RR interval must be positive, got " + std::to_string(rr_ms));
  return 60000.0 / rr_ms;
}

// ---------------------------------------------------------------------------
// Batching

template <typename T>
struct Batch {
  Tensor<T> x;                       // B x leads x L
  Tensor<T> y;                       // B x 1
  std::vector<std::size_t> indices;  // positions in the source record list
};

/// Groups `order` into batches of `batch_size`; a final batch of one record is
/// folded into its predecessor.
inline std::vector<std::vector<std::size_t>> batch_partition(const std::vector<std::size_t>& order,
                                                              std::size_t batch_size) {
  if (batch_size < 2) throw ConfigError("batch_size must be >= 2");
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < order.size(); i += batch_size) {
    groups.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                        order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), i + batch_size)));
  }
  if (groups.size() > 1 && groups.back().size() < 2) {
    auto tail = std::move(groups.back());
    groups.pop_back();
    groups.back().insert(groups.back().end(), tail.begin(), tail.end());
  }
  return groups;
}

/// Record order for one epoch: a permutation seeded by (seed, epoch).
inline std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::uint64_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(epoch >> 32)};
  Rng rng(seq);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

template <typename T>
Batch<T> make_batch(const std::vector<EcgRecord>& records, const std::vector<std::size_t>& idx,
                    std::optional<Target> target, std::size_t n_leads, std::size_t length) {
  Batch<T> b;
  b.indices = idx;
  b.x = Tensor<T>::zeros({idx.size(), n_leads, length});
  b.y = Tensor<T>::zeros({idx.size(), 1});
  auto xv = b.x.data();
  auto yv = b.y.data();
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto& r = records[idx[i]];
    if (r.n_leads() != n_leads || r.length != length) {
      throw DimensionError("record " + r.id + " is " + std::to_string(r.n_leads()) + " x " + std::to_string(r.length) +
                           ", model expects " + std::to_string(n_leads) + " x " + std::to_string(length));
    }
    for (std::size_t k = 0; k < r.signal.size(); ++k) xv[i * n_leads * length + k] = static_cast<T>(r.signal[k]);
    if (target) {
      const auto v = r.label(*target);
      if (!v) throw IngestionError("record " + r.id + " lacks label " + std::string(target_name(*target)));
      yv[i] = static_cast<T>(*v);
    }
  }
  return b;
}

/// Training batches for one epoch in seeded shuffled order. Signals are
/// already lead-major, so each batch tensor is (B x leads x L).
template <typename T>
std::vector<Batch<T>> batches(const std::vector<EcgRecord>& records, Target target, std::size_t batch_size,
                              std::uint64_t seed, std::uint64_t epoch, std::size_t n_leads = 8,
                              std::size_t length = 1000) {
  std::vector<Batch<T>> out;
  for (const auto& g : batch_partition(epoch_order(records.size(), seed, epoch), batch_size)) {
    out.push_back(make_batch<T>(records, g, target, n_leads, length));
  }
  return out;
}

/// Batches in record order (validation, evaluation and prediction).
template <typename T>
std::vector<Batch<T>> ordered_batches(const std::vector<EcgRecord>& records, std::optional<Target> target,
                                      std::size_t batch_size, std::size_t n_leads, std::size_t length) {
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Batch<T>> out;
  for (std::size_t i = 0; i < order.size(); i += batch_size) {
    std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(i),
                                 order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), i + batch_size)));
    out.push_back(make_batch<T>(records, idx, target, n_leads, length));
  }
  return out;
}

}  // namespace aicrn

#endif  // AICRN_DATA_HPP_
