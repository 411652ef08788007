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

// Synthetic 8-lead ECG with labels known by construction.
//
// Each beat is a sum of truncated Gaussian bumps (support +-3 sigma) laid out
// around an R peak that sits exactly on a sample:
//
//   QRS onset  = R - qrs/2          QRS offset = R + qrs/2
//   P          onset at QRS onset - pr, amplitude 0.1 * rpa
//   Q, S       negative bumps inside the QRS, zero at the R sample
//   R          peak amplitude rpa
//   T          ends at QRS onset + qt, amplitude twa
//
// Beats repeat every 60000/hr ms from a random phase. Lead l carries
// gain[l] * template plus white Gaussian noise.

#ifndef AICRN_SYNTHETIC_HPP_
#define AICRN_SYNTHETIC_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aicrn/data.hpp"
#include "aicrn/error.hpp"
#include "aicrn/layers.hpp"
#include "aicrn/timeutil.hpp"

namespace aicrn {

struct BeatParams {
  double hr_bpm = 60.0;
  double pr_ms = 160.0;
  double qrs_ms = 90.0;
  double qt_ms = 380.0;
  double rpa_mv = 1.5;
  double twa_mv = 0.3;
  double p_sigma_ms = 15.0;
  double t_sigma_ms = 30.0;

  double rr_ms() const { return 60000.0 / hr_bpm; }

  /// Empty string when the beat can be laid out, otherwise the violated rule.
  std::string violation() const {
    if (!(hr_bpm > 0 && pr_ms > 0 && qrs_ms > 0 && qt_ms > 0 && rpa_mv > 0 && twa_mv > 0)) {
      return "all beat parameters must be positive";
    }
    if (!(qrs_ms < qt_ms)) return "QRS must end before T (qrs < qt)";
    if (!(qt_ms < rr_ms())) return "QT must be shorter than the RR interval";
    if (!(6.0 * p_sigma_ms < pr_ms)) return "P wave must end before QRS onset";
    if (!(6.0 * t_sigma_ms < qt_ms - qrs_ms)) return "T wave must start after QRS offset";
    if (!(twa_mv <= 0.4 * rpa_mv)) return "T amplitude must not exceed 0.4 * R amplitude";
    return {};
  }
};

inline constexpr double kPAmplitudeRatio = 0.1;
inline constexpr double kQAmplitudeRatio = -0.1;
inline constexpr double kSAmplitudeRatio = -0.2;

struct GeneratorConfig {
  std::size_t n_records = 64;
  double duration_s = 10.0;
  double sample_rate_hz = 100.0;
  double noise_std_mv = 0.02;
  std::array<double, 8> lead_gains = {1.0, 1.1, -0.4, 0.3, 0.7, 1.0, 0.9, 0.8};
  std::uint64_t seed = 0;
  std::int64_t start_unix_s = 1704067200;  // 2024-01-01T00:00:00Z
  std::int64_t timestamp_step_s = 3600;

  std::size_t length() const {
    const double n = duration_s * sample_rate_hz;
    const double r = std::round(n);
    if (std::abs(n - r) > 1e-9 || r < 1.0) throw ConfigError("duration_s * sample_rate_hz must be a positive integer");
    return static_cast<std::size_t>(r);
  }

  void validate() const {
    (void)length();
    if (!(sample_rate_hz > 0.0)) throw ConfigError("sample_rate_hz must be positive");
    if (!(noise_std_mv >= 0.0)) throw ConfigError("noise_std_mv must be non-negative");
    for (double g : lead_gains)
      if (g == 0.0) throw ConfigError("lead gains must be nonzero");
  }
};

/// Uniform draws over the physiological ranges, redrawn until the beat
/// layout rules hold.
inline BeatParams sample_params(Rng& rng) {
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  for (;;) {
    BeatParams p;
    p.hr_bpm = uni(50.0, 110.0);
    p.pr_ms = uni(120.0, 200.0);
    p.qrs_ms = uni(70.0, 110.0);
    p.qt_ms = uni(320.0, 440.0);
    p.rpa_mv = uni(0.5, 2.5);
    p.twa_mv = uni(0.1, 0.6);
    if (p.violation().empty()) return p;
  }
}

/// A truncated Gaussian: zero beyond 3 sigma of its centre.
struct Bump {
  double center_ms;
  double sigma_ms;
  double amplitude;

  double onset_ms() const { return center_ms - 3.0 * sigma_ms; }
  double offset_ms() const { return center_ms + 3.0 * sigma_ms; }
  double at(double t_ms) const {
    const double z = (t_ms - center_ms) / sigma_ms;
    return std::abs(z) < 3.0 ? amplitude * std::exp(-0.5 * z * z) : 0.0;
  }
};

struct BeatWaves {
  std::ptrdiff_t r_sample = 0;  // may lie outside the record for edge beats
  Bump p, q, r, s, t;

  double qrs_onset_ms() const { return q.onset_ms(); }
  double qrs_offset_ms() const { return s.offset_ms(); }
};

inline BeatWaves beat_waves(const BeatParams& p, std::ptrdiff_t r_sample, double sample_rate_hz) {
  const double tr = static_cast<double>(r_sample) * 1000.0 / sample_rate_hz;
  const double qrs_on = tr - p.qrs_ms / 2.0;
  const double qrs_off = tr + p.qrs_ms / 2.0;
  const double qs_sigma = p.qrs_ms / 14.0;
  BeatWaves w;
  w.r_sample = r_sample;
  w.p = {qrs_on - p.pr_ms + 3.0 * p.p_sigma_ms, p.p_sigma_ms, kPAmplitudeRatio * p.rpa_mv};
  w.q = {qrs_on + 3.0 * qs_sigma, qs_sigma, kQAmplitudeRatio * p.rpa_mv};
  w.r = {tr, p.qrs_ms / 8.0, p.rpa_mv};
  w.s = {qrs_off - 3.0 * qs_sigma, qs_sigma, kSAmplitudeRatio * p.rpa_mv};
  w.t = {qrs_on + p.qt_ms - 3.0 * p.t_sigma_ms, p.t_sigma_ms, p.twa_mv};
  return w;
}

/// R-peak sample positions of every beat that touches a record of `length`
/// samples when the first R peak falls at `phase_ms`.
inline std::vector<BeatWaves> beat_schedule(const BeatParams& p, std::size_t length, double sample_rate_hz,
                                            double phase_ms) {
  const double rr = p.rr_ms();
  const double duration_ms = static_cast<double>(length) * 1000.0 / sample_rate_hz;
  std::vector<BeatWaves> beats;
  for (int k = -2;; ++k) {
    const double t = phase_ms + k * rr;
    if (t - p.qrs_ms / 2.0 - p.pr_ms > duration_ms) break;
    const auto r_sample = static_cast<std::ptrdiff_t>(std::llround(t * sample_rate_hz / 1000.0));
    beats.push_back(beat_waves(p, r_sample, sample_rate_hz));
  }
  return beats;
}

/// Noise-free single-lead template (gain 1).
inline std::vector<double> render_template(const std::vector<BeatWaves>& beats, std::size_t length,
                                           double sample_rate_hz) {
  std::vector<double> out(length, 0.0);
  for (const auto& b : beats) {
    for (const Bump* w : {&b.p, &b.q, &b.r, &b.s, &b.t}) {
      const double lo = std::max(0.0, std::floor(w->onset_ms() * sample_rate_hz / 1000.0));
      const double hi = std::min(static_cast<double>(length) - 1.0, std::ceil(w->offset_ms() * sample_rate_hz / 1000.0));
      for (double i = lo; i <= hi; i += 1.0) {
        out[static_cast<std::size_t>(i)] += w->at(i * 1000.0 / sample_rate_hz);
      }
    }
  }
  return out;
}

/// Draws a phase, renders the beats on every lead and labels the record with
/// `p` exactly. Samples are stored at signal-CSV precision.
inline EcgRecord synth_record(const BeatParams& p, const GeneratorConfig& g, Rng& rng, std::string id = "syn") {
  if (auto why = p.violation(); !why.empty()) throw ConfigError("synth_record: " + why);
  g.validate();
  const std::size_t length = g.length();
  const double phase = std::uniform_real_distribution<double>(0.0, p.rr_ms())(rng);
  const auto beats = beat_schedule(p, length, g.sample_rate_hz, phase);
  const auto tmpl = render_template(beats, length, g.sample_rate_hz);

  EcgRecord r;
  r.id = std::move(id);
  r.lead_names.assign(canonical_leads().begin(), canonical_leads().end());
  r.length = length;
  r.sample_rate_hz = g.sample_rate_hz;
  r.signal.resize(8 * length);
  std::normal_distribution<double> noise(0.0, g.noise_std_mv);
  for (std::size_t l = 0; l < 8; ++l) {
    for (std::size_t t = 0; t < length; ++t) {
      double v = g.lead_gains[l] * tmpl[t];
      if (g.noise_std_mv > 0.0) v += noise(rng);
      r.signal[l * length + t] = round_to_signal_precision(v);
    }
  }
  r.set_label(Target::pr, p.pr_ms);
  r.set_label(Target::qt, p.qt_ms);
  r.set_label(Target::qrs, p.qrs_ms);
  r.set_label(Target::hr, p.hr_bpm);
  r.set_label(Target::rpa, p.rpa_mv);
  r.set_label(Target::twa, p.twa_mv);
  return r;
}

/// Local maxima above `threshold` x global maximum, thinned greedily by
/// amplitude so that accepted peaks are at least `refractory_ms` apart.
/// Returns ascending sample indices; empty if no positive peak exists.
inline std::vector<std::size_t> delineate_r_peaks(std::span<const double> x, double sample_rate_hz,
                                                  double refractory_ms = 200.0, double threshold = 0.6) {
  if (x.size() < 3) return {};
  const double gmax = *std::max_element(x.begin(), x.end());
  if (!(gmax > 0.0)) return {};
  const double level = threshold * gmax;
  std::vector<std::size_t> cand;
  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    if (x[i] > level && x[i] > x[i - 1] && x[i] >= x[i + 1]) cand.push_back(i);
  }
  std::stable_sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) { return x[a] > x[b]; });
  const auto gap = static_cast<std::size_t>(std::ceil(refractory_ms * sample_rate_hz / 1000.0 - 1e-9));
  std::vector<std::size_t> peaks;
  for (std::size_t c : cand) {
    const bool clear = std::all_of(peaks.begin(), peaks.end(), [&](std::size_t p) {
      return (c > p ? c - p : p - c) >= gap;
    });
    if (clear) peaks.push_back(c);
  }
  std::sort(peaks.begin(), peaks.end());
  return peaks;
}

inline std::vector<std::size_t> delineate_r_peaks(const EcgRecord& r, std::size_t lead = 0) {
  if (lead >= r.n_leads()) throw RangeError("lead index out of range");
  return delineate_r_peaks(r.lead(lead), r.sample_rate_hz);
}

/// Heart rate from the mean spacing of detected R peaks; nullopt with fewer
/// than two peaks.
inline std::optional<double> estimate_hr(const EcgRecord& r, std::size_t lead = 0) {
  const auto peaks = delineate_r_peaks(r, lead);
  if (peaks.size() < 2) return std::nullopt;
  const double span_samples = static_cast<double>(peaks.back() - peaks.front());
  const double rr_ms = span_samples / static_cast<double>(peaks.size() - 1) * 1000.0 / r.sample_rate_hz;
  return hr_from_rr(rr_ms);
}

struct CorpusManifest {
  std::filesystem::path metadata_path;
  std::filesystem::path manifest_path;
  std::vector<std::string> ids;
  std::uint64_t seed = 0;
};

inline std::string synthetic_record_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "syn%05zu", i);
  return buf;
}

/// Record i uses its own generator seeded by (seed, i), so records are
/// independent of each other and of generation order.
inline EcgRecord synth_indexed_record(const GeneratorConfig& g, std::size_t i) {
  std::seed_seq seq{static_cast<std::uint32_t>(g.seed), static_cast<std::uint32_t>(g.seed >> 32),
                    static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32)};
  Rng rng(seq);
  const auto p = sample_params(rng);
  auto r = synth_record(p, g, rng, synthetic_record_id(i));
  r.timestamp = format_iso8601(g.start_unix_s + static_cast<std::int64_t>(i) * g.timestamp_step_s);
  return r;
}

inline std::vector<EcgRecord> generate_records(const GeneratorConfig& g) {
  std::vector<EcgRecord> out;
  out.reserve(g.n_records);
  for (std::size_t i = 0; i < g.n_records; ++i) out.push_back(synth_indexed_record(g, i));
  return out;
}

/// Writes metadata.csv, signals/<id>.csv and manifest.json under `out_dir`.
inline CorpusManifest generate_corpus(const GeneratorConfig& g, const std::filesystem::path& out_dir) {
  g.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "signals", ec);
  if (ec) throw IoError("cannot create " + (out_dir / "signals").string() + ": " + ec.message());

  CorpusManifest m;
  m.seed = g.seed;
  m.metadata_path = out_dir / "metadata.csv";
  m.manifest_path = out_dir / "manifest.json";
  std::vector<EcgRecord> records;
  std::vector<std::string> paths;
  for (std::size_t i = 0; i < g.n_records; ++i) {
    auto r = synth_indexed_record(g, i);
    const std::string rel = "signals/" + r.id + ".csv";
    write_signal_csv(out_dir / rel, r);
    m.ids.push_back(r.id);
    paths.push_back(rel);
    r.signal.clear();
    records.push_back(std::move(r));
  }
  write_metadata_csv(m.metadata_path, records, paths);

  nlohmann::ordered_json j;
  j["seed"] = g.seed;
  j["n_records"] = g.n_records;
  j["duration_s"] = g.duration_s;
  j["sample_rate_hz"] = g.sample_rate_hz;
  j["noise_std_mv"] = g.noise_std_mv;
  j["lead_gains"] = g.lead_gains;
  j["metadata"] = "metadata.csv";
  j["ids"] = m.ids;
  std::ofstream out(m.manifest_path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + m.manifest_path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + m.manifest_path.string());
  return m;
}

}  // namespace aicrn

#endif  // AICRN_SYNTHETIC_HPP_
