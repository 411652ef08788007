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

// Acceptance suite: one PASS/FAIL line per criterion. Details for each check
// are printed indented beneath its verdict. Usage:
//
//   aicrn_acceptance [--only N[,N...]] [--workdir DIR] [--report FILE]
//
// The same lines are written to FILE (default ./acceptance_report.txt) so a
// passing run leaves a record even when the runner hides stdout.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aicrn/aicrn.hpp"
#include "aicrn/cli.hpp"
#include "support/oracles.hpp"

using namespace aicrn;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;
using D = Tensor<double>;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Collects sub-check outcomes for one criterion.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    all_ok_ = all_ok_ && ok;
    lines_.push_back(std::string(ok ? "    ok   " : "    FAIL ") + what);
  }
  void note(const std::string& what) { lines_.push_back("    " + what); }
  bool ok() const { return all_ok_; }
  const std::vector<std::string>& lines() const { return lines_; }

 private:
  bool all_ok_ = true;
  std::vector<std::string> lines_;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---------------------------------------------------------------------------

void gradient_suite(Checks& c) {
  const auto t0 = Clock::now();
  const std::uint64_t trials = 20;
  std::size_t cases = 0;
  bool harness_ok = true;
  double worst_op = 0.0, worst_e2e = 0.0;
  std::set<std::string> ops;
  for (std::uint64_t seed = 0; seed < trials; ++seed) {
    std::ostringstream log;
    std::vector<GradcheckResult> results;
    harness_ok = run_gradcheck_suite(standard_gradcheck_cases(seed), GradcheckOptions{seed}, log, &results) == 0 && harness_ok;
    cases += results.size();
    for (const auto& r : results) {
      ops.insert(r.op);
      auto& worst = r.op == "aicrn_end_to_end" ? worst_e2e : worst_op;
      worst = std::max(worst, r.max_rel_error);
      if (!r.passed()) c.note("seed " + std::to_string(seed) + " failed op: " + r.op + " rel err " + fmt("%.3g", r.max_rel_error));
    }
  }
  const double secs = seconds_since(t0);
  c.expect(harness_ok, std::to_string(ops.size()) + " ops x " + std::to_string(trials) + " seeded trials (" +
                           std::to_string(cases) + " checks) in float64");
  c.expect(worst_op < 1e-4, "worst per-op relative error " + fmt("%.3g", worst_op) + " < 1e-4");
  c.expect(ops.count("aicrn_end_to_end") && worst_e2e < 1e-3,
           "end-to-end (width 8, 2 blocks, L=64) worst relative error " + fmt("%.3g", worst_e2e) + " < 1e-3");
  c.expect(secs < 60.0, "runtime " + fmt("%.2f", secs) + " s < 60 s");
}

// ---------------------------------------------------------------------------

void cbam_oracle(Checks& c) {
  double worst_c = 0.0, worst_s = 0.0, worst_f = 0.0;
  const int seeds = 24;
  for (int seed = 0; seed < seeds; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    const std::size_t B = 1 + seed % 3, C = seed % 2 ? 4 : 8, L = 16 + seed, r = seed % 2 ? 2 : 4, K = seed % 3 ? 7 : 3;
    const auto f = oracle::normal_vec(B * C * L, rng);
    oracle::ChannelWeights cw{oracle::normal_vec(C * (C / r), rng, 0.7), oracle::normal_vec(C / r, rng, 0.3),
                              oracle::normal_vec((C / r) * C, rng, 0.7), oracle::normal_vec(C, rng, 0.3), C, C / r};
    oracle::SpatialWeights sw{oracle::normal_vec(2 * K, rng, 0.5), oracle::normal_vec(1, rng, 0.3)[0], K};
    ChannelAttentionParams<double> cp{D({C, C / r}, cw.w1), D({C / r}, cw.b1), D({C / r, C}, cw.w2), D({C}, cw.b2), r};
    SpatialAttentionParams<double> sp{{D({1, 2, K}, sw.w), D({1}, {sw.bias})}};
    Tape<double> tape;
    const D x({B, C, L}, f);
    worst_c = std::max(worst_c, oracle::max_abs_diff(channel_attention(tape, x, cp).values(), oracle::channel_gate(f, B, L, cw)));
    worst_s = std::max(worst_s, oracle::max_abs_diff(spatial_attention(tape, x, sp).values(), oracle::spatial_gate(f, B, C, L, sw)));
    worst_f = std::max(worst_f, oracle::max_abs_diff(apply_cbam(tape, x, cp, sp).values(), oracle::cbam(f, B, L, cw, sw)));
  }
  c.expect(worst_c < 1e-6, std::to_string(seeds) + " seeds: channel gate max |diff| " + fmt("%.3g", worst_c));
  c.expect(worst_s < 1e-6, std::to_string(seeds) + " seeds: spatial gate max |diff| " + fmt("%.3g", worst_s));
  c.expect(worst_f < 1e-6, std::to_string(seeds) + " seeds: refined map max |diff| " + fmt("%.3g", worst_f));

  std::mt19937_64 rng(7);
  const D x({2, 8, 20}, oracle::normal_vec(320, rng));
  Tape<double> tape;
  const auto cz = ChannelAttentionParams<double>::zeros(8, 4);
  const auto sz = SpatialAttentionParams<double>::zeros(7);
  bool half_c = true, half_s = true, quarter = true;
  const auto mc = channel_attention(tape, x, cz);
  const auto ms = spatial_attention(tape, x, sz);
  for (double v : mc.data()) half_c = half_c && v == 0.5;
  for (double v : ms.data()) half_s = half_s && v == 0.5;
  const auto out = apply_cbam(tape, x, cz, sz);
  for (std::size_t i = 0; i < x.numel(); ++i) quarter = quarter && out.data()[i] == 0.25 * x.data()[i];
  c.expect(half_c && half_s, "zero parameters: M_c and M_s exactly 0.5");
  c.expect(quarter, "zero parameters: F'' exactly 0.25 F");
}

// ---------------------------------------------------------------------------

template <typename T>
bool residual_identity_holds(std::size_t width, std::size_t len, std::uint64_t seed, bool non_negative) {
  ResidualAttentionModule<T> m{Conv1dParams<T>::zeros(width, width, 7), BatchNorm1dParams<T>::make(width),
                               Conv1dParams<T>::zeros(width, width, 7), BatchNorm1dParams<T>::make(width),
                               CbamParams<T>{ChannelAttentionParams<T>::zeros(width, 4),
                                             SpatialAttentionParams<T>::zeros(7)}};
  std::mt19937_64 rng(seed);
  auto v = oracle::normal_vec(3 * width * len, rng);
  if (non_negative)
    for (auto& e : v) e = std::abs(e);
  Tensor<T> x({3, width, len}, std::vector<T>(v.begin(), v.end()));
  bool ok = true;
  for (Mode mode : {Mode::train, Mode::eval}) {
    Tape<T> tape;
    const auto out = residual_forward(tape, x, m, mode, T(0.1));
    for (std::size_t i = 0; i < x.numel(); ++i) {
      const T xi = x.data()[i];
      const T want = non_negative ? xi : (xi >= T(0) ? xi : T(0.1) * xi);
      ok = ok && out.data()[i] == want;
    }
  }
  return ok;
}

void residual_identity(Checks& c) {
  bool signed_ok = true, nonneg_ok = true;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    signed_ok = signed_ok && residual_identity_holds<float>(16, 100, seed, false) &&
                residual_identity_holds<double>(8, 33, seed, false);
    nonneg_ok = nonneg_ok && residual_identity_holds<float>(16, 100, seed, true) &&
                residual_identity_holds<double>(8, 33, seed, true);
  }
  c.expect(signed_ok, "zero branch: output == leaky_relu(input) bitwise (float and double, train and eval)");
  c.expect(nonneg_ok, "zero branch, non-negative input: output == input exactly");
}

// ---------------------------------------------------------------------------

struct StopTrace {
  std::string name;
  std::vector<double> losses;
  std::size_t patience;
  double min_delta;
  std::vector<StopDecision> expected;
  std::size_t expected_writes;
};

const char* decision_name(StopDecision d) {
  return d == StopDecision::improved ? "improved" : d == StopDecision::stop ? "stop" : "continue";
}

void early_stopping(Checks& c) {
  using S = StopDecision;
  const std::vector<StopTrace> traces = {
      {"monotone [5,4,3], patience 2", {5, 4, 3}, 2, 0.0, {S::improved, S::improved, S::improved}, 3},
      {"plateau [3,3,3,3], patience 2", {3, 3, 3, 3}, 2, 0.0, {S::improved, S::proceed, S::proceed, S::stop}, 1},
      {"min_delta 0.5, [3,2.8]", {3, 2.8}, 2, 0.5, {S::improved, S::proceed}, 1},
  };
  for (const auto& t : traces) {
    EarlyStopState s(t.patience, t.min_delta);
    std::vector<S> got;
    std::size_t writes = 0;
    std::string text;
    for (double l : t.losses) {
      got.push_back(s.observe(l));
      writes += got.back() == S::improved;
      text += std::string(text.empty() ? "" : ",") + decision_name(got.back());
    }
    c.expect(got == t.expected && writes == t.expected_writes,
             t.name + " -> " + text + "; writes " + std::to_string(writes));
  }
  {
    EarlyStopState s(2, 0.5);
    s.observe(3);
    s.observe(2.8);
    c.expect(s.counter == 1, "min_delta trace leaves counter at 1");
  }

  // The training loop writes one checkpoint per improvement and stops exactly
  // patience + 1 validations past the best epoch.
  const auto dir = fs::temp_directory_path() / "aicrn_acceptance_early_stop";
  fs::remove_all(dir);
  fs::create_directories(dir);
  GeneratorConfig g;
  g.n_records = 24;
  g.seed = 4;
  g.duration_s = 1.28;
  auto recs = generate_records(g);
  const auto stats = compute_stats(recs);
  recs = normalize(recs, stats);
  std::vector<EcgRecord> train(recs.begin(), recs.begin() + 16), val(recs.begin() + 16, recs.end());
  AicrnConfig cfg;
  cfg.stem_width = 8;
  cfg.num_blocks = 1;
  cfg.input_len = 128;
  Rng rng(2);
  auto model = build<float>(cfg, rng);
  TrainConfig tc;
  tc.max_epochs = 300;
  tc.batch_size = 8;
  tc.patience = 3;
  tc.optimizer.lr = 0.05;
  tc.checkpoint_path = dir / "best.aicn";
  const auto run = fit(model, train, val, tc);
  std::size_t improved = 0;
  for (const auto& e : run.history) improved += e.decision == S::improved;
  c.expect(run.checkpoint_writes == improved, "fit: checkpoint writes " + std::to_string(run.checkpoint_writes) +
                                                  " == improved observations " + std::to_string(improved));
  c.expect(run.stopped_early && run.history.size() - run.best_epoch == tc.patience + 1,
           "fit: stopped at epoch " + std::to_string(run.history.size()) + ", best epoch " +
               std::to_string(run.best_epoch) + ", patience " + std::to_string(tc.patience));
}

// ---------------------------------------------------------------------------

void nadam(Checks& c) {
  D theta({1}, {0.0}, true);
  theta.grad_mut()[0] = 1.0;
  std::vector<NamedTensor<double>> params{{"theta", theta, true}};
  NadamState<double> s;
  // Hand execution of the recurrence with lr 5e-4, beta1 0.9, beta2 0.999, eps 1e-8.
  const double step1 = 0.0005 * (0.9 * (0.1 / 0.19) + 0.1 * (1.0 / 0.1)) / (std::sqrt(0.001 / 0.001) + 1e-8);
  const double step2 = 0.0005 * (0.9 * (0.19 / 0.271) + 0.1 * (1.0 / 0.19)) / (std::sqrt(0.001999 / 0.001999) + 1e-8);
  nadam_step(params, s);
  const double after1 = theta.data()[0];
  nadam_step(params, s);
  const double after2 = theta.data()[0];
  const double e1 = std::abs(after1 + step1), e2 = std::abs(after2 + step1 + step2);
  c.expect(e1 < 1e-12 && e2 < 1e-12, "two-step scalar trace: |err| " + fmt("%.2g", e1) + ", " + fmt("%.2g", e2) +
                                         " (theta " + fmt("%.15g", after2) + ")");

  D zero({4}, {1.5, -2, 0.25, 3}, true);
  zero.grad_mut();
  std::vector<NamedTensor<double>> zp{{"zero", zero, true}};
  NadamState<double> zs;
  const auto before = zero.values();
  for (int i = 0; i < 5; ++i) nadam_step(zp, zs);
  c.expect(zero.values() == before, "zero-gradient steps leave parameters unchanged");
}

// ---------------------------------------------------------------------------

void overfit(Checks& c) {
  const auto t0 = Clock::now();
  GeneratorConfig g;
  g.n_records = 16;
  g.seed = 2024;
  auto recs = generate_records(g);
  recs = normalize(recs, compute_stats(recs));
  AicrnConfig cfg;
  cfg.stem_width = 8;
  cfg.num_blocks = 2;
  standardize_output(cfg, recs, Target::hr);
  Rng rng(1);
  auto model = build<float>(cfg, rng);
  TrainConfig tc;
  tc.max_epochs = 500;
  tc.batch_size = 16;
  tc.patience = 1000;  // no early stop: the whole budget is the test
  tc.seed = 1;
  const auto run = fit(model, recs, recs, tc);
  const double secs = seconds_since(t0);
  const double first = run.history.front().train_mse;
  double lowest = first;
  std::size_t at = 1;
  for (const auto& e : run.history)
    if (e.train_mse < lowest) {
      lowest = e.train_mse;
      at = e.epoch;
    }
  const double ratio = first / lowest;
  c.note("16 records as train and val, width 8, 2 blocks, batch 16, lr 5e-4, standardized hr target");
  c.expect(ratio >= 100.0, "training MSE " + fmt("%.4g", first) + " (epoch 1) -> " + fmt("%.4g", lowest) + " (epoch " +
                               std::to_string(at) + "): " + fmt("%.0f", ratio) + "x reduction");
  c.expect(run.history.size() <= 500, std::to_string(run.history.size()) + " epochs <= 500");
  c.expect(secs < 300.0, "runtime " + fmt("%.1f", secs) + " s < 300 s");
}

// ---------------------------------------------------------------------------

struct ArmResult {
  bool ok = false;
  nlohmann::json meta;
  double seconds = 0.0;
};

int cli(const std::vector<std::string>& args, const fs::path& log) {
  std::ofstream out(log, std::ios::app);
  out << "$ aicrn";
  for (const auto& a : args) out << ' ' << a;
  out << '\n';
  return run_cli(args, out, out);
}

ArmResult train_arm(const fs::path& work, const std::string& data, bool attention) {
  const std::string name = attention ? "attention" : "no_attention";
  std::vector<std::string> args{"train", "--data",  data, "--target", "hr", "--out", (work / name).string(), "--width",
                                "16",    "--blocks", "4", "--batch",  "32", "--lr", "0.0005", "--patience", "20",
                                "--epochs", "1000", "--seed", "1"};
  if (!attention) args.push_back("--no-attention");
  ArmResult r;
  const auto t0 = Clock::now();
  r.ok = cli(args, work / (name + ".log")) == 0;
  r.seconds = seconds_since(t0);
  if (r.ok) r.meta = nlohmann::json::parse(slurp(work / name / "hr.meta.json"));
  return r;
}

void synthetic_regression(Checks& c, const fs::path& work) {
  fs::remove_all(work);
  fs::create_directories(work);
  const auto data = (work / "corpus" / "metadata.csv").string();
  c.expect(cli({"gen-data", "--out", (work / "corpus").string(), "--n", "640", "--seed", "2024"}, work / "gen.log") == 0,
           "generated 640-record corpus (seed 2024)");
  const auto sizes = split_sizes(640, SplitSpec{});
  c.expect(sizes[0] == 512 && sizes[1] == 64 && sizes[2] == 64, "split 512 / 64 / 64");

  const auto att = train_arm(work, data, true);
  c.expect(att.ok, "attention arm trained (log: " + (work / "attention.log").string() + ")");
  if (!att.ok) return;
  const auto& m = att.meta["metrics"]["test"];
  const double r2 = m["r2"].get<double>(), mae = m["mae"].get<double>();
  c.expect(r2 > 0.9, "attention arm test R^2 " + fmt("%.4f", r2) + " > 0.9");
  c.expect(mae < 3.0, "attention arm test MAE " + fmt("%.3f", mae) + " bpm < 3");
  c.expect(att.seconds < 1800.0, "attention arm runtime " + fmt("%.0f", att.seconds) + " s < 1800 s");

  // Mean-predictor baseline through the same network: zero body, head bias at
  // the training-label mean, scored on the test split.
  {
    auto lm = cli::load_model(work / "attention" / "hr.aicn");
    const auto parts = split(clean(load_dataset(data), Target::hr).records, lm.meta.split);
    double mean = 0.0;
    for (const auto& rec : parts.train) mean += *rec.label(Target::hr) / static_cast<double>(parts.train.size());
    for (auto& p : lm.model.parameters()) std::fill(p.tensor.values().begin(), p.tensor.values().end(), 0.0f);
    lm.model.config.output_scale = 1.0;
    lm.model.config.output_shift = 0.0;
    lm.meta.config = lm.model.config;
    lm.model.head.bias.values()[0] = static_cast<float>(mean);
    fs::create_directories(work / "mean_predictor");
    save_weights(lm.model, work / "mean_predictor" / "hr.aicn");
    save_meta(lm.meta, work / "mean_predictor" / "hr.meta.json");
    std::ostringstream out, err;
    const int code = run_cli({"--json", "eval", "--model", (work / "mean_predictor" / "hr.aicn").string(), "--data", data},
                             out, err);
    const double base = code == 0 ? nlohmann::json::parse(out.str())["r2"].get<double>() : 1.0;
    c.expect(code == 0 && std::abs(base) < 0.05,
             "mean-predictor baseline test R^2 " + fmt("%.4f", base) + " (|R^2| < 0.05)");
  }

  // Noise-free 60 bpm records: the converged model's mean absolute deviation
  // should sit at the scale of its test MAE.
  {
    auto lm = cli::load_model(work / "attention" / "hr.aicn");
    GeneratorConfig g;
    g.noise_std_mv = 0.0;
    std::vector<EcgRecord> recs;
    Rng rng(60);
    while (recs.size() < 16) {
      auto p = sample_params(rng);
      p.hr_bpm = 60.0;
      if (!p.violation().empty()) continue;
      recs.push_back(synth_record(p, g, rng, "flat" + std::to_string(recs.size())));
    }
    const auto pred = predict(lm.model, normalize(recs, lm.meta.normalization));
    double dev = 0.0;
    for (double v : pred) dev += std::abs(v - 60.0) / static_cast<double>(pred.size());
    c.expect(dev < 3.0, "noise-free 60 bpm records: mean |pred - 60| " + fmt("%.3f", dev) + " bpm (test MAE " +
                            fmt("%.3f", mae) + ")");
  }

  const auto no = train_arm(work, data, false);
  c.expect(no.ok, "no-attention arm trained (log: " + (work / "no_attention.log").string() + ")");
  if (!no.ok) return;
  const auto& n = no.meta["metrics"]["test"];
  c.expect(n["r2"].get<double>() > 0.9 && n["mae"].get<double>() < 3.0,
           "no-attention arm converged: test R^2 " + fmt("%.4f", n["r2"].get<double>()) + ", MAE " +
               fmt("%.3f", n["mae"].get<double>()));

  nlohmann::json summary = nlohmann::json::array();
  c.note("comparison (test split, 64 records):");
  c.note("  arm            epochs  best  test MAE  test RMSE  test R^2   seconds");
  for (const auto* arm : {&att, &no}) {
    const auto& mm = arm->meta["metrics"]["test"];
    const auto& tr = arm->meta["training"];
    const std::string label = arm == &att ? "attention" : "no-attention";
    char line[160];
    std::snprintf(line, sizeof(line), "  %-13s %7d %5d %9.3f %10.3f %9.4f %9.0f", label.c_str(),
                  tr["epochs_run"].get<int>(), tr["best_epoch"].get<int>(), mm["mae"].get<double>(),
                  mm["rmse"].get<double>(), mm["r2"].get<double>(), arm->seconds);
    c.note(line);
    summary.push_back({{"arm", label},
                       {"epochs_run", tr["epochs_run"]},
                       {"best_epoch", tr["best_epoch"]},
                       {"test", mm},
                       {"seconds", arm->seconds}});
  }
  std::ofstream(work / "comparison.json") << summary.dump(2) << '\n';
  c.note("comparison written to " + (work / "comparison.json").string());
}

// ---------------------------------------------------------------------------

void metric_oracles(Checks& c) {
  const auto hand = compute_metrics(std::vector<double>{1, 2}, std::vector<double>{2, 4});
  c.expect(hand.mae == 1.5 && std::abs(hand.rmse - std::sqrt(2.5)) < 1e-15 && hand.r2 && *hand.r2 == -1.5,
           "pred [1,2] vs target [2,4]: mae 1.5, rmse sqrt(2.5), r2 -1.5");
  const std::vector<double> y{3, 1, 4, 1, 5, 9, 2, 6};
  const auto perfect = compute_metrics(y, y);
  c.expect(perfect.mae == 0 && perfect.rmse == 0 && perfect.r2 == 1.0, "pred == target: mae 0, rmse 0, r2 1");

  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd(0.0, 10.0);
  std::uniform_int_distribution<int> len(1, 40);
  bool dominated = true, exact_zero = true;
  for (int trial = 0; trial < 10000; ++trial) {
    const int n = len(rng);
    std::vector<double> p(n), t(n);
    for (int i = 0; i < n; ++i) {
      p[i] = nd(rng);
      t[i] = nd(rng);
    }
    const auto m = compute_metrics(p, t);
    dominated = dominated && m.rmse >= m.mae;
    if (n >= 2 && trial % 10 == 0) {
      double s = 0.0;
      for (double v : t) s += v;
      const auto mm = compute_metrics(std::vector<double>(n, s / n), t);
      exact_zero = exact_zero && mm.r2 && *mm.r2 == 0.0;
    }
  }
  c.expect(dominated, "rmse >= mae on 10^4 seeded random pairs");
  c.expect(exact_zero, "mean predictor r2 == 0 exactly on 10^3 seeded targets");
}

// ---------------------------------------------------------------------------

template <typename T>
bool same_batches(const std::vector<Batch<T>>& a, const std::vector<Batch<T>>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].indices != b[i].indices || a[i].x.shape() != b[i].x.shape()) return false;
    if (std::memcmp(a[i].x.data().data(), b[i].x.data().data(), a[i].x.numel() * sizeof(T)) != 0) return false;
    if (std::memcmp(a[i].y.data().data(), b[i].y.data().data(), a[i].y.numel() * sizeof(T)) != 0) return false;
  }
  return true;
}

std::vector<Batch<float>> pipeline_stream(const fs::path& dir) {
  GeneratorConfig g;
  g.n_records = 40;
  g.seed = 99;
  fs::remove_all(dir);
  const auto m = generate_corpus(g, dir);
  auto parts = split(clean(load_dataset(m.metadata_path), Target::hr).records, SplitSpec{0.8, 0.1, 0.1, 5});
  parts.train = normalize(parts.train, compute_stats(parts.train));
  std::vector<Batch<float>> stream;
  for (std::uint64_t epoch = 1; epoch <= 3; ++epoch)
    for (auto& b : batches<float>(parts.train, Target::hr, 8, 5, epoch)) stream.push_back(std::move(b));
  return stream;
}

void determinism(Checks& c) {
  const auto base = fs::temp_directory_path() / "aicrn_acceptance_determinism";
  const auto a = pipeline_stream(base / "a");
  const auto b = pipeline_stream(base / "b");
  c.expect(!a.empty() && same_batches(a, b),
           "generate -> ingest -> split -> batch twice: " + std::to_string(a.size()) + " batches bitwise identical");
  c.expect(slurp(base / "a" / "metadata.csv") == slurp(base / "b" / "metadata.csv"), "corpus metadata byte-identical");

  // A 12-lead copy of a generated record, written and re-ingested.
  const auto dir = base / "twelve";
  fs::create_directories(dir / "signals");
  GeneratorConfig g;
  g.n_records = 1;
  auto rec = generate_records(g).front();
  EcgRecord wide = rec;
  wide.lead_names = {standard_leads().begin(), standard_leads().end()};
  wide.signal.assign(12 * rec.length, 0.0);
  const std::size_t src_of[12] = {0, 1, 99, 99, 99, 99, 2, 3, 4, 5, 6, 7};
  for (std::size_t k = 0; k < 12; ++k)
    for (std::size_t t = 0; t < rec.length; ++t)
      wide.signal[k * rec.length + t] = src_of[k] == 99 ? -7.0 - static_cast<double>(k) : rec.lead(src_of[k])[t];
  write_signal_csv(dir / "signals" / "r.csv", wide);
  write_metadata_csv(dir / "metadata.csv", {wide}, {"signals/r.csv"});
  const auto loaded = load_dataset(dir / "metadata.csv");
  const std::vector<std::string> want{"I", "II", "V1", "V2", "V3", "V4", "V5", "V6"};
  c.expect(loaded.size() == 1 && loaded[0].lead_names == want && loaded[0].signal == rec.signal,
           "12-lead input keeps exactly [I, II, V1..V6] with the original samples");

  Rng rng(31);
  auto model = build<float>(AicrnConfig{}, rng);
  for (auto& e : model.state())
    if (!e.trainable) e.tensor.values()[0] += 0.5f;
  save_weights(model, base / "m.aicn");
  auto loaded_model = load_weights<float>(base / "m.aicn", model.config);
  bool bitwise = true;
  auto s1 = model.state(), s2 = loaded_model.state();
  bitwise = s1.size() == s2.size();
  for (std::size_t i = 0; bitwise && i < s1.size(); ++i) {
    bitwise = s1[i].name == s2[i].name &&
              std::memcmp(s1[i].tensor.data().data(), s2[i].tensor.data().data(), s1[i].tensor.numel() * sizeof(float)) == 0;
  }
  save_weights(loaded_model, base / "m2.aicn");
  c.expect(bitwise, "checkpoint load reproduces every tensor bitwise (" + std::to_string(s1.size()) + " tensors)");
  c.expect(slurp(base / "m.aicn") == slurp(base / "m2.aicn"), "re-saved checkpoint is byte-identical");
}

}  // namespace

int main(int argc, char** argv) {
  configure_allocator();
  std::set<int> only;
  fs::path work = fs::current_path() / "acceptance_work";
  fs::path report_path = fs::current_path() / "acceptance_report.txt";
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string item;
      while (std::getline(ss, item, ',')) only.insert(std::stoi(item));
    } else if (a == "--workdir" && i + 1 < argc) {
      work = argv[++i];
    } else if (a == "--report" && i + 1 < argc) {
      report_path = argv[++i];
    } else {
      std::cerr << "usage: aicrn_acceptance [--only N[,N...]] [--workdir DIR] [--report FILE]\n";
      return 2;
    }
  }

  const std::vector<std::pair<std::string, std::function<void(Checks&)>>> criteria = {
      {"gradient oracle suite", gradient_suite},
      {"CBAM reference oracle", cbam_oracle},
      {"residual identity", residual_identity},
      {"early-stopping automaton", early_stopping},
      {"Nadam correctness", nadam},
      {"single-batch overfit", overfit},
      {"synthetic end-to-end regression", [&](Checks& c) { synthetic_regression(c, work / "synthetic_hr"); }},
      {"metric oracles", metric_oracles},
      {"pipeline determinism and round-trip", determinism},
  };

  std::ofstream report(report_path, std::ios::trunc);
  auto emit = [&](const std::string& line) {
    std::cout << line << '\n' << std::flush;
    report << line << '\n' << std::flush;
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && !only.count(id)) continue;
    Checks c;
    const auto t0 = Clock::now();
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    emit(std::string(c.ok() ? "PASS" : "FAIL") + " criterion " + std::to_string(id) + ": " + criteria[i].first + " (" +
         fmt("%.1f", seconds_since(t0)) + " s)");
    for (const auto& l : c.lines()) emit(l);
    failed += !c.ok();
  }
  emit(failed ? "acceptance: " + std::to_string(failed) + " criterion(s) failed" : "acceptance: all criteria passed");
  return failed ? 1 : 0;
}
