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

// Command-line front end. Exit codes: 0 success, 1 runtime failure, 2 usage.
//
//   gen-data   synthetic corpus
//   train      one model per target: clean, split, normalize, build, fit
//   eval       metrics of a checkpoint on a split of a corpus
//   predict    per-record predictions from one or more checkpoints
//   report     time series and trend summary from a predictions CSV
//   gradcheck  finite-difference check of every backward rule

#ifndef AICRN_CLI_HPP_
#define AICRN_CLI_HPP_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "aicrn/checkpoint.hpp"
#include "aicrn/data.hpp"
#include "aicrn/error.hpp"
#include "aicrn/gradcheck.hpp"
#include "aicrn/meta.hpp"
#include "aicrn/report.hpp"
#include "aicrn/runtime.hpp"
#include "aicrn/synthetic.hpp"
#include "aicrn/train.hpp"

namespace aicrn {

/// A well-formed command line that asks for something invalid.
class UsageError : public Error {
 public:
  using Error::Error;
};

namespace cli {

struct GenDataFlags {
  std::filesystem::path out;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double noise = 0.02;
  double duration = 10.0;
};

struct TrainFlags {
  std::filesystem::path data;
  std::string target;
  std::filesystem::path out;
  std::size_t width = 64;
  std::size_t blocks = 8;
  bool no_attention = false;
  std::size_t epochs = 1000;
  std::size_t batch = 300;
  double lr = 0.0005;
  std::size_t patience = 20;
  double min_delta = 0.0;
  std::uint64_t seed = 0;
  bool standardize_target = false;
  std::vector<double> split_ratios{0.8, 0.1, 0.1};
};

struct EvalFlags {
  std::filesystem::path model;
  std::filesystem::path data;
  std::string split = "test";
  std::filesystem::path out;
};

struct PredictFlags {
  std::vector<std::filesystem::path> models;
  std::filesystem::path data;
  std::filesystem::path out;
};

struct ReportFlags {
  std::filesystem::path predictions;
  std::filesystem::path out;
};

struct GradcheckFlags {
  std::uint64_t seed = 0;
};

inline int cmd_gen_data(const GenDataFlags& f, bool json, std::ostream& out) {
  GeneratorConfig g;
  g.n_records = f.n;
  g.seed = f.seed;
  g.noise_std_mv = f.noise;
  g.duration_s = f.duration;
  if (f.n == 0) throw UsageError("--n must be at least 1");
  try {
    g.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  const auto m = generate_corpus(g, f.out);
  if (json) {
    out << nlohmann::json{{"manifest", m.manifest_path.string()}, {"metadata", m.metadata_path.string()}, {"n", m.ids.size()}}
               .dump()
        << '\n';
  } else {
    out << m.manifest_path.string() << '\n';
  }
  return 0;
}

inline std::vector<Target> selected_targets(const std::string& name) {
  if (name == "all") return {kAllTargets.begin(), kAllTargets.end()};
  try {
    return {parse_target(name)};
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
}

inline std::filesystem::path checkpoint_file(const std::filesystem::path& dir, Target t) {
  return dir / (std::string(target_name(t)) + ".aicn");
}

inline int cmd_train(const TrainFlags& f, bool json, std::ostream& out, std::ostream& err) {
  const auto targets = selected_targets(f.target);
  if (f.split_ratios.size() != 3) throw UsageError("--split-ratios takes three values");
  const SplitSpec spec{f.split_ratios[0], f.split_ratios[1], f.split_ratios[2], f.seed};
  TrainConfig base;
  base.max_epochs = f.epochs;
  base.batch_size = f.batch;
  base.patience = f.patience;
  base.min_delta = f.min_delta;
  base.seed = f.seed;
  base.optimizer.lr = f.lr;
  try {
    base.validate();
    (void)split_sizes(100, spec);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }

  std::string stage = "load";
  std::vector<EcgRecord> records;
  try {
    std::error_code ec;
    std::filesystem::create_directories(f.out, ec);
    if (ec) throw IoError("cannot create output directory " + f.out.string() + ": " + ec.message());
    records = load_dataset(f.data);
  } catch (const std::exception& e) {
    err << "error: train failed during " << stage << ": " << e.what() << '\n';
    return 1;
  }

  std::ostream& log = json ? err : out;
  nlohmann::json summary = nlohmann::json::array();
  for (Target t : targets) {
    const auto ckpt = checkpoint_file(f.out, t);
    const auto meta_path = meta_path_for(ckpt);
    auto history_path = f.out / (std::string(target_name(t)) + ".history.csv");
    try {
      stage = "clean";
      const auto cleaned = clean(records, t);
      stage = "split";
      auto parts = split(cleaned.records, spec);
      stage = "normalize";
      const auto stats = compute_stats(parts.train);
      parts.train = normalize(parts.train, stats);
      parts.val = normalize(parts.val, stats);
      parts.test = normalize(parts.test, stats);

      stage = "build";
      AicrnConfig config;
      config.stem_width = f.width;
      config.num_blocks = f.blocks;
      config.attention = !f.no_attention;
      config.input_len = parts.train.front().length;
      if (f.standardize_target) standardize_output(config, parts.train, t);
      Rng rng(f.seed);
      auto model = build<float>(config, rng);

      stage = "fit";
      TrainConfig tc = base;
      tc.target = t;
      tc.checkpoint_path = ckpt;
      tc.history_path = history_path;
      log << "training " << target_name(t) << ": " << parts.train.size() << " train / " << parts.val.size()
          << " val / " << parts.test.size() << " test records, " << model.parameter_count() << " parameters\n";
      const auto run = fit(model, parts.train, parts.val, tc, &log);

      stage = "write";
      ModelMeta meta;
      meta.target = t;
      meta.config = model.config;
      meta.normalization = stats;
      meta.split = spec;
      meta.training = {{"epochs_run", run.history.size()},   {"best_epoch", run.best_epoch},
                       {"best_val_mse", run.best_val_mse},   {"stopped_early", run.stopped_early},
                       {"checkpoint_writes", run.checkpoint_writes}, {"max_epochs", tc.max_epochs},
                       {"batch_size", tc.batch_size},        {"lr", tc.optimizer.lr},
                       {"patience", tc.patience},            {"min_delta", tc.min_delta},
                       {"seed", tc.seed},                    {"standardized_target", f.standardize_target}};
      meta.metrics["train"] = metrics_json(run.train_metrics);
      meta.metrics["val"] = metrics_json(run.val_metrics);
      if (!parts.test.empty()) meta.metrics["test"] = metrics_json(evaluate(model, parts.test, t));
      save_meta(meta, meta_path);
      nlohmann::json s = {{"target", target_name(t)}, {"checkpoint", ckpt.string()}, {"metrics", meta.metrics}};
      summary.push_back(s);
      log << "saved " << ckpt.string() << " (best epoch " << run.best_epoch << ", val_mse "
          << format_exact(run.best_val_mse) << ")\n";
    } catch (const std::exception& e) {
      std::error_code ec;
      for (const auto& p : {ckpt, meta_path, history_path}) std::filesystem::remove(p, ec);
      auto tmp = ckpt;
      tmp += ".tmp";
      std::filesystem::remove(tmp, ec);
      err << "error: train " << target_name(t) << " failed during " << stage << ": " << e.what() << '\n';
      return 1;
    }
  }
  if (json) out << summary.dump(2) << '\n';
  return 0;
}

struct LoadedModel {
  AicrnModel<float> model;
  ModelMeta meta;
};

inline LoadedModel load_model(const std::filesystem::path& ckpt) {
  auto meta = load_meta(meta_path_for(ckpt));
  if (meta.status != "complete") throw CorruptCheckpointError(ckpt.string() + " is marked " + meta.status);
  auto model = load_weights<float>(ckpt, meta.config);
  return {std::move(model), std::move(meta)};
}

inline int cmd_eval(const EvalFlags& f, bool json, std::ostream& out) {
  if (f.split != "train" && f.split != "val" && f.split != "test" && f.split != "all") {
    throw UsageError("--split must be train, val, test or all");
  }
  auto lm = load_model(f.model);
  const Target t = lm.meta.target;
  const auto cleaned = clean(load_dataset(f.data), t);
  std::vector<EcgRecord> subset;
  if (f.split == "all") {
    subset = cleaned.records;
  } else {
    auto parts = split(cleaned.records, lm.meta.split);
    subset = f.split == "train" ? parts.train : f.split == "val" ? parts.val : parts.test;
  }
  if (subset.empty()) throw IngestionError("split '" + f.split + "' is empty");
  subset = normalize(subset, lm.meta.normalization);
  const auto m = evaluate(lm.model, subset, t);
  nlohmann::json j;
  j["target"] = std::string(target_name(t));
  j["n"] = subset.size();
  j["mae"] = m.mae;
  j["rmse"] = m.rmse;
  j["r2"] = m.r2 ? nlohmann::json(*m.r2) : nlohmann::json(nullptr);
  if (!f.out.empty()) {
    std::ofstream o(f.out, std::ios::trunc);
    if (!o) throw IoError("cannot write " + f.out.string());
    o << j.dump(2) << '\n';
  }
  if (json) {
    out << j.dump() << '\n';
  } else {
    out << "target " << target_name(t) << "  n " << subset.size() << "  mae " << format_exact(m.mae) << "  rmse "
        << format_exact(m.rmse) << "  r2 " << (m.r2 ? format_exact(*m.r2) : std::string("undefined")) << '\n';
  }
  return 0;
}

inline int cmd_predict(const PredictFlags& f, bool json, std::ostream& out) {
  std::vector<LoadedModel> models;
  std::set<Target> seen;
  for (const auto& p : f.models) {
    auto lm = load_model(p);
    if (!seen.insert(lm.meta.target).second) {
      throw UsageError("duplicate target column '" + std::string(target_column(lm.meta.target)) + "' from " + p.string());
    }
    models.push_back(std::move(lm));
  }
  const auto records = load_dataset(f.data);
  if (records.empty()) throw IngestionError("no records in " + f.data.string());
  std::vector<std::vector<double>> columns;
  for (auto& lm : models) columns.push_back(predict(lm.model, normalize(records, lm.meta.normalization)));

  std::ofstream o(f.out, std::ios::trunc);
  if (!o) throw IoError("cannot write " + f.out.string());
  o << "record_id,timestamp";
  for (const auto& lm : models) o << ',' << target_column(lm.meta.target);
  o << '\n';
  for (std::size_t i = 0; i < records.size(); ++i) {
    o << records[i].id << ',' << records[i].timestamp.value_or("");
    for (const auto& c : columns) o << ',' << format_exact(c[i]);
    o << '\n';
  }
  if (!o) throw IoError("failed writing " + f.out.string());
  if (json) {
    out << nlohmann::json{{"predictions", f.out.string()}, {"n", records.size()}, {"models", models.size()}}.dump()
        << '\n';
  } else {
    out << "wrote " << records.size() << " predictions to " << f.out.string() << '\n';
  }
  return 0;
}

inline int cmd_report(const ReportFlags& f, bool json, std::ostream& out) {
  const auto summaries = write_report(read_predictions(f.predictions), f.out);
  if (json) {
    std::ifstream in(f.out / "summary.json");
    out << in.rdbuf();
  } else {
    for (const auto& s : summaries) {
      out << s.parameter << ": n=" << s.n << " min=" << format_exact(s.min) << " max=" << format_exact(s.max)
          << " mean=" << format_exact(s.mean)
          << " slope_per_day=" << (s.slope_per_day ? format_exact(*s.slope_per_day) : std::string("n/a")) << '\n';
    }
  }
  return 0;
}

inline int cmd_gradcheck(const GradcheckFlags& f, bool json, std::ostream& out) {
  GradcheckOptions opts;
  opts.seed = f.seed;
  std::vector<GradcheckResult> results;
  std::ostringstream text;
  const int code = run_gradcheck_suite(standard_gradcheck_cases(f.seed), opts, json ? text : out, &results);
  if (json) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : results) {
      j.push_back({{"op", r.op}, {"max_rel_error", r.max_rel_error}, {"threshold", r.threshold}, {"passed", r.passed()}});
    }
    out << j.dump(2) << '\n';
  }
  return code;
}

}  // namespace cli

/// Parses and runs one subcommand. `args` excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Attention-based residual 1-D CNN for ECG parameter regression", "aicrn"};
  app.require_subcommand(1);
  bool json = false;
  app.add_flag("--json", json, "Machine-readable output on stdout");

  cli::GenDataFlags gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic labelled ECG corpus");
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--n", gen.n, "Number of records")->required();
  gen_cmd->add_option("--seed", gen.seed, "Random seed");
  gen_cmd->add_option("--noise", gen.noise, "Noise standard deviation in mV")->capture_default_str();
  gen_cmd->add_option("--duration", gen.duration, "Record duration in seconds")->capture_default_str();

  cli::TrainFlags tr;
  auto* train_cmd = app.add_subcommand("train", "Train one model per selected target");
  train_cmd->add_option("--data", tr.data, "Metadata CSV")->required();
  train_cmd->add_option("--target", tr.target, "pr, qt, qrs, hr, rpa, twa or all")->required();
  train_cmd->add_option("--out", tr.out, "Output directory")->required();
  train_cmd->add_option("--width", tr.width, "Channel width")->capture_default_str();
  train_cmd->add_option("--blocks", tr.blocks, "Residual attention modules")->capture_default_str();
  train_cmd->add_flag("--no-attention", tr.no_attention, "Drop CBAM from every module");
  train_cmd->add_option("--epochs", tr.epochs, "Maximum epochs")->capture_default_str();
  train_cmd->add_option("--batch", tr.batch, "Minibatch size")->capture_default_str();
  train_cmd->add_option("--lr", tr.lr, "Nadam learning rate")->capture_default_str();
  train_cmd->add_option("--patience", tr.patience, "Early-stopping patience")->capture_default_str();
  train_cmd->add_option("--min-delta", tr.min_delta, "Minimum improvement")->capture_default_str();
  train_cmd->add_option("--seed", tr.seed, "Seed for split, init, shuffling and dropout");
  train_cmd->add_flag("--standardize-target", tr.standardize_target,
                      "Regress z-scored labels through a fixed output affine");
  train_cmd->add_option("--split-ratios", tr.split_ratios, "Train, val and test fractions")->expected(3);

  cli::EvalFlags ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval_cmd->add_option("--model", ev.model, "Checkpoint (.aicn)")->required();
  eval_cmd->add_option("--data", ev.data, "Metadata CSV")->required();
  eval_cmd->add_option("--split", ev.split, "train, val, test or all")->capture_default_str();
  eval_cmd->add_option("--out", ev.out, "Also write the JSON result here");

  cli::PredictFlags pr;
  auto* predict_cmd = app.add_subcommand("predict", "Predict parameters for every record");
  predict_cmd->add_option("--model", pr.models, "One or more checkpoints")->required()->expected(1, -1);
  predict_cmd->add_option("--data", pr.data, "Metadata CSV")->required();
  predict_cmd->add_option("--out", pr.out, "Output CSV")->required();

  cli::ReportFlags rp;
  auto* report_cmd = app.add_subcommand("report", "Per-parameter time series and trends");
  report_cmd->add_option("--predictions", rp.predictions, "Predictions CSV")->required();
  report_cmd->add_option("--out", rp.out, "Output directory")->required();

  cli::GradcheckFlags gc;
  auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference check of every backward rule");
  grad_cmd->add_option("--seed", gc.seed, "Random seed");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto chosen = app.get_subcommands();
    err << (chosen.empty() ? app.help() : chosen.front()->help());
    return 2;
  }

  try {
    if (*gen_cmd) return cli::cmd_gen_data(gen, json, out);
    if (*train_cmd) return cli::cmd_train(tr, json, out, err);
    if (*eval_cmd) return cli::cmd_eval(ev, json, out);
    if (*predict_cmd) return cli::cmd_predict(pr, json, out);
    if (*report_cmd) return cli::cmd_report(rp, json, out);
    if (*grad_cmd) return cli::cmd_gradcheck(gc, json, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

inline int run_cli(int argc, char** argv) {
  configure_allocator();
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args);
}

}  // namespace aicrn

#endif  // AICRN_CLI_HPP_
