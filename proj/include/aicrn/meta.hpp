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

// The JSON sidecar stored beside each checkpoint. It carries what inference
// needs besides the weights (target, lead statistics, split recipe) and the
// metrics of the run that produced them.

#ifndef AICRN_META_HPP_
#define AICRN_META_HPP_

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aicrn/data.hpp"
#include "aicrn/error.hpp"
#include "aicrn/metrics.hpp"
#include "aicrn/network.hpp"

namespace aicrn {

inline nlohmann::json metrics_json(const RegressionMetrics& m) {
  nlohmann::json j;
  j["mae"] = m.mae;
  j["rmse"] = m.rmse;
  j["r2"] = m.r2 ? nlohmann::json(*m.r2) : nlohmann::json(nullptr);
  return j;
}

struct ModelMeta {
  std::string status = "complete";
  Target target = Target::hr;
  AicrnConfig config;
  NormalizationStats normalization;
  SplitSpec split;
  nlohmann::json training = nlohmann::json::object();
  nlohmann::json metrics = nlohmann::json::object();

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["status"] = status;
    j["target"] = std::string(target_name(target));
    j["attention"] = config.attention;
    j["config"] = config;
    j["normalization"] = {{"leads", normalization.lead_names},
                          {"mean", normalization.mean},
                          {"std", normalization.std}};
    j["split"] = {{"train", split.train}, {"val", split.val}, {"test", split.test}, {"seed", split.seed}};
    j["training"] = training;
    j["metrics"] = metrics;
    return j;
  }

  static ModelMeta from_json(const nlohmann::json& j) {
    ModelMeta m;
    m.status = j.at("status").get<std::string>();
    m.target = parse_target(j.at("target").get<std::string>());
    m.config = j.at("config").get<AicrnConfig>();
    const auto& n = j.at("normalization");
    m.normalization.lead_names = n.at("leads").get<std::vector<std::string>>();
    m.normalization.mean = n.at("mean").get<std::vector<double>>();
    m.normalization.std = n.at("std").get<std::vector<double>>();
    const auto& s = j.at("split");
    m.split.train = s.at("train").get<double>();
    m.split.val = s.at("val").get<double>();
    m.split.test = s.at("test").get<double>();
    m.split.seed = s.at("seed").get<std::uint64_t>();
    if (j.contains("training")) m.training = j.at("training");
    if (j.contains("metrics")) m.metrics = j.at("metrics");
    return m;
  }
};

inline void save_meta(const ModelMeta& meta, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << meta.to_json().dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

inline ModelMeta load_meta(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model metadata " + path.string());
  try {
    return ModelMeta::from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw CorruptCheckpointError("model metadata " + path.string() + " unreadable: " + e.what());
  }
}

}  // namespace aicrn

#endif  // AICRN_META_HPP_
