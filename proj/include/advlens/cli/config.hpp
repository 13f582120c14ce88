// Copyright 2026 The advlens Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "advlens/attacks/registry.hpp"
#include "advlens/io/binary.hpp"
#include "advlens/metrics/evaluate.hpp"
#include "advlens/models/factory.hpp"
#include "advlens/models/train.hpp"

namespace advlens::cli {

using nlohmann::json;

struct DatasetSpec {
  std::uint64_t train_seed = 7;
  int train_count = 500;
  std::uint64_t test_seed = 8;
  int test_count = 100;
  int resolution = 64;
  int num_classes = 3;
};

struct ModelEntry {
  std::string id;
  ModelSpec spec;
};

struct AttackEntry {
  std::string name;
  AttackConfig config;
  std::vector<std::string> models;  // empty: every model
};

struct TransferSpec {
  std::string attack = "tog-untargeted";
  std::vector<std::string> source_models;
  std::vector<std::string> target_models;
  std::string resolution_model;
  std::vector<int> resolutions{48, 64, 80, 96};
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  int jobs = 1;
  DatasetSpec dataset;
  std::vector<ModelEntry> models;
  TrainConfig train;
  std::vector<AttackEntry> attacks;
  EvalSettings metrics;
  std::vector<double> curve_thresholds{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::optional<TransferSpec> transfer;
  std::string output = "runs/default";

  const ModelEntry& model(const std::string& id) const {
    for (const auto& m : models)
      if (m.id == id) return m;
    throw ValidationError("unknown model id '" + id + "'");
  }
};

namespace detail {

inline void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* key : keys) ok = ok || k == key;
    if (!ok) throw ValidationError(where + ": unknown key '" + k + "'");
  }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(where + "." + key + ": wrong type");
  }
}

inline const char* interpolation_name(Interpolation i) {
  return i == Interpolation::ElevenPoint ? "11-point" : "all-points";
}

}  // namespace detail

inline AttackEntry parse_attack(const json& j) {
  detail::reject_unknown(j,
                         {"name", "eps", "alpha", "iterations", "rng_seed", "iou_nms_attack", "target_map",
                          "anchor_confidence", "anchor_nms_iou", "rap_tau", "models"},
                         "attacks[]");
  AttackEntry a;
  detail::read(j, "name", a.name, "attacks[]");
  check_attack_name(a.name);
  a.config = default_config_for(a.name);
  auto& c = a.config;
  const std::string w = "attacks[" + a.name + "]";
  detail::read(j, "eps", c.eps, w);
  detail::read(j, "alpha", c.alpha, w);
  detail::read(j, "iterations", c.iterations, w);
  detail::read(j, "rng_seed", c.rng_seed, w);
  detail::read(j, "iou_nms_attack", c.iou_nms_attack, w);
  detail::read(j, "anchor_confidence", c.anchor_confidence, w);
  detail::read(j, "anchor_nms_iou", c.anchor_nms_iou, w);
  detail::read(j, "rap_tau", c.rap_tau, w);
  detail::read(j, "models", a.models, w);
  if (j.contains("target_map") && !j["target_map"].is_null()) {
    std::vector<int> tm;
    detail::read(j, "target_map", tm, w);
    c.target_map = tm;
    c.target_mode = TargetMode::ClassMap;
  }
  return a;
}

inline json attack_to_json(const AttackEntry& a) {
  const auto& c = a.config;
  json j = {{"name", a.name},
            {"eps", c.eps},
            {"alpha", c.alpha},
            {"iterations", c.iterations},
            {"rng_seed", c.rng_seed},
            {"iou_nms_attack", c.iou_nms_attack},
            {"anchor_confidence", c.anchor_confidence},
            {"anchor_nms_iou", c.anchor_nms_iou},
            {"rap_tau", c.rap_tau},
            {"models", a.models}};
  j["target_map"] = c.target_map ? json(*c.target_map) : json();
  return j;
}

/// Full validation; nothing on disk is touched.
inline void validate(const ExperimentConfig& c) {
  const auto& d = c.dataset;
  if (d.train_count < 1 || d.test_count < 1) throw ValidationError("dataset counts must be >= 1");
  if (d.num_classes < 2 || d.num_classes > 8) throw ValidationError("dataset.num_classes must be in [2,8]");
  if (d.resolution < 32) throw ValidationError("dataset.resolution must be >= 32");
  if (c.jobs < 1) throw ValidationError("jobs must be >= 1");
  std::set<std::string> ids;
  for (const auto& m : c.models) {
    if (m.id.empty()) throw ValidationError("model id must be nonempty");
    if (!ids.insert(m.id).second) throw ValidationError("duplicate model id '" + m.id + "'");
    advlens::validate(m.spec);
    if (m.spec.num_classes != d.num_classes) throw ValidationError("model " + m.id + ": num_classes differs from dataset");
    if (m.spec.resolution != d.resolution) throw ValidationError("model " + m.id + ": resolution differs from dataset");
  }
  if (c.train.epochs < 0 || c.train.batch_size < 1 || !(c.train.learning_rate > 0.0))
    throw ValidationError("invalid train section");
  for (const auto& a : c.attacks) {
    a.config.validate(d.num_classes);
    for (const auto& id : a.models) c.model(id);
  }
  const auto& m = c.metrics;
  if (!(m.t_iou > 0.0 && m.t_iou <= 1.0)) throw ValidationError("metrics.t_iou must be in (0,1]");
  if (!(m.confidence_threshold >= 0.0 && m.confidence_threshold <= 1.0))
    throw ValidationError("metrics.confidence_threshold must be in [0,1]");
  if (!(m.nms_iou > 0.0 && m.nms_iou <= 1.0)) throw ValidationError("metrics.nms_iou must be in (0,1]");
  for (double t : c.curve_thresholds)
    if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("metrics.curve_thresholds must lie in [0,1]");
  if (c.transfer) {
    const auto& t = *c.transfer;
    check_attack_name(t.attack);
    if (t.source_models.empty() || t.target_models.empty())
      throw ValidationError("transfer: source_models and target_models must be nonempty");
    for (const auto& id : t.source_models) c.model(id);
    for (const auto& id : t.target_models) c.model(id);
    if (!t.resolution_model.empty()) c.model(t.resolution_model);
    if (t.resolutions.empty()) throw ValidationError("transfer.resolutions must be nonempty");
    for (int r : t.resolutions)
      if (r < 32) throw ValidationError("transfer.resolutions entries must be >= 32");
  }
  if (c.output.empty()) throw ValidationError("output directory must be set");
}

inline ExperimentConfig parse_config(const json& j) {
  detail::reject_unknown(j, {"seed", "jobs", "dataset", "models", "train", "attacks", "metrics", "transfer", "output"},
                         "config");
  ExperimentConfig c;
  detail::read(j, "seed", c.seed, "config");
  detail::read(j, "jobs", c.jobs, "config");
  detail::read(j, "output", c.output, "config");
  if (j.contains("dataset")) {
    const auto& d = j["dataset"];
    detail::reject_unknown(d, {"train_seed", "train_count", "test_seed", "test_count", "resolution", "num_classes"},
                           "dataset");
    detail::read(d, "train_seed", c.dataset.train_seed, "dataset");
    detail::read(d, "train_count", c.dataset.train_count, "dataset");
    detail::read(d, "test_seed", c.dataset.test_seed, "dataset");
    detail::read(d, "test_count", c.dataset.test_count, "dataset");
    detail::read(d, "resolution", c.dataset.resolution, "dataset");
    detail::read(d, "num_classes", c.dataset.num_classes, "dataset");
  }
  if (j.contains("models")) {
    if (!j["models"].is_array()) throw ValidationError("models: expected an array");
    for (const auto& m : j["models"]) {
      detail::reject_unknown(m, {"id", "family", "backbone"}, "models[]");
      ModelEntry e;
      std::string fam = "one-phase";
      detail::read(m, "family", fam, "models[]");
      e.spec.family = family_from_string(fam);
      detail::read(m, "backbone", e.spec.backbone, "models[]");
      e.id = m.value("id", fam + "-" + e.spec.backbone);
      c.models.push_back(e);
    }
  }
  for (auto& m : c.models) {
    m.spec.resolution = m.spec.base_resolution = c.dataset.resolution;
    m.spec.num_classes = c.dataset.num_classes;
  }
  if (j.contains("train")) {
    const auto& t = j["train"];
    detail::reject_unknown(t, {"epochs", "learning_rate", "momentum", "batch_size", "clip_norm", "weight_decay"},
                           "train");
    detail::read(t, "epochs", c.train.epochs, "train");
    detail::read(t, "learning_rate", c.train.learning_rate, "train");
    detail::read(t, "momentum", c.train.momentum, "train");
    detail::read(t, "batch_size", c.train.batch_size, "train");
    detail::read(t, "clip_norm", c.train.clip_norm, "train");
    detail::read(t, "weight_decay", c.train.weight_decay, "train");
  }
  if (j.contains("attacks")) {
    if (!j["attacks"].is_array()) throw ValidationError("attacks: expected an array");
    for (const auto& a : j["attacks"]) c.attacks.push_back(parse_attack(a));
  }
  if (j.contains("metrics")) {
    const auto& m = j["metrics"];
    detail::reject_unknown(m, {"t_iou", "confidence_threshold", "nms_iou", "interpolation", "curve_thresholds"},
                           "metrics");
    detail::read(m, "t_iou", c.metrics.t_iou, "metrics");
    detail::read(m, "confidence_threshold", c.metrics.confidence_threshold, "metrics");
    detail::read(m, "nms_iou", c.metrics.nms_iou, "metrics");
    detail::read(m, "curve_thresholds", c.curve_thresholds, "metrics");
    std::string interp = "11-point";
    detail::read(m, "interpolation", interp, "metrics");
    if (interp == "11-point") c.metrics.interpolation = Interpolation::ElevenPoint;
    else if (interp == "all-points") c.metrics.interpolation = Interpolation::AllPoints;
    else throw ValidationError("metrics.interpolation must be 11-point or all-points");
  }
  if (j.contains("transfer") && !j["transfer"].is_null()) {
    const auto& t = j["transfer"];
    detail::reject_unknown(t, {"attack", "source_models", "target_models", "resolution_model", "resolutions"},
                           "transfer");
    TransferSpec ts;
    detail::read(t, "attack", ts.attack, "transfer");
    detail::read(t, "source_models", ts.source_models, "transfer");
    detail::read(t, "target_models", ts.target_models, "transfer");
    detail::read(t, "resolution_model", ts.resolution_model, "transfer");
    detail::read(t, "resolutions", ts.resolutions, "transfer");
    c.transfer = ts;
  }
  return c;
}

inline json to_json(const ExperimentConfig& c) {
  json models = json::array();
  for (const auto& m : c.models)
    models.push_back({{"id", m.id}, {"family", to_string(m.spec.family)}, {"backbone", m.spec.backbone}});
  json attacks = json::array();
  for (const auto& a : c.attacks) attacks.push_back(attack_to_json(a));
  json j = {{"seed", c.seed},
            {"jobs", c.jobs},
            {"output", c.output},
            {"dataset",
             {{"train_seed", c.dataset.train_seed},
              {"train_count", c.dataset.train_count},
              {"test_seed", c.dataset.test_seed},
              {"test_count", c.dataset.test_count},
              {"resolution", c.dataset.resolution},
              {"num_classes", c.dataset.num_classes}}},
            {"models", models},
            {"train",
             {{"epochs", c.train.epochs},
              {"learning_rate", c.train.learning_rate},
              {"momentum", c.train.momentum},
              {"batch_size", c.train.batch_size},
              {"clip_norm", c.train.clip_norm},
              {"weight_decay", c.train.weight_decay}}},
            {"attacks", attacks},
            {"metrics",
             {{"t_iou", c.metrics.t_iou},
              {"confidence_threshold", c.metrics.confidence_threshold},
              {"nms_iou", c.metrics.nms_iou},
              {"interpolation", detail::interpolation_name(c.metrics.interpolation)},
              {"curve_thresholds", c.curve_thresholds}}}};
  if (c.transfer)
    j["transfer"] = {{"attack", c.transfer->attack},
                     {"source_models", c.transfer->source_models},
                     {"target_models", c.transfer->target_models},
                     {"resolution_model", c.transfer->resolution_model},
                     {"resolutions", c.transfer->resolutions}};
  else
    j["transfer"] = nullptr;
  return j;
}

inline ExperimentConfig load_config(const std::filesystem::path& p) {
  json j;
  try {
    j = json::parse(io::read_file(p));
  } catch (const json::parse_error& e) {
    throw ValidationError("config " + p.string() + " is not valid JSON: " + e.what());
  } catch (const IoError& e) {
    throw ValidationError(e.what());
  }
  return parse_config(j);
}

}  // namespace advlens::cli
