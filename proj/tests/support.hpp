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

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "advlens/io/checkpoint.hpp"
#include "advlens/models/factory.hpp"
#include "advlens/models/train.hpp"

#ifndef ADVLENS_FIXTURE_DIR
#define ADVLENS_FIXTURE_DIR "fixtures"
#endif

namespace advlens::testing {

// Same datasets, seeds and training schedule as configs/default.json.
inline constexpr std::uint64_t kTrainSeed = 7;
inline constexpr std::uint64_t kTestSeed = 8;
inline constexpr int kTrainCount = 500;
inline constexpr int kTestCount = 100;
inline constexpr int kResolution = 64;
inline constexpr int kClasses = 3;
inline constexpr std::uint64_t kRunSeed = 1;

inline const ShapesDataset& train_set() {
  static const ShapesDataset ds = generate_shapes_dataset(kTrainSeed, kTrainCount, {kResolution, kResolution}, kClasses);
  return ds;
}

inline const ShapesDataset& test_set() {
  static const ShapesDataset ds = generate_shapes_dataset(kTestSeed, kTestCount, {kResolution, kResolution}, kClasses);
  return ds;
}

inline ModelSpec fixture_spec(Family family, const std::string& backbone) {
  ModelSpec s;
  s.family = family;
  s.backbone = backbone;
  s.resolution = s.base_resolution = kResolution;
  s.num_classes = kClasses;
  return s;
}

/// Init-seed slot of each model, following the model order of configs/transfer.json.
inline std::uint64_t fixture_slot(Family family, const std::string& backbone) {
  return (family == Family::OnePhase ? 0 : 2) + (backbone == "b4" ? 1 : 0);
}

/// Trained detector, cached as a checkpoint under the build tree.
inline const DetectorModel& trained(Family family, const std::string& backbone) {
  static std::mutex mu;
  static std::map<std::string, std::unique_ptr<DetectorModel>> cache;
  const std::lock_guard<std::mutex> lock(mu);
  const std::string id = std::string(to_string(family)) + "-" + backbone;
  if (auto it = cache.find(id); it != cache.end()) return *it->second;

  const std::filesystem::path path = std::filesystem::path(ADVLENS_FIXTURE_DIR) / (id + ".ckpt");
  const ModelSpec spec = fixture_spec(family, backbone);
  if (std::filesystem::exists(path)) {
    auto ck = io::load_checkpoint(path);
    if (ck.model->spec() == spec) return *(cache[id] = std::move(ck.model));
  }
  auto model = make_detector(spec, kRunSeed * 7919 + fixture_slot(family, backbone) + 1);
  TrainConfig tc;
  tc.seed = kRunSeed;
  train(*model, train_set(), tc);
  std::filesystem::create_directories(path.parent_path());
  io::save_checkpoint(path, *model, {{"id", id}});
  return *(cache[id] = std::move(model));
}

inline const DetectorModel& one_phase() { return trained(Family::OnePhase, "b3"); }
inline const DetectorModel& two_phase() { return trained(Family::TwoPhase, "b3"); }

/// Untrained detector for gradient and shape checks.
inline std::unique_ptr<DetectorModel> fresh(Family family, std::uint64_t seed = 3, int resolution = 64,
                                            const std::string& backbone = "b3") {
  ModelSpec s = fixture_spec(family, backbone);
  s.resolution = s.base_resolution = resolution;
  return make_detector(s, seed);
}

}  // namespace advlens::testing
