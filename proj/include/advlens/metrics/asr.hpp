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

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "advlens/core/detection.hpp"

namespace advlens {

using DetectionsPerImage = std::vector<std::vector<DetectedObject>>;

namespace detail {

inline void check_aligned(const DetectionsPerImage& benign, const DetectionsPerImage& adversarial, const char* what) {
  if (benign.size() != adversarial.size()) throw ValidationError(std::string(what) + ": image count mismatch");
  if (benign.empty()) throw ValidationError(std::string(what) + ": empty dataset");
}

inline std::size_t benign_count(const DetectionsPerImage& benign) {
  std::size_t n = 0;
  for (const auto& b : benign) n += b.size();
  return n;
}

}  // namespace detail

/// Fraction of benign objects with no adversarial detection at IOU >= t_iou (class-agnostic).
inline double asr_vanishing(const DetectionsPerImage& benign, const DetectionsPerImage& adversarial,
                            double t_iou = 0.5) {
  detail::check_aligned(benign, adversarial, "asr_vanishing");
  const std::size_t total = detail::benign_count(benign);
  if (total == 0) throw ValidationError("asr_vanishing: no benign detections");
  std::size_t vanished = 0;
  for (std::size_t i = 0; i < benign.size(); ++i)
    for (const auto& m : match_detections(benign[i], adversarial[i], t_iou)) vanished += !m.matched;
  return static_cast<double>(vanished) / static_cast<double>(total);
}

/// Fraction of images with more adversarial than benign detections.
inline double asr_fabrication(const DetectionsPerImage& benign, const DetectionsPerImage& adversarial) {
  detail::check_aligned(benign, adversarial, "asr_fabrication");
  std::size_t more = 0;
  for (std::size_t i = 0; i < benign.size(); ++i) more += adversarial[i].size() > benign[i].size();
  return static_cast<double>(more) / static_cast<double>(benign.size());
}

/// Fraction of benign objects covered (IOU >= t_iou) by an adversarial object
/// labelled with that object's target class. `targets[i][j]` is the target of
/// benign object j in image i.
inline double asr_mislabeling(const DetectionsPerImage& benign, const DetectionsPerImage& adversarial,
                              const std::vector<std::vector<int>>& targets, double t_iou = 0.5) {
  detail::check_aligned(benign, adversarial, "asr_mislabeling");
  if (targets.size() != benign.size()) throw ValidationError("asr_mislabeling: target count mismatch");
  const std::size_t total = detail::benign_count(benign);
  if (total == 0) throw ValidationError("asr_mislabeling: no benign detections");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < benign.size(); ++i) {
    if (targets[i].size() != benign[i].size()) throw ValidationError("asr_mislabeling: target count mismatch");
    for (std::size_t j = 0; j < benign[i].size(); ++j) {
      for (const auto& a : adversarial[i]) {
        if (a.class_id == targets[i][j] && iou(benign[i][j].box, a.box) >= t_iou) {
          ++hit;
          break;
        }
      }
    }
  }
  return static_cast<double>(hit) / static_cast<double>(total);
}

inline std::vector<std::vector<int>> targets_from_map(const DetectionsPerImage& benign, std::span<const int> target_map) {
  std::vector<std::vector<int>> t(benign.size());
  for (std::size_t i = 0; i < benign.size(); ++i)
    for (const auto& b : benign[i]) {
      if (b.class_id < 0 || static_cast<std::size_t>(b.class_id) >= target_map.size())
        throw ValidationError("target_map does not cover class " + std::to_string(b.class_id));
      t[i].push_back(target_map[static_cast<std::size_t>(b.class_id)]);
    }
  return t;
}

inline double asr_mislabeling(const DetectionsPerImage& benign, const DetectionsPerImage& adversarial,
                              std::span<const int> target_map, double t_iou = 0.5) {
  return asr_mislabeling(benign, adversarial, targets_from_map(benign, target_map), t_iou);
}

/// Fraction of benign objects covered (IOU >= t_iou) by an adversarial object of a different class.
inline double misdetection_rate(const DetectionsPerImage& benign, const DetectionsPerImage& adversarial,
                                double t_iou = 0.5) {
  detail::check_aligned(benign, adversarial, "misdetection_rate");
  const std::size_t total = detail::benign_count(benign);
  if (total == 0) throw ValidationError("misdetection_rate: no benign detections");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < benign.size(); ++i)
    for (const auto& b : benign[i])
      for (const auto& a : adversarial[i])
        if (a.class_id != b.class_id && iou(b.box, a.box) >= t_iou) {
          ++hit;
          break;
        }
  return static_cast<double>(hit) / static_cast<double>(total);
}

}  // namespace advlens
