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

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "advlens/core/detection.hpp"
#include "advlens/core/error.hpp"
#include "advlens/core/image.hpp"
#include "advlens/models/detector.hpp"

namespace advlens {

enum class AttackNorm { Linf, L2 };

/// How mislabeling targets are chosen for each anchor object.
enum class TargetMode {
  MostLikely,   // most probable incorrect class
  LeastLikely,  // least probable incorrect class
  ClassMap,     // fixed class -> class table
};

struct AttackConfig {
  double eps = 0.031;
  double alpha = 2.0 / 255.0;
  int iterations = 10;
  AttackNorm norm = AttackNorm::Linf;
  std::uint64_t rng_seed = 0;
  double iou_nms_attack = 0.9;
  /// proposal cap in attack mode; 0 keeps the detector's inference cap
  int attack_max_proposals = 64;
  std::optional<std::vector<int>> target_map;
  TargetMode target_mode = TargetMode::MostLikely;

  // benign detections used as the attack anchor
  double anchor_confidence = 0.5;
  double anchor_nms_iou = 0.5;

  // RAP target quadruple on (cx/W, cy/H, tw, th)
  std::array<double, 4> rap_tau{0.0, 0.0, -3.0, -3.0};

  // universal perturbation training
  int universal_epochs = 10;
  int universal_batch = 16;
  int jobs = 1;

  void validate(int num_classes) const {
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw ValidationError("attack eps must be >= 0");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ValidationError("attack alpha must be > 0");
    if (iterations < 0) throw ValidationError("attack iterations must be >= 0");
    if (!(iou_nms_attack > 0.0 && iou_nms_attack <= 1.0)) throw ValidationError("iou_nms_attack must be in (0,1]");
    if (attack_max_proposals < 0) throw ValidationError("attack_max_proposals must be >= 0");
    if (universal_epochs < 0 || universal_batch < 1) throw ValidationError("invalid universal training settings");
    if (target_map) {
      if (static_cast<int>(target_map->size()) != num_classes)
        throw ValidationError("target_map must have one entry per class");
      for (int c = 0; c < num_classes; ++c) {
        const int t = (*target_map)[static_cast<std::size_t>(c)];
        if (t < 0 || t >= num_classes) throw ValidationError("target_map entry out of range");
        if (t == c) throw ValidationError("target_map must map every class to a different class");
      }
    }
  }
};

inline AttackConfig tog_defaults() { return {}; }

inline AttackConfig dag_defaults() {
  AttackConfig c;
  c.alpha = 0.5;  // largest per-pixel step
  c.iterations = 40;
  return c;
}

inline AttackConfig rap_defaults() {
  AttackConfig c;
  c.alpha = 0.05;  // L2 step length
  c.iterations = 40;
  return c;
}

struct AttackResult {
  std::string attack;
  Image adversarial;
  Image benign;
  int iterations_used = 0;
  double attack_time_s = 0.0;
  std::vector<double> trace;  // objective value before each step
  std::vector<DetectedObject> anchor_detections;
  bool empty_anchor = false;
  /// Mislabeling only: target class of each anchor object.
  std::vector<int> target_labels;
};

/// Clamp to the eps-ball around `x_ref`, then to [0,1].
inline Image project_and_clip(const Image& x_adv, const Image& x_ref, double eps) {
  require_same_shape(x_adv.pixels, x_ref.pixels, "project_and_clip");
  if (!(eps >= 0.0)) throw ValidationError("project_and_clip: eps must be >= 0");
  Image out = x_adv;
  for (std::size_t i = 0; i < out.pixels.v.size(); ++i) {
    const double r = x_ref.pixels.v[i];
    out.pixels.v[i] = std::clamp(std::clamp(out.pixels.v[i], r - eps, r + eps), 0.0, 1.0);
  }
  return out;
}

inline Image clip01(Image x) {
  for (double& v : x.pixels.v) v = std::clamp(v, 0.0, 1.0);
  return x;
}

inline double sign0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

inline std::vector<GroundTruthObject> as_targets(std::span<const DetectedObject> dets) {
  std::vector<GroundTruthObject> t;
  t.reserve(dets.size());
  for (const auto& d : dets) t.push_back({d.box, d.class_id});
  return t;
}

/// Target class for one object given its class distribution.
inline int pick_target_class(const DetectedObject& d, int num_classes, TargetMode mode,
                             const std::optional<std::vector<int>>& target_map) {
  if (mode == TargetMode::ClassMap) {
    if (!target_map) throw ValidationError("class-map mislabeling requires target_map");
    return (*target_map)[static_cast<std::size_t>(d.class_id)];
  }
  if (static_cast<int>(d.class_probs.size()) != num_classes)
    throw ValidationError("ML/LL targets need the class distribution of every anchor object");
  int best = -1;
  for (int k = 0; k < num_classes; ++k) {
    if (k == d.class_id) continue;
    if (best < 0) {
      best = k;
      continue;
    }
    const double pk = d.class_probs[static_cast<std::size_t>(k)], pb = d.class_probs[static_cast<std::size_t>(best)];
    if (mode == TargetMode::MostLikely ? pk > pb : pk < pb) best = k;
  }
  return best;
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline AttackResult start_result(std::string name, const Image& x) {
  AttackResult r;
  r.attack = std::move(name);
  r.benign = x;
  r.adversarial = x;
  r.adversarial.provenance = Provenance::Adversarial;
  return r;
}

}  // namespace advlens
