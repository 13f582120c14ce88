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

#include <string>
#include <vector>

#include "advlens/attacks/common.hpp"

namespace advlens {

enum class TogVariant { Untargeted, Vanishing, Fabrication, Mislabeling };

inline const char* to_string(TogVariant v) {
  switch (v) {
    case TogVariant::Untargeted: return "tog-untargeted";
    case TogVariant::Vanishing: return "tog-vanishing";
    case TogVariant::Fabrication: return "tog-fabrication";
    case TogVariant::Mislabeling: return "tog-mislabeling";
  }
  return "tog";
}

namespace detail {

/// x'_{t+1} = Proj[x'_t + dir * alpha * sign(grad L(x'_t, targets))]
inline void signed_gradient_loop(const DetectorModel& model, AttackResult& res, std::span<const GroundTruthObject> targets,
                                 unsigned which, double dir, const AttackConfig& cfg) {
  Image& xa = res.adversarial;
  for (int t = 0; t < cfg.iterations; ++t) {
    const LossGradient lg = model.loss_gradient(xa, targets, which);
    res.trace.push_back(which == kLossObj ? lg.loss.obj : lg.loss.total);
    for (std::size_t i = 0; i < xa.pixels.v.size(); ++i) xa.pixels.v[i] += dir * cfg.alpha * sign0(lg.grad.v[i]);
    xa = project_and_clip(xa, res.benign, cfg.eps);
    xa.provenance = Provenance::Adversarial;
    ++res.iterations_used;
  }
}

}  // namespace detail

/// TOG attack family. The anchor is the victim's benign detections on `x`.
inline AttackResult tog_attack(const DetectorModel& model, const Image& x, const AttackConfig& cfg, TogVariant variant) {
  cfg.validate(model.num_classes());
  if (cfg.norm != AttackNorm::Linf) throw ValidationError("TOG attacks are implemented for the Linf norm only");
  Stopwatch sw;
  AttackResult res = start_result(to_string(variant), x);
  res.anchor_detections = model.detect(x, cfg.anchor_confidence, cfg.anchor_nms_iou);
  res.empty_anchor = res.anchor_detections.empty();

  switch (variant) {
    case TogVariant::Untargeted: {
      const auto targets = as_targets(res.anchor_detections);
      detail::signed_gradient_loop(model, res, targets, kLossAll, +1.0, cfg);
      break;
    }
    case TogVariant::Vanishing:
      if (!res.empty_anchor) detail::signed_gradient_loop(model, res, {}, kLossObj, -1.0, cfg);
      break;
    case TogVariant::Fabrication:
      detail::signed_gradient_loop(model, res, {}, kLossObj, +1.0, cfg);
      break;
    case TogVariant::Mislabeling: {
      if (cfg.target_mode == TargetMode::ClassMap && !cfg.target_map)
        throw ValidationError("class-map mislabeling requires target_map");
      if (res.empty_anchor) break;
      auto targets = as_targets(res.anchor_detections);
      for (std::size_t i = 0; i < targets.size(); ++i) {
        const int t = pick_target_class(res.anchor_detections[i], model.num_classes(), cfg.target_mode, cfg.target_map);
        res.target_labels.push_back(t);
        targets[i].class_id = t;
      }
      detail::signed_gradient_loop(model, res, targets, kLossAll, -1.0, cfg);
      break;
    }
  }
  res.attack_time_s = sw.seconds();
  return res;
}

inline AttackResult tog_untargeted(const DetectorModel& m, const Image& x, const AttackConfig& cfg = {}) {
  return tog_attack(m, x, cfg, TogVariant::Untargeted);
}
inline AttackResult tog_vanishing(const DetectorModel& m, const Image& x, const AttackConfig& cfg = {}) {
  return tog_attack(m, x, cfg, TogVariant::Vanishing);
}
inline AttackResult tog_fabrication(const DetectorModel& m, const Image& x, const AttackConfig& cfg = {}) {
  return tog_attack(m, x, cfg, TogVariant::Fabrication);
}
inline AttackResult tog_mislabeling(const DetectorModel& m, const Image& x, const AttackConfig& cfg = {}) {
  return tog_attack(m, x, cfg, TogVariant::Mislabeling);
}

}  // namespace advlens
