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

#include <vector>

#include "advlens/core/parallel.hpp"
#include "advlens/metrics/ap.hpp"
#include "advlens/metrics/asr.hpp"
#include "advlens/models/detector.hpp"

namespace advlens {

struct EvalSettings {
  double t_iou = 0.5;
  double confidence_threshold = 0.5;
  double nms_iou = 0.5;
  Interpolation interpolation = Interpolation::ElevenPoint;
};

inline DetectionsPerImage detect_all(const DetectorModel& model, const std::vector<Image>& images,
                                     const EvalSettings& s, int jobs = 1) {
  DetectionsPerImage out(images.size());
  parallel_for(images.size(), jobs,
               [&](std::size_t i) { out[i] = model.detect(images[i], s.confidence_threshold, s.nms_iou); });
  return out;
}

inline MapResult evaluate_detections(const DetectionsPerImage& dets, const GroundTruthSet& gt, int num_classes,
                                     const EvalSettings& s) {
  return evaluate_map(dets, gt, num_classes, s.t_iou, s.interpolation);
}

}  // namespace advlens
