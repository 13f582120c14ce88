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
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "advlens/core/detection.hpp"

namespace advlens {

struct RankedDetection {
  DetectedObject object;
  std::size_t image_id = 0;
};

struct PRCurvePoint {
  double recall = 0.0;
  double precision = 0.0;
  double confidence = 0.0;
};

enum class Interpolation { ElevenPoint, AllPoints };

using GroundTruthSet = std::vector<std::vector<GroundTruthObject>>;  // indexed by image id

/// Interpolated AP of one class. Detections are matched greedily, in
/// descending confidence, to the best-overlap ground truth of the same class;
/// a detection whose best match is already taken is a false positive.
/// Returns nullopt when the class has no ground truth.
inline std::optional<double> average_precision(std::span<const RankedDetection> detections,
                                               const GroundTruthSet& ground_truth, int class_id,
                                               double t_iou = 0.5,
                                               Interpolation mode = Interpolation::ElevenPoint,
                                               std::vector<PRCurvePoint>* curve = nullptr) {
  std::size_t npos = 0;
  std::vector<std::vector<bool>> taken(ground_truth.size());
  for (std::size_t i = 0; i < ground_truth.size(); ++i) {
    taken[i].assign(ground_truth[i].size(), false);
    for (const auto& g : ground_truth[i]) npos += g.class_id == class_id;
  }
  if (npos == 0) return std::nullopt;

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < detections.size(); ++i)
    if (detections[i].object.class_id == class_id) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return detections[a].object.confidence > detections[b].object.confidence;
  });

  std::vector<double> prec, rec;
  std::size_t tp = 0, fp = 0;
  for (std::size_t idx : order) {
    const auto& d = detections[idx];
    const auto& gts = d.image_id < ground_truth.size() ? ground_truth[d.image_id] : std::vector<GroundTruthObject>{};
    double best = -1.0;
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < gts.size(); ++j) {
      if (gts[j].class_id != class_id) continue;
      const double v = iou(d.object.box, gts[j].box);
      if (v > best) {
        best = v;
        best_j = j;
      }
    }
    if (best >= t_iou && !taken[d.image_id][best_j]) {
      taken[d.image_id][best_j] = true;
      ++tp;
    } else {
      ++fp;
    }
    rec.push_back(static_cast<double>(tp) / static_cast<double>(npos));
    prec.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
    if (curve) curve->push_back({rec.back(), prec.back(), d.object.confidence});
  }

  if (mode == Interpolation::ElevenPoint) {
    double ap = 0.0;
    for (int t = 0; t <= 10; ++t) {
      const double level = t / 10.0;
      double p = 0.0;
      for (std::size_t i = 0; i < rec.size(); ++i)
        if (rec[i] >= level - 1e-12) p = std::max(p, prec[i]);
      ap += p / 11.0;
    }
    return ap;
  }
  // all-points: area under the monotone precision envelope
  std::vector<double> mrec{0.0}, mpre{0.0};
  mrec.insert(mrec.end(), rec.begin(), rec.end());
  mpre.insert(mpre.end(), prec.begin(), prec.end());
  mrec.push_back(1.0);
  mpre.push_back(0.0);
  for (std::size_t i = mpre.size() - 1; i-- > 0;) mpre[i] = std::max(mpre[i], mpre[i + 1]);
  double ap = 0.0;
  for (std::size_t i = 1; i < mrec.size(); ++i) ap += (mrec[i] - mrec[i - 1]) * mpre[i];
  return ap;
}

/// Mean over classes with defined AP.
inline double mean_ap(std::span<const std::optional<double>> per_class) {
  double sum = 0.0;
  int n = 0;
  for (const auto& ap : per_class) {
    if (ap) {
      sum += *ap;
      ++n;
    }
  }
  if (n == 0) throw ValidationError("mean_ap: no class has a defined AP");
  return sum / n;
}

struct MapResult {
  std::vector<std::optional<double>> per_class_ap;
  double map = 0.0;
};

/// Per-class AP and mAP for detections grouped by image.
inline MapResult evaluate_map(const std::vector<std::vector<DetectedObject>>& detections,
                              const GroundTruthSet& ground_truth, int num_classes, double t_iou = 0.5,
                              Interpolation mode = Interpolation::ElevenPoint) {
  if (detections.size() != ground_truth.size()) throw ValidationError("evaluate_map: image count mismatch");
  std::vector<RankedDetection> flat;
  for (std::size_t i = 0; i < detections.size(); ++i)
    for (const auto& d : detections[i]) flat.push_back({d, i});
  MapResult r;
  for (int k = 0; k < num_classes; ++k) r.per_class_ap.push_back(average_precision(flat, ground_truth, k, t_iou, mode));
  r.map = mean_ap(r.per_class_ap);
  return r;
}

}  // namespace advlens
