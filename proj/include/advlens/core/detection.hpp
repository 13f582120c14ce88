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

#include "advlens/core/box.hpp"

namespace advlens {

/// Raw detector output for one candidate slot (grid cell or proposal).
struct DetectionCandidate {
  BoundingBox box;
  double objectness = 0.0;
  std::vector<double> class_probs;

  int best_class() const {
    return static_cast<int>(std::max_element(class_probs.begin(), class_probs.end()) - class_probs.begin());
  }
  /// objectness x max class probability.
  double confidence() const {
    return class_probs.empty() ? 0.0 : objectness * class_probs[static_cast<std::size_t>(best_class())];
  }
};

struct DetectedObject {
  BoundingBox box;
  int class_id = 0;
  double confidence = 0.0;
  /// Class distribution of the source candidate; empty when unknown.
  std::vector<double> class_probs;
};

struct GroundTruthObject {
  BoundingBox box;
  int class_id = 0;
};

namespace detail {

inline std::vector<DetectedObject> greedy_per_class(std::vector<DetectedObject> pool, double iou_threshold) {
  // stable_sort keeps input order among equal confidences
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pool[a].confidence > pool[b].confidence; });
  std::vector<DetectedObject> kept;
  for (std::size_t idx : order) {
    const auto& cand = pool[idx];
    bool suppressed = false;
    for (const auto& k : kept) {
      if (k.class_id == cand.class_id && iou(k.box, cand.box) >= iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(cand);
  }
  return kept;
}

inline void check_nms_args(double iou_threshold, double confidence_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0))
    throw ValidationError("nms: iou_threshold must be in (0,1]");
  if (!(confidence_threshold >= 0.0 && confidence_threshold <= 1.0))
    throw ValidationError("nms: confidence_threshold must be in [0,1]");
}

}  // namespace detail

/// Confidence thresholding followed by per-class greedy suppression.
/// Output is sorted by descending confidence, ties by candidate index.
inline std::vector<DetectedObject> nms(std::span<const DetectionCandidate> candidates, double iou_threshold,
                                       double confidence_threshold) {
  detail::check_nms_args(iou_threshold, confidence_threshold);
  std::vector<DetectedObject> pool;
  pool.reserve(candidates.size());
  for (const auto& c : candidates) {
    const double conf = c.confidence();
    if (conf < confidence_threshold) continue;
    pool.push_back({c.box, c.best_class(), conf, c.class_probs});
  }
  return detail::greedy_per_class(std::move(pool), iou_threshold);
}

/// Same suppression applied to already-decoded objects.
inline std::vector<DetectedObject> nms(std::span<const DetectedObject> objects, double iou_threshold,
                                       double confidence_threshold) {
  detail::check_nms_args(iou_threshold, confidence_threshold);
  std::vector<DetectedObject> pool;
  for (const auto& o : objects)
    if (o.confidence >= confidence_threshold) pool.push_back(o);
  return detail::greedy_per_class(std::move(pool), iou_threshold);
}

enum class MatchMode {
  /// every element of A looks for its best partner in all of B
  Existence,
  /// A processed by descending confidence; each B element used at most once
  GreedyOneToOne,
};

struct MatchEntry {
  bool matched = false;
  std::optional<std::size_t> partner;  // best-overlap index into set B
  double best_iou = 0.0;
  int partner_class = -1;
};

/// Overlap matching of `a` against `b` at IOU >= t_iou. In Existence mode the
/// partner is the best-overlap element of `b` regardless of matching status.
inline std::vector<MatchEntry> match_detections(std::span<const DetectedObject> a, std::span<const DetectedObject> b,
                                                double t_iou, MatchMode mode = MatchMode::Existence,
                                                bool require_same_class = false) {
  if (!(t_iou > 0.0 && t_iou <= 1.0)) throw ValidationError("match_detections: t_iou must be in (0,1]");
  std::vector<MatchEntry> out(a.size());
  if (mode == MatchMode::Existence) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < b.size(); ++j) {
        if (require_same_class && a[i].class_id != b[j].class_id) continue;
        const double v = iou(a[i].box, b[j].box);
        if (v > out[i].best_iou || (!out[i].partner && v > 0.0)) {
          out[i].best_iou = v;
          out[i].partner = j;
          out[i].partner_class = b[j].class_id;
        }
      }
      out[i].matched = out[i].partner.has_value() && out[i].best_iou >= t_iou;
    }
    return out;
  }
  std::vector<std::size_t> order(a.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a[x].confidence > a[y].confidence; });
  std::vector<bool> used(b.size(), false);
  for (std::size_t i : order) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j]) continue;
      if (require_same_class && a[i].class_id != b[j].class_id) continue;
      const double v = iou(a[i].box, b[j].box);
      if (v > out[i].best_iou) {
        out[i].best_iou = v;
        out[i].partner = j;
        out[i].partner_class = b[j].class_id;
      }
    }
    if (out[i].partner && out[i].best_iou >= t_iou) {
      out[i].matched = true;
      used[*out[i].partner] = true;
    }
  }
  return out;
}

}  // namespace advlens
