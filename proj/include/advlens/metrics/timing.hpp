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
#include <chrono>
#include <span>
#include <utility>
#include <vector>

#include "advlens/core/detection.hpp"
#include "advlens/core/error.hpp"

namespace advlens {

struct TimingRecord {
  double detection_time_s = 0.0;
  double attack_time_s = 0.0;
  double total_time_s = 0.0;
};

inline TimingRecord make_timing(double detection_s, double attack_s) {
  return {detection_s, attack_s, detection_s + attack_s};
}

/// Runs `f` and returns {result, wall seconds}; for void callables only the seconds.
template <class F>
auto timing_wrap(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  if constexpr (std::is_void_v<std::invoke_result_t<F>>) {
    std::forward<F>(f)();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  } else {
    auto r = std::forward<F>(f)();
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return std::pair<decltype(r), double>(std::move(r), s);
  }
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Component-wise medians; total is recomputed so it stays detection + attack.
inline TimingRecord median_timing(std::span<const TimingRecord> records) {
  std::vector<double> d, a;
  for (const auto& r : records) {
    d.push_back(r.detection_time_s);
    a.push_back(r.attack_time_s);
  }
  return make_timing(median(d), median(a));
}

/// Mean post-NMS object count per image at each confidence threshold.
inline std::vector<double> objects_vs_threshold(const std::vector<std::vector<DetectionCandidate>>& raw,
                                                std::span<const double> thresholds, double nms_iou = 0.5) {
  if (raw.empty()) throw ValidationError("objects_vs_threshold: no images");
  std::vector<double> out;
  for (double t : thresholds) {
    double total = 0.0;
    for (const auto& c : raw) total += static_cast<double>(nms(std::span<const DetectionCandidate>(c), nms_iou, t).size());
    out.push_back(total / static_cast<double>(raw.size()));
  }
  return out;
}

}  // namespace advlens
