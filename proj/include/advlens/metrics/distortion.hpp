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
#include <cmath>

#include "advlens/core/image.hpp"

namespace advlens {

struct DistortionRecord {
  double linf = 0.0;
  double l2_per_pixel = 0.0;  // Euclidean distance / (H*W)
  double l0_fraction = 0.0;   // pixels whose 8-bit value changed in any channel
  double ssim = 1.0;
};

inline constexpr double kSsimK1 = 0.01 * 0.01;
inline constexpr double kSsimK2 = 0.03 * 0.03;

/// Global-statistics SSIM averaged over channels.
inline double global_ssim(const Image& a, const Image& b) {
  require_same_shape(a.pixels, b.pixels, "ssim");
  const std::size_t n = a.pixel_count();
  if (n == 0) throw ValidationError("ssim: empty image");
  double acc = 0.0;
  for (int c = 0; c < a.channels(); ++c) {
    const double* pa = a.pixels.channel(c);
    const double* pb = b.pixels.channel(c);
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ma += pa[i];
      mb += pb[i];
    }
    ma /= n;
    mb /= n;
    double va = 0.0, vb = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      va += (pa[i] - ma) * (pa[i] - ma);
      vb += (pb[i] - mb) * (pb[i] - mb);
      cov += (pa[i] - ma) * (pb[i] - mb);
    }
    va /= n;
    vb /= n;
    cov /= n;
    acc += (2 * ma * mb + kSsimK1) * (2 * cov + kSsimK2) / ((ma * ma + mb * mb + kSsimK1) * (va + vb + kSsimK2));
  }
  return std::clamp(acc / a.channels(), -1.0, 1.0);
}

inline DistortionRecord distortion(const Image& benign, const Image& adversarial) {
  require_same_shape(benign.pixels, adversarial.pixels, "distortion");
  DistortionRecord r;
  double sq = 0.0;
  for (std::size_t i = 0; i < benign.pixels.v.size(); ++i) {
    const double d = adversarial.pixels.v[i] - benign.pixels.v[i];
    r.linf = std::max(r.linf, std::abs(d));
    sq += d * d;
  }
  const std::size_t n = benign.pixel_count();
  r.l2_per_pixel = std::sqrt(sq) / static_cast<double>(n);
  std::size_t changed = 0;
  for (int y = 0; y < benign.height(); ++y)
    for (int x = 0; x < benign.width(); ++x) {
      bool diff = false;
      for (int c = 0; c < benign.channels() && !diff; ++c)
        diff = std::lround(std::clamp(benign.at(c, y, x), 0.0, 1.0) * 255.0) !=
               std::lround(std::clamp(adversarial.at(c, y, x), 0.0, 1.0) * 255.0);
      changed += diff;
    }
  r.l0_fraction = static_cast<double>(changed) / static_cast<double>(n);
  r.ssim = global_ssim(benign, adversarial);
  return r;
}

}  // namespace advlens
