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
#include <vector>

#include "advlens/core/detection.hpp"
#include "advlens/core/image.hpp"

namespace advlens {

inline constexpr double kPadValue = 0.5;

/// Aspect-preserving fit of a (src) frame into a (dst) frame.
struct Letterbox {
  int content_h = 0, content_w = 0;
  int off_y = 0, off_x = 0;
  double scale_y = 1.0, scale_x = 1.0;
};

inline Letterbox letterbox(Resolution src, Resolution dst) {
  if (src.height <= 0 || src.width <= 0 || dst.height <= 0 || dst.width <= 0)
    throw ValidationError("resize: resolutions must be positive");
  Letterbox lb;
  if (static_cast<long long>(src.height) * dst.width == static_cast<long long>(src.width) * dst.height) {
    lb.content_h = dst.height;
    lb.content_w = dst.width;
  } else {
    const double s = std::min(static_cast<double>(dst.height) / src.height, static_cast<double>(dst.width) / src.width);
    lb.content_h = std::clamp(static_cast<int>(std::lround(src.height * s)), 1, dst.height);
    lb.content_w = std::clamp(static_cast<int>(std::lround(src.width * s)), 1, dst.width);
  }
  lb.off_y = (dst.height - lb.content_h) / 2;
  lb.off_x = (dst.width - lb.content_w) / 2;
  lb.scale_y = static_cast<double>(lb.content_h) / src.height;
  lb.scale_x = static_cast<double>(lb.content_w) / src.width;
  return lb;
}

/// Nearest-neighbor resample, src index = floor(i * src / dst); padding
/// (value 0.5) keeps the aspect ratio when the two frames differ.
inline Image resize_adversarial(const Image& x, Resolution target) {
  if (x.resolution() == target) return x;
  const Letterbox lb = letterbox(x.resolution(), target);
  Image out(target.height, target.width, kPadValue);
  out.provenance = x.provenance;
  for (int c = 0; c < x.channels(); ++c)
    for (int i = 0; i < lb.content_h; ++i) {
      const int sy = static_cast<int>(static_cast<long long>(i) * x.height() / lb.content_h);
      for (int j = 0; j < lb.content_w; ++j) {
        const int sx = static_cast<int>(static_cast<long long>(j) * x.width() / lb.content_w);
        out.at(c, i + lb.off_y, j + lb.off_x) = x.at(c, sy, sx);
      }
    }
  return out;
}

inline std::vector<GroundTruthObject> resize_annotations(std::span<const GroundTruthObject> objs, Resolution src,
                                                         Resolution dst) {
  const Letterbox lb = letterbox(src, dst);
  std::vector<GroundTruthObject> out;
  for (const auto& o : objs) {
    BoundingBox b{o.box.cx * lb.scale_x + lb.off_x, o.box.cy * lb.scale_y + lb.off_y, o.box.w * lb.scale_x,
                  o.box.h * lb.scale_y};
    out.push_back({b, o.class_id});
  }
  return out;
}

}  // namespace advlens
