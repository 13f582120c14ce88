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
#include <sstream>

#include "advlens/core/error.hpp"

namespace advlens {

/// Axis-aligned box in center form, pixel units.
struct BoundingBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;

  double x1() const { return cx - 0.5 * w; }
  double y1() const { return cy - 0.5 * h; }
  double x2() const { return cx + 0.5 * w; }
  double y2() const { return cy + 0.5 * h; }
  double area() const { return w * h; }
  bool valid() const { return w > 0.0 && h > 0.0 && std::isfinite(cx) && std::isfinite(cy); }

  static BoundingBox from_corners(double x1, double y1, double x2, double y2) {
    return {0.5 * (x1 + x2), 0.5 * (y1 + y2), x2 - x1, y2 - y1};
  }

  bool operator==(const BoundingBox&) const = default;
};

inline void require_valid(const BoundingBox& b) {
  if (!(b.w > 0.0) || !(b.h > 0.0)) {
    std::ostringstream os;
    os << "invalid box (w=" << b.w << ", h=" << b.h << ")";
    throw InvalidBoxError(os.str());
  }
}

/// True when the box lies inside [0,width]x[0,height] up to `tol`.
inline bool within_bounds(const BoundingBox& b, int width, int height, double tol = 1e-9) {
  return b.x1() >= -tol && b.y1() >= -tol && b.x2() <= width + tol && b.y2() <= height + tol;
}

/// Clip to the image rectangle. Boxes squeezed below `min_side` are grown
/// back around their clipped center so the result stays non-degenerate.
inline BoundingBox clip_to_image(const BoundingBox& b, int width, int height, double min_side = 1e-3) {
  double x1 = std::clamp(b.x1(), 0.0, static_cast<double>(width));
  double y1 = std::clamp(b.y1(), 0.0, static_cast<double>(height));
  double x2 = std::clamp(b.x2(), 0.0, static_cast<double>(width));
  double y2 = std::clamp(b.y2(), 0.0, static_cast<double>(height));
  if (x2 - x1 < min_side) {
    const double c = std::clamp(0.5 * (x1 + x2), 0.5 * min_side, width - 0.5 * min_side);
    x1 = c - 0.5 * min_side;
    x2 = c + 0.5 * min_side;
  }
  if (y2 - y1 < min_side) {
    const double c = std::clamp(0.5 * (y1 + y2), 0.5 * min_side, height - 0.5 * min_side);
    y1 = c - 0.5 * min_side;
    y2 = c + 0.5 * min_side;
  }
  return BoundingBox::from_corners(x1, y1, x2, y2);
}

/// Intersection over union. Throws InvalidBoxError on a degenerate box.
inline double iou(const BoundingBox& a, const BoundingBox& b) {
  require_valid(a);
  require_valid(b);
  const double iw = std::min(a.x2(), b.x2()) - std::max(a.x1(), b.x1());
  const double ih = std::min(a.y2(), b.y2()) - std::max(a.y1(), b.y1());
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace advlens
