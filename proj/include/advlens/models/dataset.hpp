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
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "advlens/core/detection.hpp"
#include "advlens/core/image.hpp"

namespace advlens {

inline const std::array<std::string, 8>& shape_class_names() {
  static const std::array<std::string, 8> names = {"circle", "square",  "triangle",          "diamond",
                                                   "plus",   "ring",    "inverted_triangle", "frame"};
  return names;
}

struct ShapesDataset {
  std::vector<Image> images;
  std::vector<std::vector<GroundTruthObject>> annotations;
  std::uint64_t seed = 0;
  std::vector<std::string> class_names;

  std::size_t size() const { return images.size(); }
  int num_classes() const { return static_cast<int>(class_names.size()); }
  std::size_t object_count() const {
    std::size_t n = 0;
    for (const auto& a : annotations) n += a.size();
    return n;
  }
};

namespace detail {

/// Membership test for shape `cls` of side `s`, offsets from the center.
inline bool inside_shape(int cls, double dx, double dy, double s) {
  const double h = 0.5 * s;
  const double ax = std::abs(dx), ay = std::abs(dy);
  switch (cls) {
    case 0: return dx * dx + dy * dy <= h * h;
    case 1: return ax <= h && ay <= h;
    case 2: return dy >= -h && dy <= h && ax <= 0.5 * (dy + h);
    case 3: return ax + ay <= h;
    case 4: return (ax <= s / 6.0 && ay <= h) || (ay <= s / 6.0 && ax <= h);
    case 5: {
      const double r2 = dx * dx + dy * dy;
      return r2 <= h * h && r2 >= 0.25 * h * h;
    }
    case 6: return dy >= -h && dy <= h && ax <= 0.5 * (h - dy);
    case 7: return ax <= h && ay <= h && (ax >= h - s / 5.0 || ay >= h - s / 5.0);
    default: return false;
  }
}

}  // namespace detail

/// Deterministic synthetic detection set: 1-4 non-overlapping filled shapes
/// on a noisy flat background, pixels stored at 8-bit precision. Objects never
/// share a stride-8 grid cell.
inline ShapesDataset generate_shapes_dataset(std::uint64_t seed, int count, Resolution res, int num_classes) {
  if (count < 1) throw ValidationError("dataset count must be >= 1");
  if (num_classes < 2 || num_classes > 8) throw ValidationError("num_classes must be in [2,8]");
  if (res.height < 32 || res.width < 32) throw ValidationError("resolution must be at least 32x32");

  ShapesDataset ds;
  ds.seed = seed;
  ds.class_names.assign(shape_class_names().begin(), shape_class_names().begin() + num_classes);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const int side = std::min(res.height, res.width);
  constexpr int kCell = 8;

  for (int n = 0; n < count; ++n) {
    Image img(res.height, res.width);
    std::array<double, 3> bg{};
    for (double& b : bg) b = 0.15 + 0.7 * u01(rng);
    for (int ch = 0; ch < 3; ++ch)
      for (int y = 0; y < res.height; ++y)
        for (int x = 0; x < res.width; ++x) img.at(ch, y, x) = bg[ch] + 0.12 * (u01(rng) - 0.5);

    const int wanted = 1 + static_cast<int>(rng() % 4);
    std::vector<GroundTruthObject> objs;
    std::vector<int> used_cells;
    for (int k = 0; k < wanted || objs.empty(); ++k) {
      for (int attempt = 0; attempt < 60; ++attempt) {
        const int cls = static_cast<int>(rng() % static_cast<std::uint64_t>(num_classes));
        const double s = side * (0.16 + 0.2 * u01(rng));
        const double cx = 0.5 * s + 1.0 + u01(rng) * (res.width - s - 2.0);
        const double cy = 0.5 * s + 1.0 + u01(rng) * (res.height - s - 2.0);
        int xmin = res.width, ymin = res.height, xmax = -1, ymax = -1;
        for (int y = std::max(0, static_cast<int>(cy - s)); y < std::min(res.height, static_cast<int>(cy + s) + 1); ++y)
          for (int x = std::max(0, static_cast<int>(cx - s)); x < std::min(res.width, static_cast<int>(cx + s) + 1); ++x)
            if (detail::inside_shape(cls, x + 0.5 - cx, y + 0.5 - cy, s)) {
              xmin = std::min(xmin, x);
              xmax = std::max(xmax, x);
              ymin = std::min(ymin, y);
              ymax = std::max(ymax, y);
            }
        if (xmax < xmin || xmax - xmin < 3 || ymax - ymin < 3) continue;
        const BoundingBox box = BoundingBox::from_corners(xmin, ymin, xmax + 1.0, ymax + 1.0);
        const int cell = static_cast<int>(box.cy / kCell) * 1000 + static_cast<int>(box.cx / kCell);
        bool clash = std::find(used_cells.begin(), used_cells.end(), cell) != used_cells.end();
        for (const auto& o : objs) {
          // one pixel of clearance between objects
          if (box.x1() - 1 < o.box.x2() && o.box.x1() - 1 < box.x2() && box.y1() - 1 < o.box.y2() &&
              o.box.y1() - 1 < box.y2())
            clash = true;
        }
        if (clash) continue;

        std::array<double, 3> color{};
        double contrast = 0.0;
        for (int tries = 0; tries < 20 && contrast < 0.35; ++tries) {
          contrast = 0.0;
          for (int ch = 0; ch < 3; ++ch) {
            color[ch] = u01(rng);
            contrast = std::max(contrast, std::abs(color[ch] - bg[ch]));
          }
        }
        for (int y = ymin; y <= ymax; ++y)
          for (int x = xmin; x <= xmax; ++x)
            if (detail::inside_shape(cls, x + 0.5 - cx, y + 0.5 - cy, s))
              for (int ch = 0; ch < 3; ++ch) img.at(ch, y, x) = color[ch] + 0.06 * (u01(rng) - 0.5);
        objs.push_back({box, cls});
        used_cells.push_back(cell);
        break;
      }
    }
    for (double& v : img.pixels.v) v = quantize8(v);
    ds.images.push_back(std::move(img));
    ds.annotations.push_back(std::move(objs));
  }
  return ds;
}

}  // namespace advlens
