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
#include <vector>

#include "advlens/core/image.hpp"

namespace advlens::io {

using Rgb = std::array<double, 3>;

inline const std::array<Rgb, 6>& palette() {
  static const std::array<Rgb, 6> p = {Rgb{0.12, 0.47, 0.71}, Rgb{0.84, 0.15, 0.16}, Rgb{0.17, 0.63, 0.17},
                                       Rgb{1.0, 0.5, 0.05},   Rgb{0.58, 0.4, 0.74},  Rgb{0.55, 0.34, 0.29}};
  return p;
}

/// Minimal raster canvas for line and bar charts, y range [0, y_max].
class Canvas {
 public:
  Canvas(int width, int height, double y_max) : img_(height, width, 1.0), y_max_(y_max > 0 ? y_max : 1.0) {
    line(kMargin, height - kMargin, width - kMargin, height - kMargin, {0, 0, 0});
    line(kMargin, kMargin, kMargin, height - kMargin, {0, 0, 0});
  }

  void polyline(const std::vector<double>& xs01, const std::vector<double>& ys, const Rgb& c) {
    for (std::size_t i = 1; i < xs01.size() && i < ys.size(); ++i)
      thick_line(px(xs01[i - 1]), py(ys[i - 1]), px(xs01[i]), py(ys[i]), c);
  }

  void bar(double x0_01, double x1_01, double y, const Rgb& c) {
    for (int x = px(x0_01); x <= px(x1_01); ++x)
      for (int yy = py(y); yy <= py(0.0); ++yy) set(x, yy, c);
  }

  const Image& image() const { return img_; }

 private:
  static constexpr int kMargin = 12;

  int px(double x01) const { return kMargin + static_cast<int>(std::lround(x01 * (img_.width() - 2 * kMargin))); }
  int py(double y) const {
    const double f = std::clamp(y / y_max_, 0.0, 1.0);
    return img_.height() - kMargin - static_cast<int>(std::lround(f * (img_.height() - 2 * kMargin)));
  }
  void set(int x, int y, const Rgb& c) {
    if (x < 0 || y < 0 || x >= img_.width() || y >= img_.height()) return;
    for (int ch = 0; ch < 3; ++ch) img_.at(ch, y, x) = c[static_cast<std::size_t>(ch)];
  }
  void line(int x0, int y0, int x1, int y1, const Rgb& c) {
    const int n = std::max(std::abs(x1 - x0), std::abs(y1 - y0)) + 1;
    for (int i = 0; i <= n; ++i) {
      const double t = static_cast<double>(i) / n;
      set(static_cast<int>(std::lround(x0 + t * (x1 - x0))), static_cast<int>(std::lround(y0 + t * (y1 - y0))), c);
    }
  }
  void thick_line(int x0, int y0, int x1, int y1, const Rgb& c) {
    for (int d = -1; d <= 1; ++d) {
      line(x0, y0 + d, x1, y1 + d, c);
      line(x0 + d, y0, x1 + d, y1, c);
    }
  }

  Image img_;
  double y_max_;
};

}  // namespace advlens::io
