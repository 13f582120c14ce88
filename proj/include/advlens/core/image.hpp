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
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "advlens/core/error.hpp"

namespace advlens {

/// Dense channel-major (C,H,W) array of doubles.
struct Tensor {
  int c = 0;
  int h = 0;
  int w = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int channels, int height, int width, double fill = 0.0)
      : c(channels), h(height), w(width), v(static_cast<std::size_t>(channels) * height * width, fill) {}

  std::size_t size() const { return v.size(); }
  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
  std::size_t index(int ch, int y, int x) const {
    return (static_cast<std::size_t>(ch) * h + y) * w + x;
  }
  double& at(int ch, int y, int x) { return v[index(ch, y, x)]; }
  double at(int ch, int y, int x) const { return v[index(ch, y, x)]; }
  double* channel(int ch) { return v.data() + static_cast<std::size_t>(ch) * plane(); }
  const double* channel(int ch) const { return v.data() + static_cast<std::size_t>(ch) * plane(); }

  bool same_shape(const Tensor& o) const { return c == o.c && h == o.h && w == o.w; }
  bool operator==(const Tensor&) const = default;

  Tensor& operator+=(const Tensor& o) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.v[i];
    return *this;
  }
  Tensor& operator*=(double s) {
    for (double& x : v) x *= s;
    return *this;
  }
};

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b))
    throw ShapeMismatchError(std::string(what) + ": shape mismatch (" + std::to_string(a.c) + "x" +
                             std::to_string(a.h) + "x" + std::to_string(a.w) + " vs " + std::to_string(b.c) +
                             "x" + std::to_string(b.h) + "x" + std::to_string(b.w) + ")");
}

enum class Provenance { Benign, Adversarial };

struct Resolution {
  int height = 0;
  int width = 0;
  bool operator==(const Resolution&) const = default;
};

/// RGB image with values in [0,1].
struct Image {
  Tensor pixels;
  Provenance provenance = Provenance::Benign;

  Image() = default;
  explicit Image(Tensor t, Provenance p = Provenance::Benign) : pixels(std::move(t)), provenance(p) {}
  Image(int height, int width, double fill = 0.0) : pixels(3, height, width, fill) {}

  int height() const { return pixels.h; }
  int width() const { return pixels.w; }
  int channels() const { return pixels.c; }
  Resolution resolution() const { return {pixels.h, pixels.w}; }
  std::size_t pixel_count() const { return pixels.plane(); }
  double& at(int ch, int y, int x) { return pixels.at(ch, y, x); }
  double at(int ch, int y, int x) const { return pixels.at(ch, y, x); }
};

inline double quantize8(double v) { return std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0; }

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.v.size(); ++i) m = std::max(m, std::abs(a.v[i] - b.v[i]));
  return m;
}

}  // namespace advlens
