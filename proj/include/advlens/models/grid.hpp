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
#include <span>
#include <vector>

#include "advlens/core/detection.hpp"
#include "advlens/models/detector.hpp"
#include "advlens/nn/layers.hpp"

namespace advlens {

/// Channel layout of a grid output tensor.
inline constexpr int kTx = 0, kTy = 1, kTw = 2, kTh = 3, kObj = 4, kClass0 = 5;

struct GridGeometry {
  int rows = 0;
  int cols = 0;
  double stride = 8.0;
  double anchor = 16.0;  // square anchor side, pixels
  int image_h = 0;
  int image_w = 0;

  int cells() const { return rows * cols; }
};

struct LossWeights {
  double obj = 1.0;
  double bbox = 1.0;
  double cls = 1.0;
  double background_obj = 0.5;  // objectness weight on cells without an object
};

/// Decoded box of one cell: center = (cell + sigmoid(t)) * stride, size = anchor * exp(t).
inline BoundingBox decode_cell(const Tensor& out, const GridGeometry& g, int r, int c) {
  const double cx = (c + nn::sigmoid(out.at(kTx, r, c))) * g.stride;
  const double cy = (r + nn::sigmoid(out.at(kTy, r, c))) * g.stride;
  const double w = g.anchor * std::exp(std::clamp(out.at(kTw, r, c), -6.0, 6.0));
  const double h = g.anchor * std::exp(std::clamp(out.at(kTh, r, c), -6.0, 6.0));
  return clip_to_image({cx, cy, w, h}, g.image_w, g.image_h);
}

/// A ground-truth object bound to the grid cell containing its center.
struct CellAssignment {
  int cell = 0;
  int row = 0;
  int col = 0;
  int class_id = 0;
  double gx = 0.0, gy = 0.0;  // center offset inside the cell, [0,1)
  double gw = 0.0, gh = 0.0;  // log(size / anchor)
};

/// Center-cell assignment; when two objects share a cell the first one wins.
inline std::vector<CellAssignment> assign_targets(std::span<const GroundTruthObject> targets, const GridGeometry& g,
                                                  int num_classes) {
  std::vector<CellAssignment> out;
  std::vector<bool> taken(static_cast<std::size_t>(g.cells()), false);
  for (const auto& t : targets) {
    require_valid(t.box);
    if (!within_bounds(t.box, g.image_w, g.image_h, 1e-6))
      throw ValidationError("target box outside image");
    if (t.class_id < 0 || t.class_id >= num_classes) throw ValidationError("target class out of range");
    const int col = std::clamp(static_cast<int>(std::floor(t.box.cx / g.stride)), 0, g.cols - 1);
    const int row = std::clamp(static_cast<int>(std::floor(t.box.cy / g.stride)), 0, g.rows - 1);
    const int cell = row * g.cols + col;
    if (taken[cell]) continue;
    taken[cell] = true;
    CellAssignment a;
    a.cell = cell;
    a.row = row;
    a.col = col;
    a.class_id = t.class_id;
    a.gx = std::clamp(t.box.cx / g.stride - col, 0.0, 1.0);
    a.gy = std::clamp(t.box.cy / g.stride - row, 0.0, 1.0);
    a.gw = std::log(t.box.w / g.anchor);
    a.gh = std::log(t.box.h / g.anchor);
    out.push_back(a);
  }
  return out;
}

/// Objectness BCE (all cells), box squared error and class cross-entropy
/// (assigned cells), each a mean over grid cells. `class_channels` is 0 for
/// outputs without class logits. When `dout` is non-null it receives the
/// gradient of the terms selected by `which` w.r.t. the raw outputs.
inline LossBundle grid_loss(const Tensor& out, const GridGeometry& g, std::span<const CellAssignment> assigned,
                            int class_channels, const LossWeights& lw, unsigned which, Tensor* dout) {
  const double inv_s = 1.0 / g.cells();
  LossBundle lb;
  if (dout) *dout = Tensor(out.c, out.h, out.w);
  std::vector<int> owner(static_cast<std::size_t>(g.cells()), -1);
  for (std::size_t i = 0; i < assigned.size(); ++i) owner[assigned[i].cell] = static_cast<int>(i);

  for (int r = 0; r < g.rows; ++r) {
    for (int c = 0; c < g.cols; ++c) {
      const int cell = r * g.cols + c;
      const double logit = out.at(kObj, r, c);
      const double y = owner[cell] >= 0 ? 1.0 : 0.0;
      const double wgt = (owner[cell] >= 0 ? 1.0 : lw.background_obj) * lw.obj * inv_s;
      // BCE with logits: -y log s - (1-y) log(1-s)
      lb.obj += wgt * (-(y * nn::log_sigmoid(logit)) - (1.0 - y) * nn::log_sigmoid(-logit));
      if (dout && (which & kLossObj)) dout->at(kObj, r, c) += wgt * (nn::sigmoid(logit) - y);
    }
  }

  for (const auto& a : assigned) {
    const double sx = nn::sigmoid(out.at(kTx, a.row, a.col));
    const double sy = nn::sigmoid(out.at(kTy, a.row, a.col));
    const double tw = out.at(kTw, a.row, a.col);
    const double th = out.at(kTh, a.row, a.col);
    const double wb = lw.bbox * inv_s;
    lb.bbox += wb * ((sx - a.gx) * (sx - a.gx) + (sy - a.gy) * (sy - a.gy) + (tw - a.gw) * (tw - a.gw) +
                     (th - a.gh) * (th - a.gh));
    if (dout && (which & kLossBBox)) {
      dout->at(kTx, a.row, a.col) += wb * 2.0 * (sx - a.gx) * sx * (1.0 - sx);
      dout->at(kTy, a.row, a.col) += wb * 2.0 * (sy - a.gy) * sy * (1.0 - sy);
      dout->at(kTw, a.row, a.col) += wb * 2.0 * (tw - a.gw);
      dout->at(kTh, a.row, a.col) += wb * 2.0 * (th - a.gh);
    }
    if (class_channels > 0) {
      std::vector<double> logits(static_cast<std::size_t>(class_channels)), p(logits.size());
      for (int k = 0; k < class_channels; ++k) logits[k] = out.at(kClass0 + k, a.row, a.col);
      nn::softmax(logits, p);
      const double wc = lw.cls * inv_s;
      const double m = *std::max_element(logits.begin(), logits.end());
      double z = 0.0;
      for (double l : logits) z += std::exp(l - m);
      lb.cls += wc * (m + std::log(z) - logits[a.class_id]);
      if (dout && (which & kLossCls)) {
        for (int k = 0; k < class_channels; ++k)
          dout->at(kClass0 + k, a.row, a.col) += wc * (p[k] - (k == a.class_id ? 1.0 : 0.0));
      }
    }
  }
  lb.finalize();
  return lb;
}

}  // namespace advlens
