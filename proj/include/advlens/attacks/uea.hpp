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

#include <cmath>
#include <span>
#include <vector>

#include "advlens/attacks/common.hpp"

namespace advlens {

/// sum_m || A_m o (f_m - R_m) ||_2 with single-channel attention maps
/// broadcast over feature channels.
inline double attention_feature_loss(std::span<const Tensor> features, std::span<const Tensor> random_maps,
                                     std::span<const Tensor> attention) {
  if (features.size() != random_maps.size() || features.size() != attention.size())
    throw ShapeMismatchError("uea: feature, random-map and attention counts differ");
  double total = 0.0;
  for (std::size_t m = 0; m < features.size(); ++m) {
    const Tensor& f = features[m];
    require_same_shape(f, random_maps[m], "uea random map");
    const Tensor& a = attention[m];
    if (a.c != 1 || a.h != f.h || a.w != f.w) throw ShapeMismatchError("uea: attention map does not match feature grid");
    double s = 0.0;
    for (int c = 0; c < f.c; ++c)
      for (int y = 0; y < f.h; ++y)
        for (int x = 0; x < f.w; ++x) {
          const double d = a.at(0, y, x) * (f.at(c, y, x) - random_maps[m].at(c, y, x));
          s += d * d;
        }
    total += std::sqrt(s);
  }
  return total;
}

/// Proposal boxes rasterized onto each feature grid: 1 inside any proposal, 0 elsewhere.
inline std::vector<Tensor> uea_attention_maps(const DetectorModel& model, const Image& x, double nms_iou = 0.7) {
  const ProposalSet ps = model.proposals(x, nms_iou);
  const auto feats = model.backbone_features(x);
  const auto strides = model.feature_strides();
  std::vector<Tensor> maps;
  for (std::size_t m = 0; m < feats.size(); ++m) {
    Tensor a(1, feats[m].h, feats[m].w);
    const double s = strides[m];
    for (const auto& p : ps.proposals) {
      for (int y = 0; y < a.h; ++y)
        for (int xx = 0; xx < a.w; ++xx) {
          const double cy = (y + 0.5) * s, cx = (xx + 0.5) * s;
          if (cx >= p.box.x1() && cx <= p.box.x2() && cy >= p.box.y1() && cy <= p.box.y2()) a.at(0, y, xx) = 1.0;
        }
    }
    maps.push_back(std::move(a));
  }
  return maps;
}

inline double uea_feature_loss(const DetectorModel& model, const Image& x, std::span<const Tensor> random_maps,
                               std::span<const Tensor> attention) {
  const auto feats = model.backbone_features(x);
  return attention_feature_loss(feats, random_maps, attention);
}

}  // namespace advlens
