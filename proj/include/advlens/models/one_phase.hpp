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

#include <memory>
#include <random>
#include <span>
#include <vector>

#include "advlens/models/backbones.hpp"
#include "advlens/models/detector.hpp"
#include "advlens/models/grid.hpp"
#include "advlens/nn/layers.hpp"

namespace advlens {

/// Grid detector: stem -> 1x1 head emitting (tx,ty,tw,th,objectness,K class
/// logits) per cell, one candidate per cell.
class OnePhaseDetector final : public DetectorModel {
 public:
  explicit OnePhaseDetector(ModelSpec spec, LossWeights weights = {})
      : DetectorModel(std::move(spec)), weights_(weights) {
    spec_.family = Family::OnePhase;
    nn::ParamLayout layout;
    stem_ = nn::ConvStack(backbone_blocks(spec_.backbone), layout);
    head_ = nn::Conv2d({stem_.out_channels(), kClass0 + spec_.num_classes, 1, 1}, layout);
    params_.assign(layout.size(), 0.0);
  }

  void init_parameters(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    stem_.init(params_, rng);
    head_.init(params_, rng);
    // objectness prior ~0.05 so early training is not swamped by background
    head_.bias(params_, kObj) = -3.0;
  }

  bool supports_proposals() const override { return false; }

  GridGeometry geometry() const {
    const int side = spec_.resolution;
    GridGeometry g;
    const int stride = stem_.total_stride();
    g.stride = stride;
    g.rows = g.cols = (side + stride - 1) / stride;
    g.anchor = spec_.base_resolution / 4.0;
    g.image_h = g.image_w = side;
    return g;
  }

  /// Raw head output for an input image (channels x rows x cols).
  Tensor raw_output(const Image& x) const {
    check_input(x);
    return head_.forward(params_, stem_.forward(params_, x.pixels, nullptr), nullptr);
  }

  std::vector<DetectionCandidate> candidates(const Image& x) const override {
    return decode(raw_output(x));
  }

  std::vector<DetectionCandidate> decode(const Tensor& out) const {
    const GridGeometry g = geometry();
    std::vector<DetectionCandidate> cands;
    cands.reserve(static_cast<std::size_t>(g.cells()));
    std::vector<double> logits(static_cast<std::size_t>(spec_.num_classes));
    for (int r = 0; r < g.rows; ++r) {
      for (int c = 0; c < g.cols; ++c) {
        DetectionCandidate d;
        d.box = decode_cell(out, g, r, c);
        d.objectness = nn::sigmoid(out.at(kObj, r, c));
        for (int k = 0; k < spec_.num_classes; ++k) logits[k] = out.at(kClass0 + k, r, c);
        d.class_probs.resize(logits.size());
        nn::softmax(logits, d.class_probs);
        cands.push_back(std::move(d));
      }
    }
    return cands;
  }

  LossBundle loss_components(const Image& x, std::span<const GroundTruthObject> targets) const override {
    const GridGeometry g = geometry();
    const auto assigned = assign_targets(targets, g, spec_.num_classes);
    return grid_loss(raw_output(x), g, assigned, spec_.num_classes, weights_, 0u, nullptr);
  }

  LossGradient loss_gradient(const Image& x, std::span<const GroundTruthObject> targets,
                             unsigned which) const override {
    if ((which & kLossAll) == 0u) throw ValidationError("loss_gradient: empty loss selection");
    LossGradient res;
    res.loss = run(x, targets, which, {}, &res.grad);
    return res;
  }

  LossBundle accumulate_parameter_gradient(const Image& x, std::span<const GroundTruthObject> targets,
                                           std::span<double> grad) const override {
    return run(x, targets, kLossAll, grad, nullptr);
  }

  std::vector<Tensor> backbone_features(const Image& x) const override {
    check_input(x);
    std::vector<Tensor> blocks;
    stem_.forward(params_, x.pixels, nullptr, &blocks);
    blocks.resize(2);
    return blocks;
  }

  std::unique_ptr<DetectorModel> clone() const override { return std::make_unique<OnePhaseDetector>(*this); }

 private:
  LossBundle run(const Image& x, std::span<const GroundTruthObject> targets, unsigned which,
                 std::span<double> dparams, Tensor* dx) const {
    check_input(x);
    const GridGeometry g = geometry();
    const auto assigned = assign_targets(targets, g, spec_.num_classes);
    nn::ConvStack::Cache sc;
    nn::Conv2d::Cache hc;
    const Tensor feat = stem_.forward(params_, x.pixels, &sc);
    const Tensor out = head_.forward(params_, feat, &hc);
    Tensor dout;
    const LossBundle lb = grid_loss(out, g, assigned, spec_.num_classes, weights_, which, &dout);
    Tensor dfeat = head_.backward(params_, hc, dout, dparams);
    Tensor d = stem_.backward(params_, sc, std::move(dfeat), dparams, dx != nullptr);
    if (dx) *dx = std::move(d);
    return lb;
  }

  LossWeights weights_;
  nn::ConvStack stem_;
  nn::Conv2d head_;
};

}  // namespace advlens
