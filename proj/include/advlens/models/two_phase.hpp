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
#include <memory>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "advlens/models/backbones.hpp"
#include "advlens/models/detector.hpp"
#include "advlens/models/grid.hpp"
#include "advlens/nn/layers.hpp"

namespace advlens {

/// Feature-map window a proposal is pooled from, split into 2x2 bins.
struct RoiRegion {
  int y0 = 0, y1 = 0, x0 = 0, x1 = 0;  // half-open
  int ymid = 0, xmid = 0;
};

inline RoiRegion roi_region(const BoundingBox& box, int stride, int feat_h, int feat_w) {
  auto span_of = [&](double lo, double hi, int size, int& a, int& b) {
    a = std::clamp(static_cast<int>(std::floor(lo / stride)), 0, size);
    b = std::clamp(static_cast<int>(std::ceil(hi / stride)), 0, size);
    // at least two cells so every bin is non-empty
    while (b - a < 2) {
      if (b < size) ++b;
      else if (a > 0) --a;
      else break;
    }
  };
  RoiRegion r;
  span_of(box.y1(), box.y2(), feat_h, r.y0, r.y1);
  span_of(box.x1(), box.x2(), feat_w, r.x0, r.x1);
  r.ymid = (r.y0 + r.y1) / 2;
  r.xmid = (r.x0 + r.x1) / 2;
  return r;
}

/// Proposal-based detector: shared trunk (stride 4) -> RPN (stride 8 grid,
/// objectness + box deltas per cell) -> top-N proposals pooled from the
/// trunk features -> two-layer classification head.
class TwoPhaseDetector final : public DetectorModel {
 public:
  static constexpr int kTopN = 16;
  static constexpr double kInferenceNmsIou = 0.7;
  static constexpr int kHidden = 48;

  explicit TwoPhaseDetector(ModelSpec spec, LossWeights weights = {})
      : DetectorModel(std::move(spec)), weights_(weights) {
    spec_.family = Family::TwoPhase;
    nn::ParamLayout layout;
    trunk_ = nn::ConvStack(trunk_blocks(spec_.backbone), layout);
    const int c = trunk_.out_channels();
    rpn_ = nn::ConvStack({{{c, 32, 2}, {32, 32, 1}}}, layout);
    rpn_head_ = nn::Conv2d({32, 5, 1, 1}, layout);
    fc1_ = nn::Linear(4 * (c + 32), kHidden, layout);
    fc2_ = nn::Linear(kHidden, spec_.num_classes, layout);
    params_.assign(layout.size(), 0.0);
  }

  void init_parameters(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    trunk_.init(params_, rng);
    rpn_.init(params_, rng);
    rpn_head_.init(params_, rng);
    fc1_.init(params_, rng);
    fc2_.init(params_, rng);
    rpn_head_.bias(params_, kObj) = -3.0;
  }

  bool supports_proposals() const override { return true; }

  int trunk_stride() const { return trunk_.total_stride(); }

  GridGeometry geometry() const {
    const int side = spec_.resolution;
    const int stride = trunk_.total_stride() * 2;
    GridGeometry g;
    g.stride = stride;
    g.rows = g.cols = (side + stride - 1) / stride;
    g.anchor = spec_.base_resolution / 4.0;
    g.image_h = g.image_w = side;
    return g;
  }

  ProposalSet proposals(const Image& x, double nms_iou, int max_proposals = 0) const override {
    if (!(nms_iou > 0.0 && nms_iou <= 1.0)) throw ValidationError("proposals: nms_iou must be in (0,1]");
    if (max_proposals < 0) throw ValidationError("proposals: max_proposals must be >= 0");
    const Forward f = forward(x, false);
    return select_proposals(f, nms_iou, max_proposals > 0 ? max_proposals : kTopN);
  }

  std::vector<DetectionCandidate> candidates(const Image& x) const override {
    const ProposalSet ps = proposals(x, kInferenceNmsIou);
    std::vector<DetectionCandidate> out;
    out.reserve(ps.proposals.size());
    for (const auto& p : ps.proposals) out.push_back({p.box, p.objectness, p.class_probs});
    return out;
  }

  LossBundle loss_components(const Image& x, std::span<const GroundTruthObject> targets) const override {
    return run(x, targets, 0u, {}, nullptr);
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
    trunk_.forward(params_, x.pixels, nullptr, &blocks);
    blocks.resize(2);
    return blocks;
  }

  Tensor proposal_class_gradient(const Image& x, const ProposalSet& ps,
                                 std::span<const std::vector<double>> coeffs) const override {
    if (coeffs.size() != ps.proposals.size()) throw ValidationError("proposal_class_gradient: coefficient count");
    const Forward f = forward(x, true);
    Tensor dfeat(f.feat.c, f.feat.h, f.feat.w);
    Tensor drpn(f.rpn_feat.c, f.rpn_feat.h, f.rpn_feat.w);
    for (std::size_t j = 0; j < ps.proposals.size(); ++j) {
      const HeadEval he = eval_head(f.feat, f.rpn_feat, ps.proposals[j].box);
      const auto& cj = coeffs[j];
      double mean = 0.0;
      for (int k = 0; k < spec_.num_classes; ++k) mean += he.probs[k] * cj[k];
      std::vector<double> dlogits(static_cast<std::size_t>(spec_.num_classes));
      bool any = false;
      for (int k = 0; k < spec_.num_classes; ++k) {
        dlogits[k] = he.probs[k] * (cj[k] - mean);
        any = any || dlogits[k] != 0.0;
      }
      if (any) backprop_head(he, dlogits, dfeat, drpn, {});
    }
    dfeat += rpn_.backward(params_, f.rpn_cache, std::move(drpn), {});
    return trunk_.backward(params_, f.trunk_cache, std::move(dfeat), {});
  }

  Tensor rpn_output_gradient(const Image& x, std::span<const RpnCellGrad> grads) const override {
    const Forward f = forward(x, true);
    const GridGeometry g = geometry();
    Tensor dout(f.out.c, f.out.h, f.out.w);
    for (const auto& cg : grads) {
      const int r = cg.cell / g.cols, c = cg.cell % g.cols;
      for (int k = 0; k < 5; ++k) dout.at(k, r, c) += cg.d[k];
    }
    Tensor dfeat = rpn_backward(f, dout, {});
    return trunk_.backward(params_, f.trunk_cache, std::move(dfeat), {});
  }

  std::unique_ptr<DetectorModel> clone() const override { return std::make_unique<TwoPhaseDetector>(*this); }

 private:
  struct Forward {
    nn::ConvStack::Cache trunk_cache;
    nn::ConvStack::Cache rpn_cache;
    nn::Conv2d::Cache head_cache;
    Tensor feat;
    Tensor rpn_feat;
    Tensor out;
  };

  struct HeadEval {
    RoiRegion region, rpn_region;
    std::vector<double> pooled, a1, hidden, probs;
  };

  Forward forward(const Image& x, bool keep_cache) const {
    check_input(x);
    Forward f;
    f.feat = trunk_.forward(params_, x.pixels, keep_cache ? &f.trunk_cache : nullptr);
    f.rpn_feat = rpn_.forward(params_, f.feat, keep_cache ? &f.rpn_cache : nullptr);
    f.out = rpn_head_.forward(params_, f.rpn_feat, keep_cache ? &f.head_cache : nullptr);
    return f;
  }

  Tensor rpn_backward(const Forward& f, const Tensor& dout, std::span<double> dparams) const {
    Tensor d = rpn_head_.backward(params_, f.head_cache, dout, dparams);
    return rpn_.backward(params_, f.rpn_cache, std::move(d), dparams);
  }

  static void pool_into(const Tensor& feat, const RoiRegion& r, double* out) {
    const int ys[3] = {r.y0, r.ymid, r.y1}, xs[3] = {r.x0, r.xmid, r.x1};
    for (int ch = 0; ch < feat.c; ++ch) {
      for (int by = 0; by < 2; ++by) {
        for (int bx = 0; bx < 2; ++bx) {
          double acc = 0.0;
          for (int y = ys[by]; y < ys[by + 1]; ++y)
            for (int x = xs[bx]; x < xs[bx + 1]; ++x) acc += feat.at(ch, y, x);
          const int area = (ys[by + 1] - ys[by]) * (xs[bx + 1] - xs[bx]);
          out[ch * 4 + by * 2 + bx] = area > 0 ? acc / area : 0.0;
        }
      }
    }
  }

  static void unpool_from(const double* g_pooled, const RoiRegion& r, Tensor& dfeat) {
    const int ys[3] = {r.y0, r.ymid, r.y1}, xs[3] = {r.x0, r.xmid, r.x1};
    for (int ch = 0; ch < dfeat.c; ++ch) {
      for (int by = 0; by < 2; ++by) {
        for (int bx = 0; bx < 2; ++bx) {
          const int area = (ys[by + 1] - ys[by]) * (xs[bx + 1] - xs[bx]);
          if (area <= 0) continue;
          const double g = g_pooled[ch * 4 + by * 2 + bx] / area;
          for (int y = ys[by]; y < ys[by + 1]; ++y)
            for (int x = xs[bx]; x < xs[bx + 1]; ++x) dfeat.at(ch, y, x) += g;
        }
      }
    }
  }

  /// Pools the proposal window from the trunk (stride 4) and RPN (stride 8)
  /// feature maps, 2x2 bins each, and runs the classification head.
  HeadEval eval_head(const Tensor& feat, const Tensor& rpn_feat, const BoundingBox& box) const {
    HeadEval he;
    he.region = roi_region(box, trunk_.total_stride(), feat.h, feat.w);
    he.rpn_region = roi_region(box, 2 * trunk_.total_stride(), rpn_feat.h, rpn_feat.w);
    he.pooled.assign(static_cast<std::size_t>(4 * (feat.c + rpn_feat.c)), 0.0);
    pool_into(feat, he.region, he.pooled.data());
    pool_into(rpn_feat, he.rpn_region, he.pooled.data() + 4 * feat.c);
    he.a1 = fc1_.forward(params_, he.pooled);
    he.hidden.resize(he.a1.size());
    for (std::size_t i = 0; i < he.a1.size(); ++i) he.hidden[i] = nn::silu(he.a1[i]);
    const auto logits = fc2_.forward(params_, he.hidden);
    he.probs.resize(logits.size());
    nn::softmax(logits, he.probs);
    return he;
  }

  void backprop_head(const HeadEval& he, std::span<const double> dlogits, Tensor& dfeat, Tensor& drpn_feat,
                     std::span<double> dparams) const {
    auto dh = fc2_.backward(params_, he.hidden, dlogits, dparams);
    for (std::size_t i = 0; i < dh.size(); ++i) dh[i] *= nn::silu_grad(he.a1[i]);
    const auto dp = fc1_.backward(params_, he.pooled, dh, dparams);
    unpool_from(dp.data(), he.region, dfeat);
    unpool_from(dp.data() + 4 * dfeat.c, he.rpn_region, drpn_feat);
  }

  ProposalSet select_proposals(const Forward& f, double nms_iou, int top_n) const {
    const GridGeometry g = geometry();
    ProposalSet ps;
    ps.nms_iou = nms_iou;
    ps.stride = g.stride;
    ps.image_h = g.image_h;
    ps.image_w = g.image_w;
    ps.grid_rows = g.rows;
    ps.grid_cols = g.cols;
    std::vector<int> order(static_cast<std::size_t>(g.cells()));
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> obj(order.size());
    for (int cell = 0; cell < g.cells(); ++cell) obj[cell] = f.out.at(kObj, cell / g.cols, cell % g.cols);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return obj[a] > obj[b]; });
    for (int cell : order) {
      if (static_cast<int>(ps.proposals.size()) >= top_n) break;
      const int r = cell / g.cols, c = cell % g.cols;
      const BoundingBox box = decode_cell(f.out, g, r, c);
      bool suppressed = false;
      for (const auto& p : ps.proposals) {
        if (iou(p.box, box) >= nms_iou) {
          suppressed = true;
          break;
        }
      }
      if (suppressed) continue;
      Proposal p;
      p.cell = cell;
      p.box = box;
      p.objectness = nn::sigmoid(obj[cell]);
      p.foreground = p.objectness >= 0.5;
      for (int k = 0; k < 5; ++k) p.raw[k] = f.out.at(k, r, c);
      p.class_probs = eval_head(f.feat, f.rpn_feat, box).probs;
      ps.proposals.push_back(std::move(p));
    }
    return ps;
  }

  LossBundle run(const Image& x, std::span<const GroundTruthObject> targets, unsigned which,
                 std::span<double> dparams, Tensor* dx) const {
    const bool backward = dx != nullptr || !dparams.empty();
    const GridGeometry g = geometry();
    const auto assigned = assign_targets(targets, g, spec_.num_classes);
    const Forward f = forward(x, backward);
    Tensor dout;
    LossBundle lb = grid_loss(f.out, g, assigned, 0, weights_, which, backward ? &dout : nullptr);
    Tensor dfeat_head(f.feat.c, f.feat.h, f.feat.w);
    Tensor drpn_head(f.rpn_feat.c, f.rpn_feat.h, f.rpn_feat.w);
    const double wc = weights_.cls / g.cells();
    for (const auto& a : assigned) {
      const HeadEval he = eval_head(f.feat, f.rpn_feat, decode_cell(f.out, g, a.row, a.col));
      lb.cls += -wc * std::log(std::max(he.probs[a.class_id], 1e-300));
      if (backward && (which & kLossCls)) {
        std::vector<double> dl(he.probs.size());
        for (std::size_t k = 0; k < dl.size(); ++k)
          dl[k] = wc * (he.probs[k] - (static_cast<int>(k) == a.class_id ? 1.0 : 0.0));
        backprop_head(he, dl, dfeat_head, drpn_head, dparams);
      }
    }
    lb.finalize();
    if (!backward) return lb;
    Tensor d = rpn_head_.backward(params_, f.head_cache, dout, dparams);
    d += drpn_head;
    Tensor dfeat = rpn_.backward(params_, f.rpn_cache, std::move(d), dparams);
    dfeat += dfeat_head;
    d = trunk_.backward(params_, f.trunk_cache, std::move(dfeat), dparams, dx != nullptr);
    if (dx) *dx = std::move(d);
    return lb;
  }

  LossWeights weights_;
  nn::ConvStack trunk_;
  nn::ConvStack rpn_;
  nn::Conv2d rpn_head_;
  nn::Linear fc1_;
  nn::Linear fc2_;
};

}  // namespace advlens
