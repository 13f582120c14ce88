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
#include <random>
#include <vector>

#include "advlens/attacks/common.hpp"
#include "advlens/models/grid.hpp"
#include "advlens/nn/layers.hpp"

namespace advlens {

namespace detail {

inline void require_proposals(const DetectorModel& model, const char* attack) {
  if (!model.supports_proposals())
    throw ApplicabilityError(std::string(attack) + " is only applicable to two-phase detectors, not " +
                             model.architecture_tag());
}

inline int argmax(const std::vector<double>& p) {
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

}  // namespace detail

/// DAG: per-proposal relabeling with the attack-mode NMS threshold. The
/// correct class of a proposal is the class of the best-overlapping benign
/// detection; the adversarial class is drawn once per RPN cell.
inline AttackResult dag_attack(const DetectorModel& model, const Image& x, const AttackConfig& cfg = dag_defaults()) {
  detail::require_proposals(model, "DAG");
  cfg.validate(model.num_classes());
  Stopwatch sw;
  AttackResult res = start_result("dag", x);
  res.anchor_detections = model.detect(x, cfg.anchor_confidence, cfg.anchor_nms_iou);
  res.empty_anchor = res.anchor_detections.empty();
  const int K = model.num_classes();

  std::mt19937_64 rng(cfg.rng_seed);
  std::uniform_int_distribution<int> offset(1, K - 1);
  std::vector<int> shift;

  Image& xa = res.adversarial;
  for (int t = 0; t <= cfg.iterations; ++t) {
    const ProposalSet ps = model.proposals(xa, cfg.iou_nms_attack, cfg.attack_max_proposals);
    if (shift.empty()) {
      shift.resize(static_cast<std::size_t>(ps.grid_rows * ps.grid_cols));
      for (int& s : shift) s = offset(rng);
    }
    std::vector<std::vector<double>> coeffs(ps.proposals.size(), std::vector<double>(static_cast<std::size_t>(K), 0.0));
    double objective = 0.0;
    bool correct_left = false;
    for (std::size_t j = 0; j < ps.proposals.size(); ++j) {
      const Proposal& p = ps.proposals[j];
      if (!p.foreground) continue;
      int c = -1;
      double best = 0.5;
      for (const auto& d : res.anchor_detections) {
        const double v = iou(p.box, d.box);
        if (v >= best) {
          best = v;
          c = d.class_id;
        }
      }
      // only proposals still predicted as their correct class stay in the target set
      if (c < 0 || detail::argmax(p.class_probs) != c) continue;
      const int cp = (c + shift[static_cast<std::size_t>(p.cell)]) % K;
      coeffs[j][static_cast<std::size_t>(c)] += 1.0;
      coeffs[j][static_cast<std::size_t>(cp)] -= 1.0;
      objective += p.class_probs[static_cast<std::size_t>(c)] - p.class_probs[static_cast<std::size_t>(cp)];
      correct_left = true;
    }
    if (!correct_left || t == cfg.iterations) break;
    res.trace.push_back(objective);
    const Tensor r = model.proposal_class_gradient(xa, ps, coeffs);
    double rmax = 0.0;
    for (double v : r.v) rmax = std::max(rmax, std::abs(v));
    if (!(rmax > 0.0)) break;
    for (std::size_t i = 0; i < xa.pixels.v.size(); ++i) xa.pixels.v[i] -= cfg.alpha / rmax * r.v[i];
    xa = clip01(std::move(xa));
    xa.provenance = Provenance::Adversarial;
    ++res.iterations_used;
  }
  res.attack_time_s = sw.seconds();
  return res;
}

/// RAP: drives foreground proposals toward low objectness and degenerate
/// boxes with L2-normalized descent steps.
inline AttackResult rap_attack(const DetectorModel& model, const Image& x, const AttackConfig& cfg = rap_defaults()) {
  detail::require_proposals(model, "RAP");
  cfg.validate(model.num_classes());
  Stopwatch sw;
  AttackResult res = start_result("rap", x);
  res.anchor_detections = model.detect(x, cfg.anchor_confidence, cfg.anchor_nms_iou);
  res.empty_anchor = res.anchor_detections.empty();
  const auto& tau = cfg.rap_tau;

  Image& xa = res.adversarial;
  for (int t = 0; t < cfg.iterations; ++t) {
    const ProposalSet ps = model.proposals(xa, cfg.iou_nms_attack, cfg.attack_max_proposals);
    std::vector<RpnCellGrad> grads;
    double objective = 0.0;
    for (const Proposal& p : ps.proposals) {
      if (!p.foreground) continue;
      const double sx = nn::sigmoid(p.raw[kTx]), sy = nn::sigmoid(p.raw[kTy]);
      const int col = p.cell % ps.grid_cols, row = p.cell / ps.grid_cols;
      const double bx = (col + sx) * ps.stride / ps.image_w;
      const double by = (row + sy) * ps.stride / ps.image_h;
      const double b[4] = {bx, by, p.raw[kTw], p.raw[kTh]};
      double se = 0.0;
      for (int k = 0; k < 4; ++k) se += (b[k] - tau[static_cast<std::size_t>(k)]) * (b[k] - tau[static_cast<std::size_t>(k)]);
      objective += nn::log_sigmoid(p.raw[kObj]) + se;
      RpnCellGrad g;
      g.cell = p.cell;
      g.d[kTx] = 2.0 * (bx - tau[0]) * sx * (1.0 - sx) * ps.stride / ps.image_w;
      g.d[kTy] = 2.0 * (by - tau[1]) * sy * (1.0 - sy) * ps.stride / ps.image_h;
      g.d[kTw] = 2.0 * (b[2] - tau[2]);
      g.d[kTh] = 2.0 * (b[3] - tau[3]);
      g.d[kObj] = 1.0 - nn::sigmoid(p.raw[kObj]);
      grads.push_back(g);
    }
    if (grads.empty()) break;
    res.trace.push_back(objective);
    const Tensor r = model.rpn_output_gradient(xa, grads);
    double n2 = 0.0;
    for (double v : r.v) n2 += v * v;
    if (!(n2 > 0.0)) break;
    const double step = cfg.alpha / std::sqrt(n2);
    for (std::size_t i = 0; i < xa.pixels.v.size(); ++i) xa.pixels.v[i] -= step * r.v[i];
    xa = clip01(std::move(xa));
    xa.provenance = Provenance::Adversarial;
    ++res.iterations_used;
  }
  res.attack_time_s = sw.seconds();
  return res;
}

}  // namespace advlens
