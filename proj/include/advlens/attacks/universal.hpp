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

#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "advlens/attacks/tog.hpp"
#include "advlens/core/parallel.hpp"
#include "advlens/models/dataset.hpp"

namespace advlens {

struct UniversalPerturbation {
  Tensor delta;
  double eps = 0.0;
  std::string source_model_id;
  int training_epochs = 0;
  TogVariant mode = TogVariant::Vanishing;
};

inline Image apply_universal(const Image& x, const UniversalPerturbation& up) {
  require_same_shape(x.pixels, up.delta, "apply_universal");
  Image out = x;
  for (std::size_t i = 0; i < out.pixels.v.size(); ++i)
    out.pixels.v[i] = std::clamp(out.pixels.v[i] + up.delta.v[i], 0.0, 1.0);
  out.provenance = Provenance::Adversarial;
  return out;
}

/// Offline signed-gradient training of one input-agnostic perturbation on the
/// objectness loss against the empty target set, averaged over minibatches.
inline UniversalPerturbation tog_universal_train(const DetectorModel& model, const ShapesDataset& ds,
                                                 const AttackConfig& cfg, int epochs, TogVariant mode) {
  cfg.validate(model.num_classes());
  if (mode != TogVariant::Vanishing && mode != TogVariant::Fabrication)
    throw ApplicabilityError(std::string("universal perturbations support vanishing and fabrication only, not ") +
                             to_string(mode));
  if (epochs < 0) throw ValidationError("universal training epochs must be >= 0");
  if (ds.size() == 0) throw ValidationError("universal training needs a nonempty dataset");
  const Resolution r = model.resolution();
  UniversalPerturbation up{Tensor(3, r.height, r.width), cfg.eps, model.architecture_tag(), epochs, mode};
  const double dir = mode == TogVariant::Vanishing ? -1.0 : 1.0;

  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(cfg.rng_seed);
  const std::size_t bs = static_cast<std::size_t>(cfg.universal_batch);
  std::vector<Tensor> slots(bs);
  for (int e = 0; e < epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < ds.size(); start += bs) {
      const std::size_t n = std::min(bs, ds.size() - start);
      parallel_for(n, cfg.jobs, [&](std::size_t k) {
        const Image xa = apply_universal(ds.images[order[start + k]], up);
        slots[k] = model.loss_gradient(xa, {}, kLossObj).grad;
      });
      Tensor g(3, r.height, r.width);
      for (std::size_t k = 0; k < n; ++k) g += slots[k];
      for (std::size_t i = 0; i < g.v.size(); ++i)
        up.delta.v[i] = std::clamp(up.delta.v[i] + dir * cfg.alpha * sign0(g.v[i]), -cfg.eps, cfg.eps);
    }
  }
  return up;
}

}  // namespace advlens
