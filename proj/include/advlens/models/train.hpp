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
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "advlens/core/parallel.hpp"
#include "advlens/models/dataset.hpp"
#include "advlens/models/detector.hpp"

namespace advlens {

struct TrainConfig {
  int epochs = 30;
  double learning_rate = 1.0;
  double momentum = 0.9;
  int batch_size = 16;
  std::uint64_t seed = 11;
  bool cosine_schedule = true;
  double clip_norm = 0.5;  // 0 disables
  double weight_decay = 1e-4;
  int jobs = 1;
};

struct TrainResult {
  double initial_loss = 0.0;
  std::vector<double> epoch_loss;  // mean total loss seen during each epoch
};

/// Mean total loss over the whole dataset.
inline double dataset_loss(const DetectorModel& model, const ShapesDataset& ds, int jobs = 1) {
  std::vector<double> per(ds.size());
  parallel_for(ds.size(), jobs, [&](std::size_t i) {
    per[i] = model.loss_components(ds.images[i], ds.annotations[i]).total;
  });
  return std::accumulate(per.begin(), per.end(), 0.0) / static_cast<double>(per.size());
}

/// Minibatch momentum gradient descent on obj + bbox + cls. Per-image
/// gradients are reduced in index order, so results do not depend on `jobs`.
inline TrainResult train(DetectorModel& model, const ShapesDataset& ds, const TrainConfig& cfg) {
  if (ds.size() == 0) throw ValidationError("train: empty dataset");
  if (cfg.epochs < 0 || cfg.batch_size < 1 || !(cfg.learning_rate > 0.0))
    throw ValidationError("train: invalid configuration");
  TrainResult res;
  res.initial_loss = dataset_loss(model, ds, cfg.jobs);
  if (cfg.epochs == 0) return res;

  const std::size_t np = model.parameters().size();
  std::vector<double> velocity(np, 0.0), grad(np);
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(cfg.seed);
  const std::size_t bs = static_cast<std::size_t>(cfg.batch_size);
  std::vector<std::vector<double>> slots(bs, std::vector<double>(np));
  std::vector<double> slot_loss(bs);
  const std::size_t steps_per_epoch = (ds.size() + bs - 1) / bs;
  const double total_steps = static_cast<double>(steps_per_epoch) * cfg.epochs;
  std::size_t step = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_sum = 0.0;
    for (std::size_t start = 0; start < ds.size(); start += bs, ++step) {
      const std::size_t n = std::min(bs, ds.size() - start);
      const DetectorModel& frozen = model;
      parallel_for(n, cfg.jobs, [&](std::size_t k) {
        std::fill(slots[k].begin(), slots[k].end(), 0.0);
        const std::size_t idx = order[start + k];
        slot_loss[k] = frozen.accumulate_parameter_gradient(ds.images[idx], ds.annotations[idx], slots[k]).total;
      });
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t k = 0; k < n; ++k) {
        if (!std::isfinite(slot_loss[k])) throw TrainingFailure("non-finite training loss", epoch);
        epoch_sum += slot_loss[k];
        for (std::size_t p = 0; p < np; ++p) grad[p] += slots[k][p];
      }
      double norm2 = 0.0;
      for (double& g : grad) {
        g /= static_cast<double>(n);
        norm2 += g * g;
      }
      if (!std::isfinite(norm2)) throw TrainingFailure("non-finite gradient", epoch);
      const double scale = (cfg.clip_norm > 0.0 && std::sqrt(norm2) > cfg.clip_norm)
                               ? cfg.clip_norm / std::sqrt(norm2)
                               : 1.0;
      const double lr = cfg.cosine_schedule
                            ? cfg.learning_rate * 0.5 * (1.0 + std::cos(M_PI * static_cast<double>(step) / total_steps))
                            : cfg.learning_rate;
      auto params = model.parameters();
      for (std::size_t p = 0; p < np; ++p) {
        velocity[p] = cfg.momentum * velocity[p] + scale * grad[p] + cfg.weight_decay * params[p];
        params[p] -= lr * velocity[p];
      }
    }
    res.epoch_loss.push_back(epoch_sum / static_cast<double>(ds.size()));
  }
  return res;
}

}  // namespace advlens
