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

#include <cstdint>
#include <memory>

#include "advlens/models/one_phase.hpp"
#include "advlens/models/two_phase.hpp"

namespace advlens {

inline void validate(const ModelSpec& spec) {
  backbone_blocks(spec.backbone);
  if (spec.resolution < 32 || spec.base_resolution < 32) throw ValidationError("model resolution must be >= 32");
  if (spec.num_classes < 2 || spec.num_classes > 8) throw ValidationError("num_classes must be in [2,8]");
}

/// Builds a detector with parameters drawn from `init_seed`.
inline std::unique_ptr<DetectorModel> make_detector(const ModelSpec& spec, std::uint64_t init_seed) {
  validate(spec);
  if (spec.family == Family::OnePhase) {
    auto m = std::make_unique<OnePhaseDetector>(spec);
    m->init_parameters(init_seed);
    return m;
  }
  auto m = std::make_unique<TwoPhaseDetector>(spec);
  m->init_parameters(init_seed);
  return m;
}

}  // namespace advlens
