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

#include <string>
#include <vector>

#include "advlens/core/error.hpp"
#include "advlens/nn/layers.hpp"

namespace advlens {

using BlockSpecs = std::vector<std::vector<nn::ConvSpec>>;

/// Convolutional stems, total stride 8. "b3" has three blocks, "b4" adds a
/// stride-1 block at 1/4 resolution. The first two blocks (strides 2 and 4)
/// are the feature stages exposed by backbone_features().
inline BlockSpecs backbone_blocks(const std::string& id) {
  if (id == "b3") {
    return {{{3, 12, 2}},
            {{12, 24, 2}, {24, 24, 1}},
            {{24, 32, 2}, {32, 32, 1}}};
  }
  if (id == "b4") {
    return {{{3, 12, 2}},
            {{12, 24, 2}, {24, 24, 1}},
            {{24, 24, 1}},
            {{24, 32, 2}, {32, 32, 1}}};
  }
  throw ValidationError("unknown backbone '" + id + "' (expected b3 or b4)");
}

/// The stride-4 prefix of a backbone, used as the shared trunk of the
/// two-phase detector.
inline BlockSpecs trunk_blocks(const std::string& id) {
  BlockSpecs all = backbone_blocks(id);
  all.pop_back();
  return all;
}

}  // namespace advlens
