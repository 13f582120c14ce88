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

#include "advlens/attacks/tog.hpp"
#include "advlens/attacks/two_phase_attacks.hpp"

namespace advlens {

inline const std::vector<std::string>& attack_names() {
  static const std::vector<std::string> names = {"tog-untargeted",     "tog-vanishing", "tog-fabrication",
                                                 "tog-mislabeling-ml", "tog-mislabeling-ll", "dag",
                                                 "rap"};
  return names;
}

inline void check_attack_name(const std::string& name) {
  for (const auto& n : attack_names())
    if (n == name) return;
  std::string all;
  for (const auto& n : attack_names()) all += (all.empty() ? "" : ", ") + n;
  throw ValidationError("unknown attack '" + name + "'; valid attacks: " + all);
}

/// Defaults for `name` before any user overrides.
inline AttackConfig default_config_for(const std::string& name) {
  check_attack_name(name);
  if (name == "dag") return dag_defaults();
  if (name == "rap") return rap_defaults();
  AttackConfig c = tog_defaults();
  if (name == "tog-mislabeling-ll") c.target_mode = TargetMode::LeastLikely;
  return c;
}

inline AttackResult run_attack(const std::string& name, const DetectorModel& model, const Image& x,
                               const AttackConfig& cfg) {
  check_attack_name(name);
  if (name == "dag") return dag_attack(model, x, cfg);
  if (name == "rap") return rap_attack(model, x, cfg);
  if (name == "tog-untargeted") return tog_untargeted(model, x, cfg);
  if (name == "tog-vanishing") return tog_vanishing(model, x, cfg);
  if (name == "tog-fabrication") return tog_fabrication(model, x, cfg);
  AttackConfig c = cfg;
  if (c.target_map) c.target_mode = TargetMode::ClassMap;
  else c.target_mode = name == "tog-mislabeling-ll" ? TargetMode::LeastLikely : TargetMode::MostLikely;
  AttackResult r = tog_mislabeling(model, x, c);
  r.attack = name;
  return r;
}

}  // namespace advlens
