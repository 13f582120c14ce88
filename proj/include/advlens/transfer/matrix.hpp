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
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "advlens/attacks/registry.hpp"
#include "advlens/metrics/evaluate.hpp"
#include "advlens/models/dataset.hpp"
#include "advlens/transfer/resize.hpp"

namespace advlens {

struct TransferCell {
  std::string source_model_id;
  std::string target_model_id;
  int source_resolution = 0;
  int target_resolution = 0;
  std::string attack_name;
  double adversarial_map = 0.0;  // percent
  double benign_map = 0.0;       // percent
  std::string error;             // nonempty when the cell could not be produced
};

struct NamedModel {
  std::string id;
  const DetectorModel* model = nullptr;
};

/// Adversarial examples of `attack` against `model` for every image, in index order.
inline std::vector<Image> generate_adversarial(const std::string& attack, const DetectorModel& model,
                                               const std::vector<Image>& images, const AttackConfig& cfg, int jobs) {
  std::vector<Image> adv(images.size());
  parallel_for(images.size(), jobs, [&](std::size_t i) { adv[i] = run_attack(attack, model, images[i], cfg).adversarial; });
  return adv;
}

/// Sources attack the dataset once; every target evaluates every source's examples.
inline std::vector<TransferCell> cross_model_matrix(const std::string& attack, const std::vector<NamedModel>& sources,
                                                    const std::vector<NamedModel>& targets, const ShapesDataset& ds,
                                                    const AttackConfig& cfg, const EvalSettings& es, int jobs = 1) {
  check_attack_name(attack);
  if (sources.empty() || targets.empty()) throw ValidationError("transfer: empty model list");
  const int K = ds.num_classes();
  std::map<std::string, double> benign;
  for (const auto& t : targets)
    benign[t.id] = 100.0 * evaluate_detections(detect_all(*t.model, ds.images, es, jobs), ds.annotations, K, es).map;

  std::vector<TransferCell> cells;
  for (const auto& s : sources) {
    std::vector<Image> adv;
    std::string err;
    try {
      adv = generate_adversarial(attack, *s.model, ds.images, cfg, jobs);
    } catch (const ApplicabilityError& e) {
      err = e.what();
    }
    for (const auto& t : targets) {
      TransferCell c{s.id, t.id, s.model->resolution().height, t.model->resolution().height, attack, 0.0,
                     benign[t.id], err};
      if (err.empty())
        c.adversarial_map = 100.0 * evaluate_detections(detect_all(*t.model, adv, es, jobs), ds.annotations, K, es).map;
      cells.push_back(std::move(c));
    }
  }
  return cells;
}

/// Attack at `source_resolution` (the dataset letterboxed there), then resize
/// the adversarial examples to each target resolution and evaluate a
/// same-parameter instance there. Ground truth follows the same mapping.
inline std::vector<TransferCell> cross_resolution_matrix(const std::string& attack, const DetectorModel& model,
                                                         const std::string& model_id, const ShapesDataset& ds,
                                                         int source_resolution,
                                                         const std::vector<int>& target_resolutions,
                                                         const AttackConfig& cfg, const EvalSettings& es, int jobs = 1) {
  check_attack_name(attack);
  if (target_resolutions.empty()) throw ValidationError("transfer: empty resolution list");
  if (ds.size() == 0) throw ValidationError("transfer: empty dataset");
  const Resolution native = ds.images.front().resolution();
  const Resolution src{source_resolution, source_resolution};
  const auto source = model.at_resolution(source_resolution);
  const int K = ds.num_classes();
  std::vector<Image> ben_s(ds.size());
  GroundTruthSet gt_s(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    ben_s[i] = resize_adversarial(ds.images[i], src);
    gt_s[i] = resize_annotations(ds.annotations[i], native, src);
  }
  const auto adv = generate_adversarial(attack, *source, ben_s, cfg, jobs);

  std::vector<TransferCell> cells;
  for (int r : target_resolutions) {
    const Resolution dst{r, r};
    const auto target = model.at_resolution(r);
    std::vector<Image> ben_r(ds.size()), adv_r(ds.size());
    GroundTruthSet gt_r(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
      ben_r[i] = resize_adversarial(ds.images[i], dst);
      adv_r[i] = resize_adversarial(adv[i], dst);
      gt_r[i] = resize_annotations(ds.annotations[i], native, dst);
    }
    TransferCell c{model_id, model_id, source_resolution, r, attack, 0.0, 0.0, {}};
    c.benign_map = 100.0 * evaluate_detections(detect_all(*target, ben_r, es, jobs), gt_r, K, es).map;
    c.adversarial_map = 100.0 * evaluate_detections(detect_all(*target, adv_r, es, jobs), gt_r, K, es).map;
    cells.push_back(std::move(c));
  }
  return cells;
}

/// Square matrix: one row per source resolution, one column per target.
inline std::vector<TransferCell> cross_resolution_matrix(const std::string& attack, const DetectorModel& model,
                                                         const std::string& model_id, const ShapesDataset& ds,
                                                         const std::vector<int>& resolutions, const AttackConfig& cfg,
                                                         const EvalSettings& es, int jobs = 1) {
  std::vector<TransferCell> cells;
  for (int s : resolutions) {
    auto row = cross_resolution_matrix(attack, model, model_id, ds, s, resolutions, cfg, es, jobs);
    cells.insert(cells.end(), row.begin(), row.end());
  }
  return cells;
}

/// Mean adversarial mAP over cells resized upward and over cells resized downward.
struct ResizeDirectionMeans {
  double upsizing = 0.0;
  double downsizing = 0.0;
  int n_up = 0;
  int n_down = 0;
};

inline ResizeDirectionMeans resize_direction_means(const std::vector<TransferCell>& cells) {
  ResizeDirectionMeans m;
  for (const auto& c : cells) {
    if (!c.error.empty()) continue;
    if (c.target_resolution > c.source_resolution) {
      m.upsizing += c.adversarial_map;
      ++m.n_up;
    } else if (c.target_resolution < c.source_resolution) {
      m.downsizing += c.adversarial_map;
      ++m.n_down;
    }
  }
  if (m.n_up) m.upsizing /= m.n_up;
  if (m.n_down) m.downsizing /= m.n_down;
  return m;
}

/// Rows are sources, columns targets; by_resolution selects the resolution axes.
inline std::string matrix_csv(const std::vector<TransferCell>& cells, bool by_resolution) {
  std::vector<std::string> rows, cols;
  auto add = [](std::vector<std::string>& v, const std::string& s) {
    if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
  };
  auto row_key = [&](const TransferCell& c) {
    return by_resolution ? c.source_model_id + "@" + std::to_string(c.source_resolution) : c.source_model_id;
  };
  auto col_key = [&](const TransferCell& c) {
    return by_resolution ? std::to_string(c.target_resolution) : c.target_model_id;
  };
  for (const auto& c : cells) {
    add(rows, row_key(c));
    add(cols, col_key(c));
  }
  std::ostringstream os;
  os.precision(6);
  os << "source";
  for (const auto& c : cols) os << ',' << c;
  os << '\n';
  for (const auto& r : rows) {
    os << r;
    for (const auto& col : cols) {
      os << ',';
      for (const auto& c : cells)
        if (row_key(c) == r && col_key(c) == col) {
          if (c.error.empty()) os << c.adversarial_map;
          else os << "n/a";
        }
    }
    os << '\n';
  }
  return os.str();
}

inline nlohmann::json matrix_json(const std::vector<TransferCell>& cells) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : cells) {
    nlohmann::json e = {{"source_model_id", c.source_model_id},   {"target_model_id", c.target_model_id},
                        {"source_resolution", c.source_resolution}, {"target_resolution", c.target_resolution},
                        {"attack", c.attack_name},                  {"benign_map", c.benign_map}};
    if (c.error.empty()) e["adversarial_map"] = c.adversarial_map;
    else {
      e["adversarial_map"] = nullptr;
      e["error"] = c.error;
    }
    j.push_back(std::move(e));
  }
  return j;
}

}  // namespace advlens
