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

#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>

#include <json.hpp>

#include "advlens/io/binary.hpp"
#include "advlens/io/png.hpp"
#include "advlens/models/dataset.hpp"

namespace advlens::io {

inline std::string image_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "images/%04zu.png", i);
  return buf;
}

/// images/NNNN.png, annotations.jsonl and a small dataset.json with the generation metadata.
inline void write_dataset(const fs::path& dir, const ShapesDataset& ds) {
  fs::create_directories(dir / "images");
  std::string lines;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    write_png(dir / image_name(i), ds.images[i]);
    nlohmann::json objs = nlohmann::json::array();
    for (const auto& o : ds.annotations[i])
      objs.push_back({{"class_id", o.class_id}, {"cx", o.box.cx}, {"cy", o.box.cy}, {"w", o.box.w}, {"h", o.box.h}});
    lines += nlohmann::json{{"image", image_name(i)}, {"objects", objs}}.dump() + "\n";
  }
  write_file_atomic(dir / "annotations.jsonl", lines);
  const Resolution r = ds.size() ? ds.images.front().resolution() : Resolution{};
  const nlohmann::json meta = {{"seed", ds.seed},
                               {"count", ds.size()},
                               {"height", r.height},
                               {"width", r.width},
                               {"class_names", ds.class_names}};
  write_file_atomic(dir / "dataset.json", meta.dump(2) + "\n");
}

inline ShapesDataset read_dataset(const fs::path& dir) {
  if (!fs::exists(dir / "annotations.jsonl")) throw IoError("no dataset at " + dir.string());
  ShapesDataset ds;
  if (fs::exists(dir / "dataset.json")) {
    const auto meta = nlohmann::json::parse(read_file(dir / "dataset.json"));
    ds.seed = meta.value("seed", std::uint64_t{0});
    ds.class_names = meta.at("class_names").get<std::vector<std::string>>();
  }
  std::istringstream in(read_file(dir / "annotations.jsonl"));
  std::string line;
  int max_class = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    Image img = read_png(dir / j.at("image").get<std::string>());
    std::vector<GroundTruthObject> objs;
    for (const auto& o : j.at("objects")) {
      GroundTruthObject g{{o.at("cx"), o.at("cy"), o.at("w"), o.at("h")}, o.at("class_id")};
      if (!within_bounds(g.box, img.width(), img.height(), 1e-9))
        throw ValidationError("annotation box outside image in " + j.at("image").get<std::string>());
      max_class = std::max(max_class, g.class_id);
      objs.push_back(g);
    }
    ds.images.push_back(std::move(img));
    ds.annotations.push_back(std::move(objs));
  }
  if (ds.class_names.empty())
    for (int k = 0; k <= max_class; ++k) ds.class_names.push_back("class" + std::to_string(k));
  if (max_class >= ds.num_classes()) throw ValidationError("annotation class id exceeds class list");
  return ds;
}

}  // namespace advlens::io
