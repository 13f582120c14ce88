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

#include <cstring>
#include <memory>
#include <string>

#include <json.hpp>

#include "advlens/io/binary.hpp"
#include "advlens/models/factory.hpp"

namespace advlens::io {

inline constexpr char kCheckpointMagic[8] = {'A', 'D', 'V', 'L', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// magic, u32 version, u64 header length, JSON header, little-endian f64 parameters.
inline void save_checkpoint(const fs::path& p, const DetectorModel& m, const nlohmann::json& extra = {}) {
  const auto& s = m.spec();
  nlohmann::json header = {{"architecture", m.architecture_tag()},
                           {"family", to_string(s.family)},
                           {"backbone", s.backbone},
                           {"resolution", s.resolution},
                           {"base_resolution", s.base_resolution},
                           {"num_classes", s.num_classes},
                           {"param_count", m.parameters().size()}};
  if (!extra.is_null()) header["extra"] = extra;
  const std::string hs = header.dump();
  std::string buf(kCheckpointMagic, 8);
  put_le<std::uint32_t>(buf, kCheckpointVersion);
  put_le<std::uint64_t>(buf, hs.size());
  buf += hs;
  for (double v : m.parameters()) put_le<double>(buf, v);
  write_file_atomic(p, buf);
}

struct Checkpoint {
  std::unique_ptr<DetectorModel> model;
  nlohmann::json header;
};

inline Checkpoint load_checkpoint(const fs::path& p) {
  const std::string buf = read_file(p);
  if (buf.size() < 20 || std::memcmp(buf.data(), kCheckpointMagic, 8) != 0)
    throw IoError(p.string() + " is not a checkpoint");
  std::size_t pos = 8;
  if (get_le<std::uint32_t>(buf, pos) != kCheckpointVersion) throw IoError(p.string() + ": unsupported version");
  const auto hlen = get_le<std::uint64_t>(buf, pos);
  if (pos + hlen > buf.size()) throw IoError(p.string() + ": truncated header");
  Checkpoint ck;
  ck.header = nlohmann::json::parse(buf.substr(pos, hlen));
  pos += hlen;
  ModelSpec spec;
  spec.family = family_from_string(ck.header.at("family"));
  spec.backbone = ck.header.at("backbone");
  spec.resolution = ck.header.at("resolution");
  spec.base_resolution = ck.header.at("base_resolution");
  spec.num_classes = ck.header.at("num_classes");
  ck.model = make_detector(spec, 0);
  auto params = ck.model->parameters();
  if (ck.header.at("param_count").get<std::size_t>() != params.size() || buf.size() != pos + params.size() * 8)
    throw IoError(p.string() + ": parameter count does not match architecture");
  for (double& v : params) v = get_le<double>(buf, pos);
  return ck;
}

}  // namespace advlens::io
