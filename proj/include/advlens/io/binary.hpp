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

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "advlens/core/error.hpp"
#include "advlens/core/image.hpp"

namespace advlens::io {

namespace fs = std::filesystem;

template <class T>
void put_le(std::string& out, T v) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  U u = std::bit_cast<U>(v);
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xffu));
}

template <class T>
T get_le(const std::string& in, std::size_t& pos) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  if (pos + sizeof(U) > in.size()) throw IoError("truncated binary file");
  U u = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) u |= static_cast<U>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  pos += sizeof(U);
  return std::bit_cast<T>(u);
}

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Writes via a sibling temp file and rename.
inline void write_file_atomic(const fs::path& p, const std::string& data) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, p);
}

inline constexpr char kTensorMagic[8] = {'A', 'D', 'V', 'L', 'F', '6', '4', '\0'};

/// Full-precision tensor file: magic, c, h, w (u32), then little-endian f64 values.
inline void save_tensor(const fs::path& p, const Tensor& t) {
  std::string buf(kTensorMagic, 8);
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(t.c));
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(t.h));
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(t.w));
  buf.reserve(buf.size() + t.v.size() * 8);
  for (double v : t.v) put_le<double>(buf, v);
  write_file_atomic(p, buf);
}

inline Tensor load_tensor(const fs::path& p) {
  const std::string buf = read_file(p);
  if (buf.size() < 20 || std::memcmp(buf.data(), kTensorMagic, 8) != 0)
    throw IoError(p.string() + " is not a tensor file");
  std::size_t pos = 8;
  const int c = static_cast<int>(get_le<std::uint32_t>(buf, pos));
  const int h = static_cast<int>(get_le<std::uint32_t>(buf, pos));
  const int w = static_cast<int>(get_le<std::uint32_t>(buf, pos));
  Tensor t(c, h, w);
  if (buf.size() != pos + t.v.size() * 8) throw IoError(p.string() + ": size does not match header");
  for (double& v : t.v) v = get_le<double>(buf, pos);
  return t;
}

}  // namespace advlens::io
