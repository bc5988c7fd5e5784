// Copyright (c) 2026 The zsgen Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace zsgen {

struct NamedArray {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> data;

  std::size_t element_count() const;
  bool operator==(const NamedArray&) const = default;
};

// Binary layout (all integers little-endian):
//   "SGLM" | u32 version | u32 n_vocab | n_vocab x (u32 len, bytes)
//   | u32 n_arrays | n_arrays x (u32 name_len, name, u32 rank, rank x u32 dim, f32 data...)
struct Checkpoint {
  static constexpr std::uint32_t kFormatVersion = 1;

  std::vector<std::string> vocab;
  std::vector<NamedArray> arrays;

  const NamedArray& get(std::string_view name) const;
  const NamedArray* find(std::string_view name) const;
  /// Scalar metadata stored as a one-element array.
  float scalar(std::string_view name) const;
  void add(std::string name, std::vector<std::uint32_t> dims, std::vector<float> data);
  void add_scalar(std::string name, float value);

  bool operator==(const Checkpoint&) const = default;
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace zsgen
