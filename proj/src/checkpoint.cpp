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

#include "zsgen/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

#include "zsgen/error.hpp"

namespace zsgen {
namespace {

constexpr char kMagic[4] = {'S', 'G', 'L', 'M'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

void put_bytes(std::string& out, std::string_view s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw ConfigError("checkpoint truncated");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::size_t NamedArray::element_count() const {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

const NamedArray* Checkpoint::find(std::string_view name) const {
  for (const auto& a : arrays)
    if (a.name == name) return &a;
  return nullptr;
}

const NamedArray& Checkpoint::get(std::string_view name) const {
  if (const auto* a = find(name)) return *a;
  throw ConfigError("checkpoint lacks array '" + std::string(name) + "'");
}

float Checkpoint::scalar(std::string_view name) const {
  const auto& a = get(name);
  if (a.data.size() != 1) throw ConfigError("checkpoint array '" + std::string(name) + "' is not a scalar");
  return a.data[0];
}

void Checkpoint::add(std::string name, std::vector<std::uint32_t> dims, std::vector<float> data) {
  NamedArray a{std::move(name), std::move(dims), std::move(data)};
  if (a.element_count() != a.data.size()) throw ConfigError("array '" + a.name + "' dims do not match data");
  arrays.push_back(std::move(a));
}

void Checkpoint::add_scalar(std::string name, float value) { add(std::move(name), {1}, {value}); }

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  std::string out(kMagic, 4);
  put_u32(out, Checkpoint::kFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(ckpt.vocab.size()));
  for (const auto& t : ckpt.vocab) put_bytes(out, t);
  put_u32(out, static_cast<std::uint32_t>(ckpt.arrays.size()));
  for (const auto& a : ckpt.arrays) {
    put_bytes(out, a.name);
    put_u32(out, static_cast<std::uint32_t>(a.dims.size()));
    for (auto d : a.dims) put_u32(out, d);
    for (float f : a.data) put_u32(out, std::bit_cast<std::uint32_t>(f));
  }
  return out;
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw ConfigError("not an SGLM checkpoint");
  Reader r(bytes.substr(4));
  const std::uint32_t version = r.u32();
  if (version != Checkpoint::kFormatVersion)
    throw ConfigError("unsupported checkpoint version " + std::to_string(version));
  Checkpoint ckpt;
  const std::uint32_t n_vocab = r.u32();
  ckpt.vocab.reserve(n_vocab);
  for (std::uint32_t i = 0; i < n_vocab; ++i) ckpt.vocab.push_back(r.str());
  const std::uint32_t n_arrays = r.u32();
  for (std::uint32_t i = 0; i < n_arrays; ++i) {
    NamedArray a;
    a.name = r.str();
    const std::uint32_t rank = r.u32();
    for (std::uint32_t d = 0; d < rank; ++d) a.dims.push_back(r.u32());
    const std::size_t n = a.element_count();
    a.data.resize(n);
    for (std::size_t k = 0; k < n; ++k) a.data[k] = r.f32();
    ckpt.arrays.push_back(std::move(a));
  }
  if (!r.done()) throw ConfigError("trailing bytes after checkpoint");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  const std::string bytes = serialize_checkpoint(ckpt);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifactError(path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_checkpoint(ss.str());
}

}  // namespace zsgen
