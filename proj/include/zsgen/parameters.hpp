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
#include <span>
#include <string>
#include <vector>

#include "zsgen/checkpoint.hpp"
#include "zsgen/rng.hpp"

namespace zsgen {

/// Flat float32 parameter storage with named row-major blocks. Keeping
/// everything in one buffer lets gradient code and finite-difference checks
/// address any coordinate uniformly.
class ParameterSet {
 public:
  struct Block {
    std::string name;
    std::vector<std::uint32_t> dims;
    std::size_t offset = 0;
    std::size_t size = 0;
  };

  std::size_t add(std::string name, std::vector<std::uint32_t> dims);

  std::span<float> block(std::size_t index) { return {values_.data() + blocks_[index].offset, blocks_[index].size}; }
  std::span<const float> block(std::size_t index) const {
    return {values_.data() + blocks_[index].offset, blocks_[index].size};
  }
  const Block& info(std::size_t index) const { return blocks_[index]; }
  const std::vector<Block>& blocks() const noexcept { return blocks_; }

  std::span<float> values() noexcept { return values_; }
  std::span<const float> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

  /// Uniform in [-scale, scale] for every block.
  void init_uniform(CounterRng& rng, float scale);

  void export_to(Checkpoint& ckpt) const;
  /// Loads every block by name; dims must match.
  void import_from(const Checkpoint& ckpt);

  bool operator==(const ParameterSet& other) const { return values_ == other.values_; }

 private:
  std::vector<Block> blocks_;
  std::vector<float> values_;
};

/// Plain gradient-descent step: p -= lr * g.
void sgd_step(ParameterSet& params, std::span<const double> grad, double lr);

}  // namespace zsgen
