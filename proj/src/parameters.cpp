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

#include "zsgen/parameters.hpp"

#include "zsgen/error.hpp"

namespace zsgen {

std::size_t ParameterSet::add(std::string name, std::vector<std::uint32_t> dims) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  blocks_.push_back(Block{std::move(name), std::move(dims), values_.size(), n});
  values_.resize(values_.size() + n, 0.0f);
  return blocks_.size() - 1;
}

void ParameterSet::init_uniform(CounterRng& rng, float scale) {
  for (float& v : values_) v = static_cast<float>((2.0 * rng.uniform() - 1.0) * scale);
}

void ParameterSet::export_to(Checkpoint& ckpt) const {
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    auto b = block(i);
    ckpt.add(blocks_[i].name, blocks_[i].dims, std::vector<float>(b.begin(), b.end()));
  }
}

void ParameterSet::import_from(const Checkpoint& ckpt) {
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto& a = ckpt.get(blocks_[i].name);
    if (a.dims != blocks_[i].dims) throw ConfigError("checkpoint array '" + a.name + "' has unexpected shape");
    std::copy(a.data.begin(), a.data.end(), block(i).begin());
  }
}

void sgd_step(ParameterSet& params, std::span<const double> grad, double lr) {
  auto v = params.values();
  for (std::size_t i = 0; i < v.size(); ++i)
    if (grad[i] != 0.0) v[i] = static_cast<float>(v[i] - lr * grad[i]);
}

}  // namespace zsgen
