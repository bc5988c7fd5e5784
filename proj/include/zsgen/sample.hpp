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
#include <optional>

#include "zsgen/vocab.hpp"

namespace zsgen {

enum class TaskType { kSingle, kPair, kTemperatureContrast };

/// Unit of synthesized (or gold) supervision.
struct GeneratedSample {
  std::uint64_t id = 0;
  std::size_t label = 0;
  std::optional<TokenSequence> x_s;
  TokenSequence x_g;
  std::optional<double> score;

  bool operator==(const GeneratedSample&) const = default;
};

/// Classifier-ready example; pair inputs are already joined by SEP.
struct LabeledExample {
  TokenSequence tokens;
  std::size_t label = 0;
};

LabeledExample to_example(const GeneratedSample& s, TokenId sep);

}  // namespace zsgen
