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

#include <span>
#include <string_view>
#include <vector>

#include "zsgen/lm.hpp"
#include "zsgen/prompts.hpp"
#include "zsgen/rng.hpp"
#include "zsgen/sample.hpp"

namespace zsgen {

enum class SelectionRule { kTopN, kBottomN, kRandomN };

SelectionRule parse_selection_rule(std::string_view name);
std::string_view to_string(SelectionRule rule);

struct SelectionPolicy {
  std::vector<SelectionRule> per_label;  // indexed by label
  std::size_t n = 0;                     // samples per class
  /// Rank all pools jointly; each label's rule then picks from the merged
  /// remainder and the picked samples take that label.
  bool merge_pools = false;
};

/// Mean log-probability of x_g conditioned on the rendered prompt (with x_s
/// for pair samples), at temperature 1 and without repetition adjustment.
double ranking_score(const LanguageModel& model, const Vocabulary& vocab, const GeneratedSample& sample,
                     const PromptTemplate& tmpl);

/// Fills `score` for every sample; parallel over samples.
void score_pools(const LanguageModel& model, const Vocabulary& vocab, std::vector<std::vector<GeneratedSample>>& pools,
                 std::span<const PromptTemplate> templates, int workers = 1);

/// Exactly N samples per label. Ties break by lower sample id.
std::vector<GeneratedSample> select(const std::vector<std::vector<GeneratedSample>>& pools,
                                    const SelectionPolicy& policy, CounterRng& rng);

}  // namespace zsgen
