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

#include "zsgen/selection.hpp"

#include <algorithm>
#include <numeric>

#include "zsgen/error.hpp"
#include "zsgen/parallel.hpp"

namespace zsgen {

SelectionRule parse_selection_rule(std::string_view name) {
  if (name == "top_n") return SelectionRule::kTopN;
  if (name == "bottom_n") return SelectionRule::kBottomN;
  if (name == "random_n") return SelectionRule::kRandomN;
  throw ConfigError("unknown selection rule '" + std::string(name) + "'");
}

std::string_view to_string(SelectionRule rule) {
  switch (rule) {
    case SelectionRule::kTopN:
      return "top_n";
    case SelectionRule::kBottomN:
      return "bottom_n";
    case SelectionRule::kRandomN:
      return "random_n";
  }
  return "?";
}

double ranking_score(const LanguageModel& model, const Vocabulary& vocab, const GeneratedSample& sample,
                     const PromptTemplate& tmpl) {
  if (model.vocab_size() != vocab.size()) throw ConfigError("scoring: model and vocabulary sizes differ");
  if (sample.x_g.empty()) throw InvalidSampleError("cannot score an empty generated sequence");
  const TokenSequence prefix =
      sample.x_s ? tmpl.render(vocab, *sample.x_s) : tmpl.render(vocab);
  const auto lp = sequence_token_log_probs(model, prefix, sample.x_g);
  double sum = 0.0;
  for (double v : lp) sum += v;
  return sum / static_cast<double>(lp.size());
}

void score_pools(const LanguageModel& model, const Vocabulary& vocab, std::vector<std::vector<GeneratedSample>>& pools,
                 std::span<const PromptTemplate> templates, int workers) {
  std::vector<GeneratedSample*> all;
  for (auto& pool : pools)
    for (auto& s : pool) {
      if (s.label >= templates.size()) throw ConfigError("sample label has no prompt template");
      all.push_back(&s);
    }
  parallel_for(all.size(), workers,
               [&](std::size_t i) { all[i]->score = ranking_score(model, vocab, *all[i], templates[all[i]->label]); });
}

std::vector<GeneratedSample> select(const std::vector<std::vector<GeneratedSample>>& pools,
                                    const SelectionPolicy& policy, CounterRng& rng) {
  const std::size_t num_labels = policy.per_label.size();
  if (num_labels != pools.size()) throw ConfigError("selection policy must name one rule per label");
  if (policy.n == 0) throw ConfigError("selection.n must be positive");

  auto by_score_desc = [](const GeneratedSample* a, const GeneratedSample* b) {
    return *a->score > *b->score || (*a->score == *b->score && a->id < b->id);
  };
  auto by_score_asc = [](const GeneratedSample* a, const GeneratedSample* b) {
    return *a->score < *b->score || (*a->score == *b->score && a->id < b->id);
  };
  auto by_id = [](const GeneratedSample* a, const GeneratedSample* b) { return a->id < b->id; };

  // Picks n from `cands` (removing them) according to `rule`.
  auto pick = [&](std::vector<const GeneratedSample*>& cands, SelectionRule rule) {
    std::vector<const GeneratedSample*> chosen;
    if (rule == SelectionRule::kRandomN) {
      std::sort(cands.begin(), cands.end(), by_id);
      for (std::size_t i = 0; i < policy.n; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(cands.size() - i));
        std::swap(cands[i], cands[j]);
      }
      chosen.assign(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(policy.n));
      cands.erase(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(policy.n));
      return chosen;
    }
    for (const auto* s : cands)
      if (!s->score) throw ConfigError("selection: sample " + std::to_string(s->id) + " is unscored");
    std::sort(cands.begin(), cands.end(), rule == SelectionRule::kTopN ? +by_score_desc : +by_score_asc);
    chosen.assign(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(policy.n));
    cands.erase(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(policy.n));
    return chosen;
  };

  std::vector<GeneratedSample> out;
  out.reserve(policy.n * num_labels);
  if (policy.merge_pools) {
    std::vector<const GeneratedSample*> merged;
    for (const auto& pool : pools)
      for (const auto& s : pool) merged.push_back(&s);
    if (merged.size() < policy.n * num_labels)
      throw InsufficientPoolError("merged pool has " + std::to_string(merged.size()) + " samples, need " +
                                  std::to_string(policy.n * num_labels));
    for (std::size_t y = 0; y < num_labels; ++y)
      for (const auto* s : pick(merged, policy.per_label[y])) {
        out.push_back(*s);
        out.back().label = y;
      }
    return out;
  }
  for (std::size_t y = 0; y < num_labels; ++y) {
    if (pools[y].size() < policy.n)
      throw InsufficientPoolError("pool for label " + std::to_string(y) + " has " + std::to_string(pools[y].size()) +
                                  " samples, need " + std::to_string(policy.n));
    std::vector<const GeneratedSample*> cands;
    for (const auto& s : pools[y]) cands.push_back(&s);
    for (const auto* s : pick(cands, policy.per_label[y])) out.push_back(*s);
  }
  return out;
}

}  // namespace zsgen
