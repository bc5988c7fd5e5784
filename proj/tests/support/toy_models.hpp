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

#include <algorithm>
#include <cmath>
#include <vector>

#include "zsgen/lm.hpp"
#include "zsgen/rng.hpp"

namespace zsgen::testing {

/// Logits depend only on the last context token (BOS when empty). Entries
/// are drawn once from the seed, uniform in [lo, hi].
class TableLM final : public LanguageModel {
 public:
  TableLM(std::size_t vocab, std::uint64_t seed, double lo = 0.25, double hi = 3.0, TokenId bos = 0)
      : vocab_(vocab), bos_(bos), table_(vocab * vocab) {
    CounterRng rng(seed);
    for (auto& v : table_) v = lo + (hi - lo) * rng.uniform();
  }

  std::size_t vocab_size() const override { return vocab_; }
  std::vector<double> next_token_logits(std::span<const TokenId> context) const override {
    const TokenId last = context.empty() ? bos_ : context.back();
    return {table_.begin() + static_cast<std::ptrdiff_t>(last * vocab_),
            table_.begin() + static_cast<std::ptrdiff_t>((last + 1) * vocab_)};
  }

 private:
  std::size_t vocab_;
  TokenId bos_;
  std::vector<double> table_;
};

/// Repeats its last content token: logit `loop` for the last token, `base`
/// for other content tokens and `stop` for EOS (id 1). Ids 0 and 2 are never
/// proposed.
class LoopingLM final : public LanguageModel {
 public:
  LoopingLM(std::size_t vocab, double loop = 3.0, double base = 1.0, double stop = 0.5)
      : vocab_(vocab), loop_(loop), base_(base), stop_(stop) {}

  std::size_t vocab_size() const override { return vocab_; }
  std::vector<double> next_token_logits(std::span<const TokenId> context) const override {
    std::vector<double> out(vocab_, base_);
    out[0] = out[2] = -30.0;
    out[1] = stop_;
    if (!context.empty() && context.back() >= 3) out[context.back()] = loop_;
    return out;
  }

 private:
  std::size_t vocab_;
  double loop_, base_, stop_;
};

/// Emits fixed per-step distributions: at depth d (tokens after the
/// prefix) the logits are log(probs[d]).
class ScriptedLM final : public LanguageModel {
 public:
  ScriptedLM(std::size_t prefix_len, std::vector<std::vector<double>> probs)
      : prefix_len_(prefix_len), probs_(std::move(probs)) {}

  std::size_t vocab_size() const override { return probs_.front().size(); }
  std::vector<double> next_token_logits(std::span<const TokenId> context) const override {
    const auto& p = probs_.at(context.size() - prefix_len_);
    std::vector<double> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = std::log(p[i]);
    return out;
  }

 private:
  std::size_t prefix_len_;
  std::vector<std::vector<double>> probs_;
};

/// Longest run of one repeated token.
inline std::size_t longest_run(const TokenSequence& seq) {
  std::size_t best = 0, run = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    run = (i > 0 && seq[i] == seq[i - 1]) ? run + 1 : 1;
    best = std::max(best, run);
  }
  return best;
}

inline double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  double tv = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) tv += std::abs(a[i] - b[i]);
  return 0.5 * tv;
}

}  // namespace zsgen::testing
