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

#include <optional>
#include <span>
#include <vector>

#include "zsgen/lm.hpp"
#include "zsgen/rng.hpp"
#include "zsgen/vocab.hpp"

namespace zsgen {

/// Vocabulary-sized membership set keyed by token identity.
class TokenSet {
 public:
  TokenSet() = default;
  explicit TokenSet(std::size_t vocab_size) : member_(vocab_size, 0) {}
  static TokenSet of(std::span<const TokenId> tokens, std::size_t vocab_size);

  void insert(TokenId id) { member_.at(id) = 1; }
  bool contains(TokenId id) const { return id < member_.size() && member_[id] != 0; }
  std::size_t vocab_size() const noexcept { return member_.size(); }

 private:
  std::vector<char> member_;
};

struct SamplingConfig {
  double temperature = 1.0;          // 0 selects greedy decoding
  std::optional<std::size_t> top_k;  // nullopt keeps the full vocabulary
  double alpha = 1.0;                // divisor scale for tokens in the first sequence only
  double beta = 1.0;                 // divisor scale for tokens already generated
  std::size_t max_len = 64;
  std::size_t min_len = 0;  // stop tokens cannot be drawn before this many tokens
  std::vector<TokenId> stop_tokens;
  std::vector<TokenId> banned_tokens;  // never emitted, e.g. prompt marker tokens

  /// Throws ConfigError on any violated bound.
  void validate(std::size_t vocab_size) const;
};

/// p_i proportional to exp(logit_i / tau). Requires tau > 0.
std::vector<double> temperature_probs(std::span<const double> logits, double tau);

/// Logits divided by a per-token divisor: tau*alpha for tokens in
/// `first_seq` but not in `generated`, tau*beta for tokens in `generated`,
/// tau otherwise.
std::vector<double> repetition_scaled_logits(std::span<const double> logits, double tau, double alpha, double beta,
                                             const TokenSet& first_seq, const TokenSet& generated);

std::vector<double> repetition_adjusted_probs(std::span<const double> logits, double tau, double alpha, double beta,
                                              const TokenSet& first_seq, const TokenSet& generated);

/// Keeps the k largest probabilities (lower id wins ties) and renormalizes.
std::vector<double> top_k_filter(std::span<const double> probs, std::size_t k);

/// Inverse-CDF draw using a single uniform from rng.
TokenId sample_token(CounterRng& rng, std::span<const double> probs);

/// Decodes a continuation of `prompt` until a stop token or max_len. The
/// returned sequence excludes the prompt and the stop token; an empty result
/// is the generation-failure sentinel. `first_seq` is the reward set for
/// the alpha adjustment.
TokenSequence generate_sequence(const LanguageModel& model, std::span<const TokenId> prompt, const SamplingConfig& cfg,
                                CounterRng& rng, std::span<const TokenId> first_seq = {});

}  // namespace zsgen
