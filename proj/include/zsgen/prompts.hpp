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
#include <string>
#include <vector>

#include "zsgen/lm.hpp"
#include "zsgen/rng.hpp"
#include "zsgen/sample.hpp"
#include "zsgen/sampling.hpp"

namespace zsgen {

/// Label-descriptive prompt. `pattern` is a token list that may contain the
/// slot "{XS}" (the sampled first sequence); generation continues after the
/// last pattern token. A BOS token is always prepended on rendering.
struct PromptTemplate {
  static constexpr std::string_view kFirstSequenceSlot = "{XS}";

  std::size_t label = 0;
  std::vector<std::string> pattern;
  TaskType task_type = TaskType::kSingle;
  std::optional<double> alpha;  // per-label overrides of SamplingConfig
  std::optional<double> beta;

  void validate() const;
  TokenSequence render(const Vocabulary& vocab, std::span<const TokenId> first_seq = {}) const;
  SamplingConfig sampling_for(const SamplingConfig& base) const;
};

/// Predicate on candidate first sequences. Unset bounds accept everything.
struct CorpusSamplerConstraints {
  std::size_t min_len = 1;
  std::size_t max_len = static_cast<std::size_t>(-1);
  std::vector<TokenId> first_token_in;  // empty: any
  std::optional<TokenId> last_token;

  bool accepts(std::span<const TokenId> seq) const;
};

/// Uniform sampler over the corpus sequences that satisfy the constraints.
/// The eligible set is computed once; the corpus must outlive the sampler.
class CorpusSampler {
 public:
  CorpusSampler(const std::vector<TokenSequence>& corpus, const CorpusSamplerConstraints& constraints);
  const TokenSequence& sample(CounterRng& rng) const;
  std::size_t eligible_count() const noexcept { return eligible_.size(); }

 private:
  const std::vector<TokenSequence>* corpus_;
  std::vector<std::size_t> eligible_;
};

const TokenSequence& sample_first_sequence(const std::vector<TokenSequence>& corpus,
                                           const CorpusSamplerConstraints& constraints, CounterRng& rng);

/// x_g <- G(w_y). Returns a sample with an empty x_g on generation failure.
GeneratedSample generate_single(const LanguageModel& model, const Vocabulary& vocab, std::size_t label,
                                const PromptTemplate& tmpl, const SamplingConfig& cfg, CounterRng& rng);

/// x_s ~ D, x_g <- G([x_s; w_y]) with x_s as the repetition reward set.
GeneratedSample generate_pair(const LanguageModel& model, const Vocabulary& vocab, std::size_t label,
                              const PromptTemplate& tmpl, const CorpusSampler& sampler, const SamplingConfig& cfg,
                              CounterRng& rng);

/// One temperature-contrast sample: x_g starts with a random seed (stop-word)
/// token and is continued at temperature `tau`.
GeneratedSample generate_contrast_sample(const LanguageModel& model, const Vocabulary& vocab, std::size_t label,
                                         const PromptTemplate& tmpl, std::span<const TokenId> seed_tokens, double tau,
                                         const SamplingConfig& cfg, CounterRng& rng);

struct ContrastStreams {
  std::vector<GeneratedSample> low;   // acceptable-analog, label 0
  std::vector<GeneratedSample> high;  // unacceptable-analog, label 1
};

/// `count` samples per stream; stream i uses its own derived RNG key.
ContrastStreams generate_temperature_contrast(const LanguageModel& model, const Vocabulary& vocab,
                                              std::span<const TokenId> seed_tokens, double tau_low, double tau_high,
                                              const SamplingConfig& cfg, std::size_t count, std::uint64_t seed,
                                              int workers = 1);

struct GenerationRequest {
  TaskType task_type = TaskType::kSingle;
  std::vector<PromptTemplate> templates;  // one per label, indexed by label
  SamplingConfig sampling;
  std::size_t samples_per_label = 0;  // M
  double tau_low = 0.1;
  double tau_high = 10.0;
  std::vector<TokenId> seed_tokens;           // temperature contrast
  const CorpusSampler* first_sequences = nullptr;  // pair
  std::uint64_t seed = 0;
  int workers = 1;
};

/// Per-label pools of M attempts each, indexed 0..M-1 with per-index RNG
/// streams. Empty generations are dropped. Sample ids are label*M + index.
std::vector<std::vector<GeneratedSample>> generate_pools(const LanguageModel& model, const Vocabulary& vocab,
                                                         const GenerationRequest& request);

}  // namespace zsgen
