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

#include "zsgen/prompts.hpp"

#include <algorithm>

#include "zsgen/error.hpp"
#include "zsgen/parallel.hpp"

namespace zsgen {
namespace {

constexpr std::uint64_t kGenerationTag = 0x47454e;

}  // namespace

LabeledExample to_example(const GeneratedSample& s, TokenId sep) {
  if (s.x_s) {
    TokenSequence joined(s.x_s->begin(), s.x_s->end());
    joined.push_back(sep);
    joined.insert(joined.end(), s.x_g.begin(), s.x_g.end());
    return {std::move(joined), s.label};
  }
  return {s.x_g, s.label};
}

void PromptTemplate::validate() const {
  const auto slots = std::count(pattern.begin(), pattern.end(), std::string(kFirstSequenceSlot));
  if (task_type == TaskType::kPair) {
    if (slots != 1) throw ConfigError("pair prompt template must contain exactly one {XS} slot");
  } else if (slots != 0) {
    throw ConfigError("single-sequence prompt template must not contain {XS}");
  }
  if (alpha && !(*alpha > 0.0)) throw ConfigError("prompt alpha must be > 0");
  if (beta && !(*beta > 0.0)) throw ConfigError("prompt beta must be > 0");
}

TokenSequence PromptTemplate::render(const Vocabulary& vocab, std::span<const TokenId> first_seq) const {
  TokenSequence out{vocab.bos()};
  for (const auto& tok : pattern) {
    if (tok == kFirstSequenceSlot)
      out.insert(out.end(), first_seq.begin(), first_seq.end());
    else
      out.push_back(vocab.id_of(tok));
  }
  return out;
}

SamplingConfig PromptTemplate::sampling_for(const SamplingConfig& base) const {
  SamplingConfig cfg = base;
  if (alpha) cfg.alpha = *alpha;
  if (beta) cfg.beta = *beta;
  return cfg;
}

bool CorpusSamplerConstraints::accepts(std::span<const TokenId> seq) const {
  if (seq.size() < min_len || seq.size() > max_len) return false;
  if (!first_token_in.empty() &&
      (seq.empty() || std::find(first_token_in.begin(), first_token_in.end(), seq.front()) == first_token_in.end()))
    return false;
  if (last_token && (seq.empty() || seq.back() != *last_token)) return false;
  return true;
}

CorpusSampler::CorpusSampler(const std::vector<TokenSequence>& corpus, const CorpusSamplerConstraints& constraints)
    : corpus_(&corpus) {
  if (corpus.empty()) throw ConfigError("first-sequence corpus is empty");
  for (std::size_t i = 0; i < corpus.size(); ++i)
    if (constraints.accepts(corpus[i])) eligible_.push_back(i);
  if (eligible_.empty()) throw ConstraintUnsatisfiableError("no corpus sequence satisfies the sampling constraints");
}

const TokenSequence& CorpusSampler::sample(CounterRng& rng) const {
  return (*corpus_)[eligible_[static_cast<std::size_t>(rng.below(eligible_.size()))]];
}

const TokenSequence& sample_first_sequence(const std::vector<TokenSequence>& corpus,
                                           const CorpusSamplerConstraints& constraints, CounterRng& rng) {
  return CorpusSampler(corpus, constraints).sample(rng);
}

GeneratedSample generate_single(const LanguageModel& model, const Vocabulary& vocab, std::size_t label,
                                const PromptTemplate& tmpl, const SamplingConfig& cfg, CounterRng& rng) {
  if (tmpl.task_type != TaskType::kSingle) throw ConfigError("generate_single needs a single-sequence template");
  const auto prompt = tmpl.render(vocab);
  GeneratedSample s;
  s.label = label;
  s.x_g = generate_sequence(model, prompt, tmpl.sampling_for(cfg), rng);
  return s;
}

GeneratedSample generate_pair(const LanguageModel& model, const Vocabulary& vocab, std::size_t label,
                              const PromptTemplate& tmpl, const CorpusSampler& sampler, const SamplingConfig& cfg,
                              CounterRng& rng) {
  if (tmpl.task_type != TaskType::kPair) throw ConfigError("generate_pair needs a pair template");
  const TokenSequence& first = sampler.sample(rng);
  const auto prompt = tmpl.render(vocab, first);
  GeneratedSample s;
  s.label = label;
  s.x_s = first;
  s.x_g = generate_sequence(model, prompt, tmpl.sampling_for(cfg), rng, first);
  return s;
}

GeneratedSample generate_contrast_sample(const LanguageModel& model, const Vocabulary& vocab, std::size_t label,
                                         const PromptTemplate& tmpl, std::span<const TokenId> seed_tokens, double tau,
                                         const SamplingConfig& cfg, CounterRng& rng) {
  if (seed_tokens.empty()) throw ConfigError("temperature contrast needs at least one seed token");
  if (!(tau > 0.0)) throw ConfigError("temperature contrast needs tau > 0");
  auto prompt = tmpl.render(vocab);
  const TokenId seed_tok = seed_tokens[static_cast<std::size_t>(rng.below(seed_tokens.size()))];
  prompt.push_back(seed_tok);
  SamplingConfig c = tmpl.sampling_for(cfg);
  c.temperature = tau;
  GeneratedSample s;
  s.label = label;
  s.x_g.push_back(seed_tok);
  if (c.max_len > 1) {
    c.max_len -= 1;
    auto rest = generate_sequence(model, prompt, c, rng);
    s.x_g.insert(s.x_g.end(), rest.begin(), rest.end());
  }
  return s;
}

ContrastStreams generate_temperature_contrast(const LanguageModel& model, const Vocabulary& vocab,
                                              std::span<const TokenId> seed_tokens, double tau_low, double tau_high,
                                              const SamplingConfig& cfg, std::size_t count, std::uint64_t seed,
                                              int workers) {
  if (!(tau_low > 0.0) || !(tau_low < tau_high))
    throw ConfigError("temperature contrast requires 0 < tau_low < tau_high");
  GenerationRequest req;
  req.task_type = TaskType::kTemperatureContrast;
  req.templates = {PromptTemplate{0, {}, TaskType::kTemperatureContrast, {}, {}},
                   PromptTemplate{1, {}, TaskType::kTemperatureContrast, {}, {}}};
  req.sampling = cfg;
  req.samples_per_label = count;
  req.tau_low = tau_low;
  req.tau_high = tau_high;
  req.seed_tokens.assign(seed_tokens.begin(), seed_tokens.end());
  req.seed = seed;
  req.workers = workers;
  auto pools = generate_pools(model, vocab, req);
  return {std::move(pools[0]), std::move(pools[1])};
}

std::vector<std::vector<GeneratedSample>> generate_pools(const LanguageModel& model, const Vocabulary& vocab,
                                                         const GenerationRequest& req) {
  const std::size_t num_labels = req.templates.size();
  if (num_labels < 2) throw ConfigError("generation needs templates for at least two labels");
  if (req.samples_per_label == 0) throw ConfigError("generation.samples_per_label must be positive");
  req.sampling.validate(vocab.size());
  for (std::size_t y = 0; y < num_labels; ++y) {
    req.templates[y].validate();
    if (req.templates[y].label != y) throw ConfigError("prompt templates must be ordered by label");
    if (req.templates[y].task_type != req.task_type) throw ConfigError("prompt template task type mismatch");
  }
  if (req.task_type == TaskType::kPair && req.first_sequences == nullptr)
    throw ConfigError("pair generation needs a first-sequence corpus");
  if (req.task_type == TaskType::kTemperatureContrast) {
    if (num_labels != 2) throw ConfigError("temperature contrast uses exactly two labels");
    if (!(req.tau_low > 0.0) || !(req.tau_low < req.tau_high))
      throw ConfigError("temperature contrast requires 0 < tau_low < tau_high");
  }

  const std::size_t M = req.samples_per_label;
  std::vector<GeneratedSample> flat(num_labels * M);
  parallel_for(flat.size(), req.workers, [&](std::size_t k) {
    const std::size_t y = k / M;
    const std::size_t i = k % M;
    CounterRng rng(derive_key(req.seed, {kGenerationTag, y, i}));
    const auto& tmpl = req.templates[y];
    GeneratedSample s;
    switch (req.task_type) {
      case TaskType::kSingle:
        s = generate_single(model, vocab, y, tmpl, req.sampling, rng);
        break;
      case TaskType::kPair:
        s = generate_pair(model, vocab, y, tmpl, *req.first_sequences, req.sampling, rng);
        break;
      case TaskType::kTemperatureContrast:
        s = generate_contrast_sample(model, vocab, y, tmpl, req.seed_tokens, y == 0 ? req.tau_low : req.tau_high,
                                     req.sampling, rng);
        break;
    }
    s.id = k;
    flat[k] = std::move(s);
  });

  std::vector<std::vector<GeneratedSample>> pools(num_labels);
  for (auto& s : flat)
    if (!s.x_g.empty()) pools[s.label].push_back(std::move(s));
  return pools;
}

}  // namespace zsgen
