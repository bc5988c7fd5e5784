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

#include "zsgen/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "zsgen/error.hpp"
#include "zsgen/numeric.hpp"

namespace zsgen {

TokenSet TokenSet::of(std::span<const TokenId> tokens, std::size_t vocab_size) {
  TokenSet s(vocab_size);
  for (TokenId t : tokens) s.insert(t);
  return s;
}

void SamplingConfig::validate(std::size_t vocab_size) const {
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) throw ConfigError("sampling.temperature must be >= 0");
  if (top_k && (*top_k < 1 || *top_k > vocab_size)) throw ConfigError("sampling.top_k must be in [1, |V|]");
  if (!(alpha > 0.0)) throw ConfigError("sampling.alpha must be > 0");
  if (!(beta > 0.0)) throw ConfigError("sampling.beta must be > 0");
  if (max_len < 1) throw ConfigError("sampling.max_len must be >= 1");
  if (min_len > max_len) throw ConfigError("sampling.min_len must not exceed sampling.max_len");
  for (TokenId t : stop_tokens)
    if (t >= vocab_size) throw ConfigError("sampling stop token out of range");
  for (TokenId t : banned_tokens)
    if (t >= vocab_size) throw ConfigError("sampling banned token out of range");
}

std::vector<double> temperature_probs(std::span<const double> logits, double tau) {
  if (!(tau > 0.0)) throw ConfigError("temperature must be positive (use greedy decoding for 0)");
  std::vector<double> scaled(logits.begin(), logits.end());
  for (double& l : scaled) l /= tau;
  return softmax(scaled);
}

std::vector<double> repetition_scaled_logits(std::span<const double> logits, double tau, double alpha, double beta,
                                             const TokenSet& first_seq, const TokenSet& generated) {
  if (!(tau > 0.0)) throw ConfigError("temperature must be positive");
  if (!(alpha > 0.0) || !(beta > 0.0)) throw ConfigError("alpha and beta must be positive");
  std::vector<double> out(logits.size());
  for (std::size_t j = 0; j < logits.size(); ++j) {
    const auto id = static_cast<TokenId>(j);
    double omega = tau;
    if (generated.contains(id))
      omega = tau * beta;
    else if (first_seq.contains(id))
      omega = tau * alpha;
    out[j] = logits[j] / omega;
  }
  return out;
}

std::vector<double> repetition_adjusted_probs(std::span<const double> logits, double tau, double alpha, double beta,
                                              const TokenSet& first_seq, const TokenSet& generated) {
  return softmax(repetition_scaled_logits(logits, tau, alpha, beta, first_seq, generated));
}

std::vector<double> top_k_filter(std::span<const double> probs, std::size_t k) {
  if (k < 1 || k > probs.size()) throw ConfigError("top_k must be in [1, |V|]");
  std::vector<std::size_t> idx(probs.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) { return probs[a] > probs[b] || (probs[a] == probs[b] && a < b); });
  std::vector<double> out(probs.size(), 0.0);
  double kept = 0.0;
  for (std::size_t i = 0; i < k; ++i) kept += probs[idx[i]];
  if (!(kept > 0.0)) throw NumericError("top-k kept no probability mass");
  for (std::size_t i = 0; i < k; ++i) out[idx[i]] = probs[idx[i]] / kept;
  return out;
}

TokenId sample_token(CounterRng& rng, std::span<const double> probs) {
  if (probs.empty()) throw NumericError("cannot sample from an empty distribution");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw NumericError("degenerate probability vector (NaN or negative)");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-6) throw NumericError("probability vector does not sum to 1");
  const double u = rng.uniform();
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    last_positive = i;
    cum += probs[i];
    if (u < cum) return static_cast<TokenId>(i);
  }
  return static_cast<TokenId>(last_positive);
}

TokenSequence generate_sequence(const LanguageModel& model, std::span<const TokenId> prompt, const SamplingConfig& cfg,
                                CounterRng& rng, std::span<const TokenId> first_seq) {
  if (prompt.empty()) throw InvalidSampleError("generation prompt must be non-empty");
  const std::size_t V = model.vocab_size();
  const TokenSet reward = TokenSet::of(first_seq, V);
  const TokenSet stop = TokenSet::of(cfg.stop_tokens, V);
  const TokenSet banned = TokenSet::of(cfg.banned_tokens, V);
  TokenSet generated(V);
  const bool greedy = cfg.temperature == 0.0;
  const double tau = greedy ? 1.0 : cfg.temperature;

  std::vector<TokenId> context(prompt.begin(), prompt.end());
  TokenSequence out;
  while (out.size() < cfg.max_len) {
    const auto logits = model.next_token_logits(context);
    auto scaled = repetition_scaled_logits(logits, tau, cfg.alpha, cfg.beta, reward, generated);
    for (TokenId b : cfg.banned_tokens) scaled[b] = -std::numeric_limits<double>::infinity();
    if (out.size() < cfg.min_len)
      for (TokenId s : cfg.stop_tokens) scaled[s] = -std::numeric_limits<double>::infinity();
    TokenId next;
    if (greedy) {
      next = static_cast<TokenId>(argmax(scaled));
    } else {
      auto probs = softmax(scaled);
      if (cfg.top_k && *cfg.top_k < V) probs = top_k_filter(probs, *cfg.top_k);
      next = sample_token(rng, probs);
    }
    if (banned.contains(next)) throw NumericError("decoder selected a banned token");
    if (stop.contains(next)) break;
    out.push_back(next);
    context.push_back(next);
    generated.insert(next);
  }
  return out;
}

}  // namespace zsgen
