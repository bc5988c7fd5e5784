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
#include <unordered_map>
#include <variant>
#include <vector>

#include "zsgen/checkpoint.hpp"
#include "zsgen/parameters.hpp"
#include "zsgen/vocab.hpp"

namespace zsgen {

/// Anything that yields next-token logits over a fixed vocabulary.
/// Implementations must be safe to call concurrently on a const instance.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;
  virtual std::size_t vocab_size() const = 0;
  /// Exactly vocab_size() finite values.
  virtual std::vector<double> next_token_logits(std::span<const TokenId> context) const = 0;
};

/// Count-based n-gram model with additive smoothing. Logits are
/// log(count + kappa), so softmax reproduces the smoothed conditional and
/// logits are non-negative whenever kappa >= 1.
class NgramLM final : public LanguageModel {
 public:
  static constexpr int kMaxOrder = 5;

  NgramLM(std::size_t vocab_size, int order, double kappa, TokenId bos);

  void add_sequence(std::span<const TokenId> seq);

  std::size_t vocab_size() const override { return vocab_size_; }
  std::vector<double> next_token_logits(std::span<const TokenId> context) const override;

  int order() const noexcept { return order_; }
  double kappa() const noexcept { return kappa_; }
  TokenId bos() const noexcept { return bos_; }
  std::size_t context_count() const noexcept { return row_of_.size(); }
  /// Raw count of `next` after the (padded) context.
  double count(std::span<const TokenId> context, TokenId next) const;

  void export_to(Checkpoint& ckpt) const;
  static NgramLM import_from(const Checkpoint& ckpt);

  bool operator==(const NgramLM& other) const;

 private:
  std::uint64_t context_key(std::span<const TokenId> context) const;
  std::size_t row_for(std::uint64_t key);

  std::size_t vocab_size_;
  int order_;
  double kappa_;
  TokenId bos_;
  std::unordered_map<std::uint64_t, std::uint32_t> row_of_;
  std::vector<std::uint64_t> row_keys_;
  std::vector<float> counts_;  // rows x vocab
  std::vector<float> totals_;
};

/// Fixed-window neural LM: the last `window` token embeddings are
/// concatenated, passed through one tanh layer and projected to |V| logits.
class NeuralLM final : public LanguageModel {
 public:
  struct Shape {
    std::size_t vocab_size = 0;
    std::size_t window = 3;
    std::size_t embed_dim = 16;
    std::size_t hidden = 32;
  };

  NeuralLM(Shape shape, TokenId bos);

  std::size_t vocab_size() const override { return shape_.vocab_size; }
  std::vector<double> next_token_logits(std::span<const TokenId> context) const override;

  /// Cross-entropy of predicting `target` after `context`; gradient is
  /// accumulated (added) into `grad`, which has params().size() entries.
  double loss_and_gradient(std::span<const TokenId> context, TokenId target, std::span<double> grad) const;

  const Shape& shape() const noexcept { return shape_; }
  TokenId bos() const noexcept { return bos_; }
  ParameterSet& params() noexcept { return params_; }
  const ParameterSet& params() const noexcept { return params_; }

  void export_to(Checkpoint& ckpt) const;
  static NeuralLM import_from(const Checkpoint& ckpt);

 private:
  struct Cache {
    std::vector<TokenId> window_ids;
    std::vector<double> input;
    std::vector<double> hidden;
    std::vector<double> logits;
  };
  void forward(std::span<const TokenId> context, Cache& cache) const;

  Shape shape_;
  TokenId bos_;
  ParameterSet params_;
  std::size_t emb_, w1_, b1_, w2_, b2_;
};

enum class LmKind { kNgram, kNeural };

struct LmTrainConfig {
  LmKind kind = LmKind::kNgram;
  int order = 3;        // ngram n, or neural context window
  double kappa = 1.0;   // ngram additive smoothing
  std::size_t embed_dim = 16;
  std::size_t hidden = 32;
  int epochs = 5;
  double lr = 0.1;
  std::uint64_t seed = 0;
};

/// Value wrapper over the two concrete model kinds.
class AutoregressiveLM final : public LanguageModel {
 public:
  explicit AutoregressiveLM(NgramLM m) : model_(std::move(m)) {}
  explicit AutoregressiveLM(NeuralLM m) : model_(std::move(m)) {}

  LmKind kind() const noexcept { return model_.index() == 0 ? LmKind::kNgram : LmKind::kNeural; }
  int context_order() const;

  std::size_t vocab_size() const override;
  std::vector<double> next_token_logits(std::span<const TokenId> context) const override;

  const NgramLM* ngram() const { return std::get_if<NgramLM>(&model_); }
  const NeuralLM* neural() const { return std::get_if<NeuralLM>(&model_); }

  Checkpoint to_checkpoint(const Vocabulary& vocab) const;
  static AutoregressiveLM from_checkpoint(const Checkpoint& ckpt);

 private:
  std::variant<NgramLM, NeuralLM> model_;
};

struct LmTrainReport {
  std::vector<double> epoch_loss;  // neural only: mean next-token cross-entropy per epoch
};

/// Empty corpus is a configuration error.
AutoregressiveLM train_lm(const std::vector<TokenSequence>& corpus, const Vocabulary& vocab,
                          const LmTrainConfig& config, LmTrainReport* report = nullptr);

/// log softmax(next_token_logits(prefix ++ continuation[<i]))[continuation[i]]
/// for each i, at temperature 1 and without repetition adjustment.
std::vector<double> sequence_token_log_probs(const LanguageModel& model, std::span<const TokenId> prefix,
                                             std::span<const TokenId> continuation);

}  // namespace zsgen
