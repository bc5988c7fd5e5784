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
#include <vector>

#include "zsgen/checkpoint.hpp"
#include "zsgen/parameters.hpp"
#include "zsgen/rng.hpp"
#include "zsgen/vocab.hpp"

namespace zsgen {

/// Embedding-average classifier with one tanh hidden layer.
///
/// Single-sequence inputs are averaged into u. Pair inputs (two segments
/// joined by SEP) produce [u, v, u*v, |u-v|]; second-segment tokens that
/// also occur in the first segment additionally carry a learned match vector.
class ClassifierNet {
 public:
  struct Shape {
    std::size_t vocab_size = 0;
    std::size_t embed_dim = 16;
    std::size_t hidden = 16;
    std::size_t num_labels = 2;
    bool pair = false;
    TokenId sep = 0;
    /// When non-zero, adjacent token pairs are hashed into this many extra
    /// embedding rows and averaged together with the token embeddings.
    std::size_t bigram_buckets = 0;
  };

  struct Cache {
    std::vector<double> u, v;
    std::vector<double> features;
    std::vector<double> hidden;
    std::vector<double> logits;
    std::size_t split = 0;  // index of SEP for pair inputs
  };

  explicit ClassifierNet(Shape shape);
  static ClassifierNet initialized(Shape shape, CounterRng& rng, float scale = 0.1f);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t num_labels() const noexcept { return shape_.num_labels; }

  std::vector<double> logits(std::span<const TokenId> tokens) const;
  /// Softmax probabilities; throws InvalidSampleError on empty input.
  std::vector<double> predict(std::span<const TokenId> tokens) const;

  void forward(std::span<const TokenId> tokens, Cache& cache) const;
  /// Adds dL/dparams to grad given dL/dlogits for the cached forward pass.
  void backward(std::span<const TokenId> tokens, const Cache& cache, std::span<const double> dlogits,
                std::span<double> grad) const;

  ParameterSet& params() noexcept { return params_; }
  const ParameterSet& params() const noexcept { return params_; }
  /// Zeros the output layer weights and bias.
  void zero_output_layer();

  Checkpoint to_checkpoint(const Vocabulary& vocab) const;
  static ClassifierNet from_checkpoint(const Checkpoint& ckpt);

 private:
  std::size_t bucket_of(TokenId a, TokenId b) const;
  std::size_t segment_terms(std::size_t n) const;
  std::size_t feature_dim() const { return shape_.pair ? 4 * shape_.embed_dim : shape_.embed_dim; }

  Shape shape_;
  ParameterSet params_;
  std::size_t emb_, match_ = 0, bigram_ = 0, w1_, b1_, w2_, b2_;
};

/// Joins two segments with SEP, the classifier's pair input convention.
TokenSequence join_pair(std::span<const TokenId> first, std::span<const TokenId> second, TokenId sep);

}  // namespace zsgen
