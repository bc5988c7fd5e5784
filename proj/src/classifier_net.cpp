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

#include "zsgen/classifier_net.hpp"

#include <algorithm>
#include <cmath>

#include "zsgen/error.hpp"
#include "zsgen/numeric.hpp"

namespace zsgen {
namespace {

constexpr float kKindClassifier = 2.0f;

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

ClassifierNet::ClassifierNet(Shape shape) : shape_(shape) {
  if (shape.vocab_size == 0 || shape.embed_dim == 0 || shape.hidden == 0 || shape.num_labels < 2)
    throw ConfigError("classifier dimensions must be positive with at least two labels");
  const auto V = static_cast<std::uint32_t>(shape.vocab_size);
  const auto D = static_cast<std::uint32_t>(shape.embed_dim);
  const auto H = static_cast<std::uint32_t>(shape.hidden);
  const auto Y = static_cast<std::uint32_t>(shape.num_labels);
  emb_ = params_.add("clf.emb", {V, D});
  if (shape.pair) match_ = params_.add("clf.match", {D});
  if (shape.bigram_buckets > 0) bigram_ = params_.add("clf.bigram", {static_cast<std::uint32_t>(shape.bigram_buckets), D});
  w1_ = params_.add("clf.w1", {H, static_cast<std::uint32_t>(feature_dim())});
  b1_ = params_.add("clf.b1", {H});
  w2_ = params_.add("clf.w2", {Y, H});
  b2_ = params_.add("clf.b2", {Y});
}

ClassifierNet ClassifierNet::initialized(Shape shape, CounterRng& rng, float scale) {
  ClassifierNet net(shape);
  net.params_.init_uniform(rng, scale);
  return net;
}

std::size_t ClassifierNet::bucket_of(TokenId a, TokenId b) const {
  return splitmix64((static_cast<std::uint64_t>(a) << 32) | b) % shape_.bigram_buckets;
}

std::size_t ClassifierNet::segment_terms(std::size_t n) const {
  return shape_.bigram_buckets > 0 ? 2 * n - 1 : n;
}

void ClassifierNet::zero_output_layer() {
  std::ranges::fill(params_.block(w2_), 0.0f);
  std::ranges::fill(params_.block(b2_), 0.0f);
}

void ClassifierNet::forward(std::span<const TokenId> tokens, Cache& c) const {
  const std::size_t D = shape_.embed_dim, H = shape_.hidden, Y = shape_.num_labels;
  if (tokens.empty()) throw InvalidSampleError("classifier input is empty");
  auto emb = params_.block(emb_);
  auto mean_of = [&](std::span<const TokenId> seg, std::vector<double>& out) {
    out.assign(D, 0.0);
    for (TokenId t : seg) {
      if (t >= shape_.vocab_size) throw InvalidSampleError("token id out of range in classifier input");
      for (std::size_t d = 0; d < D; ++d) out[d] += emb[t * D + d];
    }
    if (shape_.bigram_buckets > 0) {
      auto big = params_.block(bigram_);
      for (std::size_t i = 1; i < seg.size(); ++i) {
        const std::size_t b = bucket_of(seg[i - 1], seg[i]);
        for (std::size_t d = 0; d < D; ++d) out[d] += big[b * D + d];
      }
    }
    for (double& x : out) x /= static_cast<double>(segment_terms(seg.size()));
  };

  if (!shape_.pair) {
    mean_of(tokens, c.u);
    c.features = c.u;
  } else {
    auto it = std::find(tokens.begin(), tokens.end(), shape_.sep);
    c.split = static_cast<std::size_t>(it - tokens.begin());
    if (c.split == 0 || c.split + 1 >= tokens.size())
      throw InvalidSampleError("pair input needs two non-empty segments joined by SEP");
    const auto first = tokens.first(c.split), second = tokens.subspan(c.split + 1);
    mean_of(first, c.u);
    mean_of(second, c.v);
    // Second-segment tokens that also occur in the first get the match vector.
    auto match = params_.block(match_);
    const double inv = 1.0 / static_cast<double>(segment_terms(second.size()));
    for (TokenId t : second)
      if (std::find(first.begin(), first.end(), t) != first.end())
        for (std::size_t d = 0; d < D; ++d) c.v[d] += match[d] * inv;
    c.features.resize(4 * D);
    for (std::size_t d = 0; d < D; ++d) {
      c.features[d] = c.u[d];
      c.features[D + d] = c.v[d];
      c.features[2 * D + d] = c.u[d] * c.v[d];
      c.features[3 * D + d] = std::abs(c.u[d] - c.v[d]);
    }
  }

  const std::size_t F = feature_dim();
  auto w1 = params_.block(w1_);
  auto b1 = params_.block(b1_);
  auto w2 = params_.block(w2_);
  auto b2 = params_.block(b2_);
  c.hidden.resize(H);
  for (std::size_t h = 0; h < H; ++h) {
    double s = b1[h];
    for (std::size_t i = 0; i < F; ++i) s += w1[h * F + i] * c.features[i];
    c.hidden[h] = std::tanh(s);
  }
  c.logits.resize(Y);
  for (std::size_t y = 0; y < Y; ++y) {
    double s = b2[y];
    for (std::size_t h = 0; h < H; ++h) s += w2[y * H + h] * c.hidden[h];
    c.logits[y] = s;
  }
}

void ClassifierNet::backward(std::span<const TokenId> tokens, const Cache& c, std::span<const double> dlogits,
                             std::span<double> grad) const {
  const std::size_t D = shape_.embed_dim, H = shape_.hidden, Y = shape_.num_labels, F = feature_dim();
  auto w1 = params_.block(w1_);
  auto w2 = params_.block(w2_);
  double* g_emb = grad.data() + params_.info(emb_).offset;
  double* g_w1 = grad.data() + params_.info(w1_).offset;
  double* g_b1 = grad.data() + params_.info(b1_).offset;
  double* g_w2 = grad.data() + params_.info(w2_).offset;
  double* g_b2 = grad.data() + params_.info(b2_).offset;

  std::vector<double> dhidden(H, 0.0);
  for (std::size_t y = 0; y < Y; ++y) {
    g_b2[y] += dlogits[y];
    for (std::size_t h = 0; h < H; ++h) {
      g_w2[y * H + h] += dlogits[y] * c.hidden[h];
      dhidden[h] += dlogits[y] * w2[y * H + h];
    }
  }
  std::vector<double> dfeat(F, 0.0);
  for (std::size_t h = 0; h < H; ++h) {
    const double dz = dhidden[h] * (1.0 - c.hidden[h] * c.hidden[h]);
    g_b1[h] += dz;
    for (std::size_t i = 0; i < F; ++i) {
      g_w1[h * F + i] += dz * c.features[i];
      dfeat[i] += dz * w1[h * F + i];
    }
  }
  auto scatter = [&](std::span<const TokenId> seg, const std::vector<double>& dmean) {
    const double inv = 1.0 / static_cast<double>(segment_terms(seg.size()));
    for (TokenId t : seg)
      for (std::size_t d = 0; d < D; ++d) g_emb[t * D + d] += dmean[d] * inv;
    if (shape_.bigram_buckets == 0) return;
    double* g_big = grad.data() + params_.info(bigram_).offset;
    for (std::size_t i = 1; i < seg.size(); ++i) {
      const std::size_t b = bucket_of(seg[i - 1], seg[i]);
      for (std::size_t d = 0; d < D; ++d) g_big[b * D + d] += dmean[d] * inv;
    }
  };
  if (!shape_.pair) {
    scatter(tokens, dfeat);
    return;
  }
  std::vector<double> du(D), dv(D);
  for (std::size_t d = 0; d < D; ++d) {
    const double s = sign(c.u[d] - c.v[d]);
    du[d] = dfeat[d] + dfeat[2 * D + d] * c.v[d] + dfeat[3 * D + d] * s;
    dv[d] = dfeat[D + d] + dfeat[2 * D + d] * c.u[d] - dfeat[3 * D + d] * s;
  }
  const auto first = tokens.first(c.split), second = tokens.subspan(c.split + 1);
  scatter(first, du);
  scatter(second, dv);
  double* g_match = grad.data() + params_.info(match_).offset;
  const double inv = 1.0 / static_cast<double>(segment_terms(second.size()));
  for (TokenId t : second)
    if (std::find(first.begin(), first.end(), t) != first.end())
      for (std::size_t d = 0; d < D; ++d) g_match[d] += dv[d] * inv;
}

std::vector<double> ClassifierNet::logits(std::span<const TokenId> tokens) const {
  Cache c;
  forward(tokens, c);
  return std::move(c.logits);
}

std::vector<double> ClassifierNet::predict(std::span<const TokenId> tokens) const { return softmax(logits(tokens)); }

Checkpoint ClassifierNet::to_checkpoint(const Vocabulary& vocab) const {
  if (vocab.size() != shape_.vocab_size) throw ConfigError("vocabulary does not match the classifier");
  Checkpoint ckpt;
  ckpt.vocab = vocab.tokens();
  ckpt.add_scalar("meta.kind", kKindClassifier);
  ckpt.add_scalar("clf.pair", shape_.pair ? 1.0f : 0.0f);
  ckpt.add_scalar("clf.sep", static_cast<float>(shape_.sep));
  params_.export_to(ckpt);
  return ckpt;
}

ClassifierNet ClassifierNet::from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.scalar("meta.kind") != kKindClassifier) throw ConfigError("checkpoint does not hold a classifier");
  const auto& emb = ckpt.get("clf.emb");
  const auto& w2 = ckpt.get("clf.w2");
  if (emb.dims.size() != 2 || w2.dims.size() != 2) throw ConfigError("classifier checkpoint has malformed arrays");
  Shape shape;
  shape.vocab_size = ckpt.vocab.size();
  shape.embed_dim = emb.dims[1];
  shape.hidden = w2.dims[1];
  shape.num_labels = w2.dims[0];
  shape.pair = ckpt.scalar("clf.pair") != 0.0f;
  shape.sep = static_cast<TokenId>(ckpt.scalar("clf.sep"));
  if (const auto* big = ckpt.find("clf.bigram")) {
    if (big->dims.size() != 2) throw ConfigError("classifier checkpoint has malformed arrays");
    shape.bigram_buckets = big->dims[0];
  }
  ClassifierNet net(shape);
  net.params_.import_from(ckpt);
  return net;
}

TokenSequence join_pair(std::span<const TokenId> first, std::span<const TokenId> second, TokenId sep) {
  TokenSequence out(first.begin(), first.end());
  out.push_back(sep);
  out.insert(out.end(), second.begin(), second.end());
  return out;
}

}  // namespace zsgen
