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

#include "zsgen/lm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "zsgen/error.hpp"
#include "zsgen/numeric.hpp"
#include "zsgen/rng.hpp"

namespace zsgen {
namespace {

constexpr float kKindNgram = 0.0f;
constexpr float kKindNeural = 1.0f;

// Last `width` tokens of context, left-padded with bos.
void fill_window(std::span<const TokenId> context, std::size_t width, TokenId bos, std::vector<TokenId>& out) {
  out.assign(width, bos);
  const std::size_t take = std::min(width, context.size());
  std::copy(context.end() - static_cast<std::ptrdiff_t>(take), context.end(),
            out.end() - static_cast<std::ptrdiff_t>(take));
}

}  // namespace

// ---------------------------------------------------------------- NgramLM

NgramLM::NgramLM(std::size_t vocab_size, int order, double kappa, TokenId bos)
    : vocab_size_(vocab_size), order_(order), kappa_(kappa), bos_(bos) {
  if (vocab_size == 0 || vocab_size > 0xFFFF) throw ConfigError("ngram vocabulary size must be in [1, 65535]");
  if (order < 1 || order > kMaxOrder) throw ConfigError("ngram order must be in [1, 5]");
  if (!(kappa > 0.0)) throw ConfigError("ngram smoothing kappa must be positive");
}

std::uint64_t NgramLM::context_key(std::span<const TokenId> context) const {
  const std::size_t width = static_cast<std::size_t>(order_ - 1);
  std::uint64_t key = 0;
  for (std::size_t i = 0; i < width; ++i) {
    // position i counts back from the most recent token
    const TokenId id = i < context.size() ? context[context.size() - 1 - i] : bos_;
    key |= static_cast<std::uint64_t>(id) << (16 * i);
  }
  return key;
}

std::size_t NgramLM::row_for(std::uint64_t key) {
  auto [it, inserted] = row_of_.emplace(key, static_cast<std::uint32_t>(row_keys_.size()));
  if (inserted) {
    row_keys_.push_back(key);
    counts_.resize(counts_.size() + vocab_size_, 0.0f);
    totals_.push_back(0.0f);
  }
  return it->second;
}

void NgramLM::add_sequence(std::span<const TokenId> seq) {
  const std::size_t start = (!seq.empty() && seq[0] == bos_) ? 1 : 0;
  for (std::size_t i = start; i < seq.size(); ++i) {
    if (seq[i] >= vocab_size_) throw InvalidSampleError("token id out of range in ngram corpus");
    const std::size_t row = row_for(context_key(seq.first(i)));
    counts_[row * vocab_size_ + seq[i]] += 1.0f;
    totals_[row] += 1.0f;
  }
}

std::vector<double> NgramLM::next_token_logits(std::span<const TokenId> context) const {
  std::vector<double> logits(vocab_size_, std::log(kappa_));
  auto it = row_of_.find(context_key(context));
  if (it == row_of_.end()) return logits;
  const float* row = counts_.data() + static_cast<std::size_t>(it->second) * vocab_size_;
  for (std::size_t j = 0; j < vocab_size_; ++j)
    if (row[j] != 0.0f) logits[j] = std::log(static_cast<double>(row[j]) + kappa_);
  return logits;
}

double NgramLM::count(std::span<const TokenId> context, TokenId next) const {
  auto it = row_of_.find(context_key(context));
  if (it == row_of_.end() || next >= vocab_size_) return 0.0;
  return counts_[static_cast<std::size_t>(it->second) * vocab_size_ + next];
}

void NgramLM::export_to(Checkpoint& ckpt) const {
  const std::size_t width = static_cast<std::size_t>(order_ - 1);
  std::vector<std::uint32_t> order(row_keys_.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return row_keys_[a] < row_keys_[b]; });
  std::vector<float> contexts;
  std::vector<float> counts;
  contexts.reserve(order.size() * width);
  counts.reserve(order.size() * vocab_size_);
  for (auto r : order) {
    for (std::size_t i = 0; i < width; ++i) contexts.push_back(static_cast<float>((row_keys_[r] >> (16 * i)) & 0xFFFF));
    counts.insert(counts.end(), counts_.begin() + static_cast<std::ptrdiff_t>(r * vocab_size_),
                  counts_.begin() + static_cast<std::ptrdiff_t>((r + 1) * vocab_size_));
  }
  const auto rows = static_cast<std::uint32_t>(order.size());
  ckpt.add_scalar("ngram.order", static_cast<float>(order_));
  ckpt.add_scalar("ngram.kappa", static_cast<float>(kappa_));
  ckpt.add_scalar("ngram.bos", static_cast<float>(bos_));
  ckpt.add("ngram.contexts", {rows, static_cast<std::uint32_t>(width)}, std::move(contexts));
  ckpt.add("ngram.counts", {rows, static_cast<std::uint32_t>(vocab_size_)}, std::move(counts));
}

NgramLM NgramLM::import_from(const Checkpoint& ckpt) {
  NgramLM m(ckpt.vocab.size(), static_cast<int>(ckpt.scalar("ngram.order")), ckpt.scalar("ngram.kappa"),
            static_cast<TokenId>(ckpt.scalar("ngram.bos")));
  const auto& contexts = ckpt.get("ngram.contexts");
  const auto& counts = ckpt.get("ngram.counts");
  const std::size_t width = static_cast<std::size_t>(m.order_ - 1);
  if (contexts.dims.size() != 2 || counts.dims.size() != 2 || contexts.dims[1] != width ||
      counts.dims[1] != m.vocab_size_ || counts.dims[0] != contexts.dims[0])
    throw ConfigError("ngram checkpoint arrays have inconsistent shapes");
  for (std::size_t r = 0; r < counts.dims[0]; ++r) {
    std::uint64_t key = 0;
    for (std::size_t i = 0; i < width; ++i)
      key |= static_cast<std::uint64_t>(contexts.data[r * width + i]) << (16 * i);
    const std::size_t row = m.row_for(key);
    float total = 0.0f;
    for (std::size_t j = 0; j < m.vocab_size_; ++j) {
      m.counts_[row * m.vocab_size_ + j] = counts.data[r * m.vocab_size_ + j];
      total += counts.data[r * m.vocab_size_ + j];
    }
    m.totals_[row] = total;
  }
  return m;
}

bool NgramLM::operator==(const NgramLM& other) const {
  Checkpoint a, b;
  export_to(a);
  other.export_to(b);
  return vocab_size_ == other.vocab_size_ && a == b;
}

// --------------------------------------------------------------- NeuralLM

NeuralLM::NeuralLM(Shape shape, TokenId bos) : shape_(shape), bos_(bos) {
  if (shape.vocab_size == 0 || shape.window == 0 || shape.embed_dim == 0 || shape.hidden == 0)
    throw ConfigError("neural LM dimensions must be positive");
  const auto V = static_cast<std::uint32_t>(shape.vocab_size);
  const auto D = static_cast<std::uint32_t>(shape.embed_dim);
  const auto H = static_cast<std::uint32_t>(shape.hidden);
  const auto W = static_cast<std::uint32_t>(shape.window);
  emb_ = params_.add("lm.emb", {V, D});
  w1_ = params_.add("lm.w1", {H, W * D});
  b1_ = params_.add("lm.b1", {H});
  w2_ = params_.add("lm.w2", {V, H});
  b2_ = params_.add("lm.b2", {V});
}

void NeuralLM::forward(std::span<const TokenId> context, Cache& c) const {
  const std::size_t D = shape_.embed_dim, H = shape_.hidden, V = shape_.vocab_size, W = shape_.window;
  fill_window(context, W, bos_, c.window_ids);
  auto emb = params_.block(emb_);
  auto w1 = params_.block(w1_);
  auto b1 = params_.block(b1_);
  auto w2 = params_.block(w2_);
  auto b2 = params_.block(b2_);
  c.input.resize(W * D);
  for (std::size_t k = 0; k < W; ++k) {
    if (c.window_ids[k] >= V) throw InvalidSampleError("token id out of range in LM context");
    for (std::size_t d = 0; d < D; ++d) c.input[k * D + d] = emb[c.window_ids[k] * D + d];
  }
  c.hidden.resize(H);
  for (std::size_t h = 0; h < H; ++h) {
    double s = b1[h];
    const float* row = w1.data() + h * W * D;
    for (std::size_t i = 0; i < W * D; ++i) s += row[i] * c.input[i];
    c.hidden[h] = std::tanh(s);
  }
  c.logits.resize(V);
  for (std::size_t v = 0; v < V; ++v) {
    double s = b2[v];
    const float* row = w2.data() + v * H;
    for (std::size_t h = 0; h < H; ++h) s += row[h] * c.hidden[h];
    c.logits[v] = s;
  }
}

std::vector<double> NeuralLM::next_token_logits(std::span<const TokenId> context) const {
  Cache c;
  forward(context, c);
  return std::move(c.logits);
}

double NeuralLM::loss_and_gradient(std::span<const TokenId> context, TokenId target, std::span<double> grad) const {
  const std::size_t D = shape_.embed_dim, H = shape_.hidden, V = shape_.vocab_size, W = shape_.window;
  if (target >= V) throw InvalidSampleError("target token out of range");
  Cache c;
  forward(context, c);
  std::vector<double> dlogits = softmax(c.logits);
  const double loss = -std::log(std::max(dlogits[target], 1e-300));
  dlogits[target] -= 1.0;

  auto w1 = params_.block(w1_);
  auto w2 = params_.block(w2_);
  double* g_emb = grad.data() + params_.info(emb_).offset;
  double* g_w1 = grad.data() + params_.info(w1_).offset;
  double* g_b1 = grad.data() + params_.info(b1_).offset;
  double* g_w2 = grad.data() + params_.info(w2_).offset;
  double* g_b2 = grad.data() + params_.info(b2_).offset;

  std::vector<double> dhidden(H, 0.0);
  for (std::size_t v = 0; v < V; ++v) {
    const double g = dlogits[v];
    g_b2[v] += g;
    const float* row = w2.data() + v * H;
    for (std::size_t h = 0; h < H; ++h) {
      g_w2[v * H + h] += g * c.hidden[h];
      dhidden[h] += g * row[h];
    }
  }
  std::vector<double> dinput(W * D, 0.0);
  for (std::size_t h = 0; h < H; ++h) {
    const double dz = dhidden[h] * (1.0 - c.hidden[h] * c.hidden[h]);
    g_b1[h] += dz;
    const float* row = w1.data() + h * W * D;
    for (std::size_t i = 0; i < W * D; ++i) {
      g_w1[h * W * D + i] += dz * c.input[i];
      dinput[i] += dz * row[i];
    }
  }
  for (std::size_t k = 0; k < W; ++k)
    for (std::size_t d = 0; d < D; ++d) g_emb[c.window_ids[k] * D + d] += dinput[k * D + d];
  return loss;
}

void NeuralLM::export_to(Checkpoint& ckpt) const {
  ckpt.add_scalar("lm.window", static_cast<float>(shape_.window));
  ckpt.add_scalar("lm.bos", static_cast<float>(bos_));
  params_.export_to(ckpt);
}

NeuralLM NeuralLM::import_from(const Checkpoint& ckpt) {
  const auto& emb = ckpt.get("lm.emb");
  const auto& w1 = ckpt.get("lm.w1");
  if (emb.dims.size() != 2 || w1.dims.size() != 2) throw ConfigError("neural LM checkpoint has malformed arrays");
  Shape shape;
  shape.vocab_size = ckpt.vocab.size();
  shape.window = static_cast<std::size_t>(ckpt.scalar("lm.window"));
  shape.embed_dim = emb.dims[1];
  shape.hidden = w1.dims[0];
  NeuralLM m(shape, static_cast<TokenId>(ckpt.scalar("lm.bos")));
  m.params_.import_from(ckpt);
  return m;
}

// -------------------------------------------------------- AutoregressiveLM

int AutoregressiveLM::context_order() const {
  if (const auto* n = ngram()) return n->order();
  return static_cast<int>(neural()->shape().window);
}

std::size_t AutoregressiveLM::vocab_size() const {
  return std::visit([](const auto& m) { return m.vocab_size(); }, model_);
}

std::vector<double> AutoregressiveLM::next_token_logits(std::span<const TokenId> context) const {
  return std::visit([&](const auto& m) { return m.next_token_logits(context); }, model_);
}

Checkpoint AutoregressiveLM::to_checkpoint(const Vocabulary& vocab) const {
  if (vocab.size() != vocab_size()) throw ConfigError("vocabulary does not match the language model");
  Checkpoint ckpt;
  ckpt.vocab = vocab.tokens();
  if (const auto* n = ngram()) {
    ckpt.add_scalar("meta.kind", kKindNgram);
    n->export_to(ckpt);
  } else {
    ckpt.add_scalar("meta.kind", kKindNeural);
    neural()->export_to(ckpt);
  }
  return ckpt;
}

AutoregressiveLM AutoregressiveLM::from_checkpoint(const Checkpoint& ckpt) {
  const float kind = ckpt.scalar("meta.kind");
  if (kind == kKindNgram) return AutoregressiveLM(NgramLM::import_from(ckpt));
  if (kind == kKindNeural) return AutoregressiveLM(NeuralLM::import_from(ckpt));
  throw ConfigError("checkpoint does not hold a language model");
}

// ------------------------------------------------------------- train_lm

namespace {

double neural_corpus_loss(const NeuralLM& m, const std::vector<TokenSequence>& corpus, TokenId bos) {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& doc : corpus) {
    const std::size_t start = (!doc.empty() && doc[0] == bos) ? 1 : 0;
    for (std::size_t i = start; i < doc.size(); ++i) {
      const auto lp = log_softmax(m.next_token_logits(std::span(doc).first(i)));
      total -= lp[doc[i]];
      ++n;
    }
  }
  return n ? total / static_cast<double>(n) : 0.0;
}

NeuralLM train_neural(const std::vector<TokenSequence>& corpus, const Vocabulary& vocab, const LmTrainConfig& cfg,
                      LmTrainReport* report) {
  NeuralLM m({vocab.size(), static_cast<std::size_t>(cfg.order), cfg.embed_dim, cfg.hidden}, vocab.bos());
  CounterRng init_rng(derive_key(cfg.seed, {0x4c4d, 1}));
  m.params().init_uniform(init_rng, 0.1f);

  std::vector<std::pair<std::uint32_t, std::uint32_t>> positions;
  for (std::uint32_t d = 0; d < corpus.size(); ++d) {
    const std::size_t start = (!corpus[d].empty() && corpus[d][0] == vocab.bos()) ? 1 : 0;
    for (std::size_t i = start; i < corpus[d].size(); ++i) positions.emplace_back(d, static_cast<std::uint32_t>(i));
  }
  constexpr std::size_t kBatch = 16;
  std::vector<double> grad(m.params().size());
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    CounterRng rng(derive_key(cfg.seed, {0x4c4d, 2, static_cast<std::uint64_t>(epoch)}));
    shuffle(positions, rng);
    for (std::size_t b = 0; b < positions.size(); b += kBatch) {
      const std::size_t e = std::min(positions.size(), b + kBatch);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t k = b; k < e; ++k) {
        const auto& doc = corpus[positions[k].first];
        const std::size_t i = positions[k].second;
        m.loss_and_gradient(std::span(doc).first(i), doc[i], grad);
      }
      sgd_step(m.params(), grad, cfg.lr / static_cast<double>(e - b));
    }
    if (report) report->epoch_loss.push_back(neural_corpus_loss(m, corpus, vocab.bos()));
  }
  return m;
}

}  // namespace

AutoregressiveLM train_lm(const std::vector<TokenSequence>& corpus, const Vocabulary& vocab,
                          const LmTrainConfig& config, LmTrainReport* report) {
  if (corpus.empty()) throw ConfigError("cannot train a language model on an empty corpus");
  for (const auto& doc : corpus) vocab.validate(doc);
  if (config.kind == LmKind::kNgram) {
    NgramLM m(vocab.size(), config.order, config.kappa, vocab.bos());
    for (const auto& doc : corpus) m.add_sequence(doc);
    return AutoregressiveLM(std::move(m));
  }
  if (config.epochs < 1 || !(config.lr > 0.0)) throw ConfigError("neural LM needs epochs >= 1 and lr > 0");
  return AutoregressiveLM(train_neural(corpus, vocab, config, report));
}

std::vector<double> sequence_token_log_probs(const LanguageModel& model, std::span<const TokenId> prefix,
                                             std::span<const TokenId> continuation) {
  if (continuation.empty()) throw InvalidSampleError("continuation must be non-empty");
  std::vector<TokenId> context(prefix.begin(), prefix.end());
  context.reserve(prefix.size() + continuation.size());
  std::vector<double> out;
  out.reserve(continuation.size());
  for (TokenId tok : continuation) {
    if (tok >= model.vocab_size()) throw InvalidSampleError("continuation token out of range");
    const auto lp = log_softmax(model.next_token_logits(context));
    out.push_back(lp[tok]);
    context.push_back(tok);
  }
  return out;
}

}  // namespace zsgen
