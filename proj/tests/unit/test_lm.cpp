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

#include <doctest.h>

#include <cmath>
#include <map>

#include "../support/finite_diff.hpp"
#include "../support/toy_models.hpp"
#include "zsgen/error.hpp"
#include "zsgen/lm.hpp"
#include "zsgen/numeric.hpp"

using namespace zsgen;

namespace {

const Vocabulary kAb = Vocabulary::with_reserved({"a", "b"});

std::vector<TokenSequence> random_corpus(std::size_t docs, std::size_t vocab, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<TokenSequence> corpus;
  for (std::size_t d = 0; d < docs; ++d) {
    TokenSequence s{0};
    const auto len = 2 + rng.below(8);
    for (std::size_t i = 0; i < len; ++i) s.push_back(static_cast<TokenId>(3 + rng.below(vocab - 3)));
    s.push_back(1);
    corpus.push_back(s);
  }
  return corpus;
}

}  // namespace

TEST_CASE("ngram on 'a b a b' prefers b after a") {
  NgramLM m(kAb.size(), 2, 1.0, kAb.bos());
  m.add_sequence(kAb.encode("a b a b"));
  const TokenSequence ctx{kAb.id_of("a")};
  CHECK(argmax(m.next_token_logits(ctx)) == kAb.id_of("b"));
  CHECK(m.count(ctx, kAb.id_of("b")) == 2.0);
}

TEST_CASE("untrained ngram gives uniform logits") {
  NgramLM m(7, 3, 1.0, 0);
  const TokenSequence ctx{4, 5};
  const auto l = m.next_token_logits(ctx);
  for (double x : l) CHECK(x == l[0]);
  const auto p = softmax(l);
  CHECK(p[3] == doctest::Approx(1.0 / 7));
}

TEST_CASE("ngram matches a brute-force count-and-smooth oracle") {
  const std::size_t V = 9;
  const auto corpus = random_corpus(60, V, 5);
  for (int order : {1, 2, 3, 4}) {
    for (double kappa : {1.0, 0.5}) {
      NgramLM m(V, order, kappa, 0);
      for (const auto& d : corpus) m.add_sequence(d);
      // oracle: explicit (context tuple -> counts) table over BOS-padded docs
      std::map<std::vector<TokenId>, std::vector<double>> table;
      auto ctx_of = [&](const TokenSequence& prefix) {
        std::vector<TokenId> c;
        for (int k = 0; k < order - 1; ++k) {
          const auto back = static_cast<std::ptrdiff_t>(prefix.size()) - 1 - k;
          c.push_back(back >= 0 ? prefix[static_cast<std::size_t>(back)] : 0);
        }
        return c;
      };
      for (const auto& d : corpus)
        for (std::size_t i = 1; i < d.size(); ++i) {
          auto& row = table[ctx_of(TokenSequence(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(i)))];
          row.resize(V, 0.0);
          row[d[i]] += 1.0;
        }
      std::size_t compared = 0;
      for (const auto& d : corpus)
        for (std::size_t i = 0; i < d.size(); ++i) {
          const TokenSequence prefix(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(i));
          const auto it = table.find(ctx_of(prefix));
          double total = 0.0;
          std::vector<double> oracle(V);
          for (std::size_t j = 0; j < V; ++j) {
            oracle[j] = (it == table.end() ? 0.0 : it->second[j]) + kappa;
            total += oracle[j];
          }
          const auto p = softmax(m.next_token_logits(prefix));
          for (std::size_t j = 0; j < V; ++j) CHECK(p[j] == doctest::Approx(oracle[j] / total).epsilon(1e-12));
          ++compared;
        }
      CHECK(compared > 300);
    }
  }
}

TEST_CASE("log-softmax of every model sums to one") {
  const std::size_t V = 10;
  const auto corpus = random_corpus(40, V, 8);
  const Vocabulary vocab = Vocabulary::with_reserved({"a", "b", "c", "d", "e", "f", "g"});
  LmTrainConfig ng;
  LmTrainConfig nn;
  nn.kind = LmKind::kNeural;
  nn.epochs = 1;
  const auto m1 = train_lm(corpus, vocab, ng);
  const auto m2 = train_lm(corpus, vocab, nn);
  const testing::TableLM m3(V, 3);
  for (const LanguageModel* m : {static_cast<const LanguageModel*>(&m1), static_cast<const LanguageModel*>(&m2),
                                 static_cast<const LanguageModel*>(&m3)})
    for (const auto& d : corpus) {
      const auto lp = log_softmax(m->next_token_logits(d));
      double s = 0.0;
      for (double x : lp) s += std::exp(x);
      CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("sequence_token_log_probs") {
  SUBCASE("uniform model") {
    NgramLM m(4, 2, 1.0, 0);
    const TokenSequence prefix{0}, cont{3, 2, 1};
    const auto lp = sequence_token_log_probs(m, prefix, cont);
    REQUIRE(lp.size() == 3);
    for (double x : lp) CHECK(x == doctest::Approx(std::log(0.25)).epsilon(1e-12));
  }
  SUBCASE("scripted per-step probabilities") {
    testing::ScriptedLM m(1, {{0.5, 0.25, 0.25}, {0.5, 0.25, 0.25}});
    const TokenSequence prefix{2}, cont{0, 1};
    const auto lp = sequence_token_log_probs(m, prefix, cont);
    CHECK(std::abs(lp[0] + 0.6931) <= 1e-4);
    CHECK(std::abs(lp[1] + 1.3863) <= 1e-4);
  }
  SUBCASE("prompt-sensitive model") {
    const auto vocab = Vocabulary::with_reserved({"P", "N", "x", "y"});
    std::vector<TokenSequence> corpus;
    for (int i = 0; i < 20; ++i) {
      corpus.push_back(vocab.encode("<bos> P x x <eos>"));
      corpus.push_back(vocab.encode("<bos> N y y <eos>"));
    }
    const auto m = train_lm(corpus, vocab, {});
    const TokenSequence bare{vocab.bos()}, prompted = vocab.encode("<bos> P");
    const TokenSequence cont{vocab.id_of("x")};
    CHECK(sequence_token_log_probs(m, bare, cont)[0] != sequence_token_log_probs(m, prompted, cont)[0]);
  }
  SUBCASE("errors") {
    NgramLM m(4, 2, 1.0, 0);
    const TokenSequence prefix{0}, bad{7};
    CHECK_THROWS_AS(sequence_token_log_probs(m, prefix, TokenSequence{}), InvalidSampleError);
    CHECK_THROWS_AS(sequence_token_log_probs(m, prefix, bad), InvalidSampleError);
  }
}

TEST_CASE("train_lm") {
  const auto vocab = Vocabulary::with_reserved({"a", "b", "c", "d"});
  SUBCASE("empty corpus is a config error") { CHECK_THROWS_AS(train_lm({}, vocab, {}), ConfigError); }
  SUBCASE("repeated sequence is regenerated greedily") {
    const auto doc = vocab.encode("<bos> a c b d a <eos>");
    const auto m = train_lm(std::vector<TokenSequence>(5, doc), vocab, {});
    TokenSequence ctx{vocab.bos()};
    while (ctx.back() != vocab.eos() && ctx.size() < 20) ctx.push_back(static_cast<TokenId>(argmax(m.next_token_logits(ctx))));
    CHECK(ctx == doc);
  }
  SUBCASE("unseen context is uniform") {
    const auto m = train_lm({vocab.encode("<bos> a b <eos>")}, vocab, {});
    const TokenSequence unseen{vocab.id_of("d"), vocab.id_of("d")};
    const auto p = softmax(m.next_token_logits(unseen));
    for (double x : p) CHECK(x == doctest::Approx(1.0 / vocab.size()));
  }
  SUBCASE("neural training is bit-identical for a fixed seed and lowers loss") {
    const auto corpus = random_corpus(50, vocab.size(), 2);
    LmTrainConfig cfg;
    cfg.kind = LmKind::kNeural;
    cfg.epochs = 4;
    cfg.seed = 11;
    LmTrainReport r1, r2;
    const auto a = train_lm(corpus, vocab, cfg, &r1);
    const auto b = train_lm(corpus, vocab, cfg, &r2);
    CHECK(a.neural()->params() == b.neural()->params());
    CHECK(r1.epoch_loss == r2.epoch_loss);
    CHECK(r1.epoch_loss.back() < r1.epoch_loss.front());
    cfg.seed = 12;
    CHECK(!(train_lm(corpus, vocab, cfg).neural()->params() == a.neural()->params()));
  }
}

TEST_CASE("neural LM inference is pure and truncates long contexts") {
  NeuralLM m({.vocab_size = 8, .window = 3, .embed_dim = 4, .hidden = 5}, 0);
  CounterRng rng(1);
  m.params().init_uniform(rng, 0.5f);
  const TokenSequence ctx{3, 4, 5, 6, 7};
  const TokenSequence tail{5, 6, 7};
  CHECK(m.next_token_logits(ctx) == m.next_token_logits(ctx));
  CHECK(m.next_token_logits(ctx) == m.next_token_logits(tail));
  const TokenSequence short_ctx{7};
  const TokenSequence padded{0, 0, 7};
  CHECK(m.next_token_logits(short_ctx) == m.next_token_logits(padded));
}

TEST_CASE("neural LM gradient matches finite differences") {
  NeuralLM m({.vocab_size = 9, .window = 3, .embed_dim = 4, .hidden = 6}, 0);
  CounterRng rng(4);
  m.params().init_uniform(rng, 0.5f);
  const TokenSequence ctx{3, 8, 5, 4};
  const TokenId target = 6;
  std::vector<double> grad(m.params().size(), 0.0);
  m.loss_and_gradient(ctx, target, grad);
  auto f = [&] {
    std::vector<double> scratch(m.params().size(), 0.0);
    return m.loss_and_gradient(ctx, target, scratch);
  };
  CHECK(testing::max_relative_fd_error(m.params().values(), grad, f, 40, 17) < 1e-4);
}

TEST_CASE("LM checkpoints round trip") {
  const auto vocab = Vocabulary::with_reserved({"a", "b", "c", "d"});
  const auto corpus = random_corpus(30, vocab.size(), 6);
  for (auto kind : {LmKind::kNgram, LmKind::kNeural}) {
    LmTrainConfig cfg;
    cfg.kind = kind;
    cfg.epochs = 1;
    const auto m = train_lm(corpus, vocab, cfg);
    const auto bytes = serialize_checkpoint(m.to_checkpoint(vocab));
    const auto back = AutoregressiveLM::from_checkpoint(deserialize_checkpoint(bytes));
    CHECK(back.kind() == kind);
    CHECK(serialize_checkpoint(back.to_checkpoint(vocab)) == bytes);
    for (const auto& d : corpus) CHECK(back.next_token_logits(d) == m.next_token_logits(d));
  }
}
