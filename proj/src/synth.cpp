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

#include "zsgen/synth.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "zsgen/error.hpp"
#include "zsgen/rng.hpp"

namespace zsgen {
namespace {

constexpr std::uint64_t kCorpusTag = 0x434f52;
constexpr std::uint64_t kEvalTag = 0x45564c;
constexpr std::uint64_t kGrammarTag = 0x47524d;

std::string marker_name(std::size_t y) { return "<y" + std::to_string(y) + ">"; }

std::size_t draw_length(const SyntheticTaskSpec& s, CounterRng& rng) {
  return s.min_len + static_cast<std::size_t>(rng.below(s.max_len - s.min_len + 1));
}

// Token ids for the single task layout.
struct SingleLayout {
  std::size_t first_class_word;
  std::size_t first_shared_word;
  std::size_t K, S, Y;

  TokenId class_word(std::size_t y, std::size_t k) const {
    return static_cast<TokenId>(first_class_word + y * K + k);
  }
  TokenId shared_word(std::size_t k) const { return static_cast<TokenId>(first_shared_word + k); }
};

TokenId draw_single_token(const SyntheticTaskSpec& s, const SingleLayout& lay, std::size_t y, CounterRng& rng) {
  const double own = 1.0 - s.shared_mass - s.leak_mass;
  const double u = rng.uniform();
  if (u < own) return lay.class_word(y, rng.below(lay.K));
  if (u < own + s.leak_mass) {
    std::size_t other = rng.below(lay.Y - 1);
    if (other >= y) ++other;
    return lay.class_word(other, rng.below(lay.K));
  }
  if (lay.S == 0) return lay.class_word(y, rng.below(lay.K));
  return lay.shared_word(rng.below(lay.S));
}

// Distinct content words drawn from [0, n) excluding `avoid`.
std::vector<std::size_t> draw_distinct(std::size_t n, std::size_t count, const std::vector<char>& avoid,
                                       CounterRng& rng) {
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < n; ++i)
    if (!avoid[i]) pool.push_back(i);
  for (std::size_t i = 0; i < count; ++i) std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
  pool.resize(count);
  return pool;
}

void enumerate_counts(std::size_t groups, std::size_t total, std::vector<std::size_t>& counts,
                      const std::function<void(const std::vector<std::size_t>&)>& visit, std::size_t g = 0) {
  if (g + 1 == groups) {
    counts[g] = total;
    visit(counts);
    return;
  }
  for (std::size_t n = 0; n <= total; ++n) {
    counts[g] = n;
    enumerate_counts(groups, total - n, counts, visit, g + 1);
  }
}

double log_multinomial(const std::vector<std::size_t>& counts) {
  std::size_t total = 0;
  double r = 0.0;
  for (auto c : counts) {
    total += c;
    r -= std::lgamma(static_cast<double>(c) + 1.0);
  }
  return r + std::lgamma(static_cast<double>(total) + 1.0);
}

}  // namespace

TaskType parse_task_type(std::string_view name) {
  if (name == "single") return TaskType::kSingle;
  if (name == "pair") return TaskType::kPair;
  if (name == "temperature_contrast") return TaskType::kTemperatureContrast;
  throw ConfigError("unknown task type '" + std::string(name) + "'");
}

std::string_view to_string(TaskType type) {
  switch (type) {
    case TaskType::kSingle:
      return "single";
    case TaskType::kPair:
      return "pair";
    case TaskType::kTemperatureContrast:
      return "temperature_contrast";
  }
  return "?";
}

void SyntheticTaskSpec::validate() const {
  if (num_labels < 2 || num_labels > 4) throw ConfigError("task.num_labels must be in [2, 4]");
  if (task_type != TaskType::kSingle && num_labels != 2) throw ConfigError("pair and contrast tasks have two labels");
  if (min_len < 1 || max_len < min_len) throw ConfigError("task.min_len/max_len must satisfy 1 <= min <= max");
  if (!(noise >= 0.0 && noise < 0.5)) throw ConfigError("task.noise must be in [0, 0.5)");
  if (corpus_size < 1 || eval_size < 1) throw ConfigError("task.corpus_size and task.eval_size must be positive");
  switch (task_type) {
    case TaskType::kSingle:
      if (words_per_class < 1) throw ConfigError("task.words_per_class must be positive");
      if (!(shared_mass >= 0.0 && leak_mass >= 0.0 && shared_mass + leak_mass <= 1.0))
        throw ConfigError("task.shared_mass and task.leak_mass must be non-negative and sum to at most 1");
      if (shared_mass > 0.0 && shared_words == 0) throw ConfigError("task.shared_mass > 0 needs shared_words > 0");
      break;
    case TaskType::kPair:
      if (!(min_overlap > 0.0 && min_overlap <= 1.0)) throw ConfigError("task.min_overlap must be in (0, 1]");
      if (content_words < 2 * max_len) throw ConfigError("task.content_words must be at least 2 * max_len");
      break;
    case TaskType::kTemperatureContrast:
      if (stop_words < 1) throw ConfigError("task.stop_words must be positive");
      if (successors < 1 || successors > content_words) throw ConfigError("task.successors must be in [1, content_words]");
      break;
  }
}

double single_task_bayes_accuracy(const SyntheticTaskSpec& s) {
  const std::size_t Y = s.num_labels;
  const double own = 1.0 - s.shared_mass - s.leak_mass;
  const double other = s.leak_mass / static_cast<double>(Y - 1);
  if (std::abs(own - other) < 1e-12) return 1.0 / static_cast<double>(Y);

  const auto K = static_cast<double>(s.words_per_class);
  const auto S = static_cast<double>(s.shared_words);
  // Groups 0..Y-1 are class word groups, Y is the shared group. Class 0 is
  // the true class; the task is symmetric in labels.
  std::vector<double> group_mass(Y + 1, other);
  group_mass[0] = own;
  group_mass[Y] = s.shared_mass;
  auto log_or_ninf = [](double p) { return p > 0.0 ? std::log(p) : -INFINITY; };
  const double log_own_word = log_or_ninf(own / K);
  const double log_other_word = log_or_ninf(other / K);
  const double log_shared_word = S > 0 ? log_or_ninf(s.shared_mass / S) : -INFINITY;

  double err = 0.0;
  const auto lengths = static_cast<double>(s.max_len - s.min_len + 1);
  std::vector<std::size_t> counts(Y + 1);
  for (std::size_t L = s.min_len; L <= s.max_len; ++L) {
    enumerate_counts(Y + 1, L, counts, [&](const std::vector<std::size_t>& n) {
      double log_p = log_multinomial(n);
      for (std::size_t g = 0; g <= Y; ++g) {
        if (n[g] == 0) continue;
        if (group_mass[g] <= 0.0) return;
        log_p += static_cast<double>(n[g]) * std::log(group_mass[g]);
      }
      // Class log-likelihoods of this count vector (word-level probabilities).
      std::vector<double> ll(Y, 0.0);
      for (std::size_t y = 0; y < Y; ++y) {
        for (std::size_t g = 0; g < Y; ++g)
          if (n[g] > 0) ll[y] += static_cast<double>(n[g]) * (g == y ? log_own_word : log_other_word);
        if (n[Y] > 0) ll[y] += static_cast<double>(n[Y]) * log_shared_word;
      }
      const double best = *std::max_element(ll.begin(), ll.end());
      std::size_t ties = 0;
      for (double v : ll)
        if (v == best || std::abs(v - best) < 1e-9) ++ties;
      const bool wins = ll[0] == best || std::abs(ll[0] - best) < 1e-9;
      const double lost = wins ? 1.0 - 1.0 / static_cast<double>(ties) : 1.0;
      if (lost > 0.0) err += std::exp(log_p) * lost / lengths;
    });
  }
  return 1.0 - err;
}

std::vector<double> SyntheticTask::class_distribution(std::size_t label) const {
  if (spec.task_type != TaskType::kSingle) throw ConfigError("class distributions exist for single tasks only");
  const std::size_t Y = spec.num_labels, K = spec.words_per_class, S = spec.shared_words;
  const std::size_t first_class = 3 + Y;
  std::vector<double> p(vocab.size(), 0.0);
  const double own = 1.0 - spec.shared_mass - spec.leak_mass;
  for (std::size_t y = 0; y < Y; ++y)
    for (std::size_t k = 0; k < K; ++k)
      p[first_class + y * K + k] =
          (y == label ? own : spec.leak_mass / static_cast<double>(Y - 1)) / static_cast<double>(K);
  for (std::size_t k = 0; k < S; ++k) p[first_class + Y * K + k] = spec.shared_mass / static_cast<double>(S);
  if (S == 0)
    for (std::size_t k = 0; k < K; ++k) p[first_class + label * K + k] += spec.shared_mass / static_cast<double>(K);
  return p;
}

namespace {

TokenSequence draw_single_doc(const SyntheticTask& task, std::size_t y, CounterRng& rng) {
  const auto& spec = task.spec;
  const std::size_t Y = spec.num_labels;
  const SingleLayout lay{3 + Y, 3 + Y + Y * spec.words_per_class, spec.words_per_class, spec.shared_words, Y};
  TokenSequence seq;
  const std::size_t L = draw_length(spec, rng);
  for (std::size_t i = 0; i < L; ++i) seq.push_back(draw_single_token(spec, lay, y, rng));
  return seq;
}

constexpr std::size_t kPairFirstContent = 5;

void draw_pair_docs(const SyntheticTask& task, std::size_t y, CounterRng& rng, TokenSequence& xs, TokenSequence& xg) {
  const auto& spec = task.spec;
  const std::size_t C = spec.content_words;
  std::vector<char> none(C, 0);
  const auto first = draw_distinct(C, draw_length(spec, rng), none, rng);
  std::vector<char> in_first(C, 0);
  xs.clear();
  for (auto w : first) {
    in_first[w] = 1;
    xs.push_back(static_cast<TokenId>(kPairFirstContent + w));
  }
  const std::size_t L2 = draw_length(spec, rng);
  std::size_t overlap = 0;
  if (y == 0) {
    const auto least = static_cast<std::size_t>(std::ceil(spec.min_overlap * static_cast<double>(L2) - 1e-12));
    overlap = least + rng.below(L2 - least + 1);
  }
  xg.clear();
  for (std::size_t i = 0; i < overlap; ++i) xg.push_back(xs[rng.below(xs.size())]);
  const auto fresh = draw_distinct(C, L2 - overlap, in_first, rng);
  for (auto w : fresh) xg.push_back(static_cast<TokenId>(kPairFirstContent + w));
  shuffle(xg, rng);
}

TokenSequence draw_contrast_seq(const SyntheticTask& task, bool grammatical, CounterRng& rng) {
  const auto& spec = task.spec;
  const TokenId first_content = static_cast<TokenId>(3 + spec.stop_words);
  TokenSequence seq{task.seed_tokens[rng.below(task.seed_tokens.size())]};
  const std::size_t L = draw_length(spec, rng);
  TokenId w = first_content + static_cast<TokenId>(rng.below(spec.content_words));
  for (std::size_t i = 0; i < L; ++i) {
    if (i > 0) {
      const auto& next = task.successors[w - first_content];
      w = grammatical ? next[rng.below(next.size())]
                      : first_content + static_cast<TokenId>(rng.below(spec.content_words));
    }
    seq.push_back(w);
  }
  return seq;
}

}  // namespace

std::vector<GeneratedSample> draw_gold_samples(const SyntheticTask& task, std::size_t count, std::uint64_t key) {
  const std::size_t Y = task.spec.num_labels;
  std::vector<GeneratedSample> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    CounterRng rng(derive_key(key, {i}));
    GeneratedSample& s = out[i];
    s.id = i;
    s.label = i % Y;
    switch (task.spec.task_type) {
      case TaskType::kSingle:
        s.x_g = draw_single_doc(task, s.label, rng);
        break;
      case TaskType::kPair: {
        TokenSequence xs;
        draw_pair_docs(task, s.label, rng, xs, s.x_g);
        s.x_s = std::move(xs);
        break;
      }
      case TaskType::kTemperatureContrast:
        s.x_g = draw_contrast_seq(task, s.label == 0, rng);
        break;
    }
  }
  return out;
}

SyntheticTask make_task(const SyntheticTaskSpec& spec) {
  spec.validate();
  SyntheticTask task;
  task.spec = spec;
  const std::size_t Y = spec.num_labels;
  auto wrong_marker = [&](std::size_t y, CounterRng& rng) {
    if (!rng.bernoulli(spec.noise)) return y;
    std::size_t other = rng.below(Y - 1);
    return other >= y ? other + 1 : other;
  };

  if (spec.task_type == TaskType::kSingle) {
    std::vector<std::string> words;
    for (std::size_t y = 0; y < Y; ++y) words.push_back(marker_name(y));
    for (std::size_t y = 0; y < Y; ++y)
      for (std::size_t k = 0; k < spec.words_per_class; ++k)
        words.push_back("c" + std::to_string(y) + "_" + std::to_string(k));
    for (std::size_t k = 0; k < spec.shared_words; ++k) words.push_back("s_" + std::to_string(k));
    task.vocab = Vocabulary::with_reserved(words);
    for (std::size_t y = 0; y < Y; ++y) task.label_markers.push_back(static_cast<TokenId>(3 + y));

    task.corpus.resize(spec.corpus_size);
    for (std::size_t i = 0; i < spec.corpus_size; ++i) {
      CounterRng rng(derive_key(spec.seed, {kCorpusTag, i}));
      const std::size_t y = rng.below(Y);
      TokenSequence doc{task.vocab.bos(), task.label_markers[wrong_marker(y, rng)]};
      const auto body = draw_single_doc(task, y, rng);
      doc.insert(doc.end(), body.begin(), body.end());
      doc.push_back(task.vocab.eos());
      task.corpus[i] = std::move(doc);
    }
    for (std::size_t y = 0; y < Y; ++y)
      task.templates.push_back(PromptTemplate{y, {marker_name(y)}, TaskType::kSingle, {}, {}});
    const double own = 1.0 - spec.shared_mass - spec.leak_mass;
    if (std::abs(own - spec.leak_mass / static_cast<double>(Y - 1)) < 1e-12)
      task.warnings.push_back("class distributions are identical; Bayes accuracy is chance");
    task.bayes_accuracy = single_task_bayes_accuracy(spec);
  } else if (spec.task_type == TaskType::kPair) {
    std::vector<std::string> words{marker_name(0), marker_name(1)};
    for (std::size_t k = 0; k < spec.content_words; ++k) words.push_back("w" + std::to_string(k));
    task.vocab = Vocabulary::with_reserved(words);
    task.label_markers = {3, 4};

    task.corpus.resize(spec.corpus_size);
    task.first_sequences.resize(spec.corpus_size);
    for (std::size_t i = 0; i < spec.corpus_size; ++i) {
      CounterRng rng(derive_key(spec.seed, {kCorpusTag, i}));
      const std::size_t y = rng.below(2);
      const std::size_t shown = wrong_marker(y, rng);
      TokenSequence xs, xg;
      draw_pair_docs(task, y, rng, xs, xg);
      TokenSequence doc{task.vocab.bos()};
      doc.insert(doc.end(), xs.begin(), xs.end());
      doc.push_back(task.label_markers[shown]);
      doc.insert(doc.end(), xg.begin(), xg.end());
      doc.push_back(task.vocab.eos());
      task.corpus[i] = std::move(doc);
      task.first_sequences[i] = std::move(xs);
    }
    for (std::size_t y = 0; y < 2; ++y)
      task.templates.push_back(PromptTemplate{y, {"{XS}", marker_name(y)}, TaskType::kPair, {}, {}});
    // Label-0 second sequences always overlap the first, label-1 never do.
    task.bayes_accuracy = 1.0;
  } else {
    std::vector<std::string> words;
    for (std::size_t k = 0; k < spec.stop_words; ++k) words.push_back("stop" + std::to_string(k));
    for (std::size_t k = 0; k < spec.content_words; ++k) words.push_back("w" + std::to_string(k));
    task.vocab = Vocabulary::with_reserved(words);
    for (std::size_t k = 0; k < spec.stop_words; ++k) task.seed_tokens.push_back(static_cast<TokenId>(3 + k));
    const std::size_t first_content = 3 + spec.stop_words;
    const std::size_t C = spec.content_words;
    {
      CounterRng rng(derive_key(spec.seed, {kGrammarTag}));
      std::vector<char> none(C, 0);
      task.successors.resize(C);
      for (auto& next : task.successors)
        for (auto w : draw_distinct(C, spec.successors, none, rng))
          next.push_back(static_cast<TokenId>(first_content + w));
    }
    task.corpus.resize(spec.corpus_size);
    for (std::size_t i = 0; i < spec.corpus_size; ++i) {
      CounterRng rng(derive_key(spec.seed, {kCorpusTag, i}));
      const bool corrupted = rng.bernoulli(spec.noise);
      TokenSequence doc{task.vocab.bos()};
      const auto body = draw_contrast_seq(task, !corrupted, rng);
      doc.insert(doc.end(), body.begin(), body.end());
      doc.push_back(task.vocab.eos());
      task.corpus[i] = std::move(doc);
    }
    for (std::size_t y = 0; y < 2; ++y)
      task.templates.push_back(PromptTemplate{y, {}, TaskType::kTemperatureContrast, {}, {}});
    if (spec.successors == C) {
      task.warnings.push_back("every transition is allowed; acceptable and random sequences coincide");
      task.bayes_accuracy = 0.5;
    } else {
      // A uniform sequence is grammatical with probability (m/C)^(L-1); only
      // those are misclassified, and only half of the eval set is uniform.
      const double ratio = static_cast<double>(spec.successors) / static_cast<double>(C);
      double err = 0.0;
      for (std::size_t L = spec.min_len; L <= spec.max_len; ++L) err += std::pow(ratio, static_cast<double>(L - 1));
      err /= static_cast<double>(spec.max_len - spec.min_len + 1);
      task.bayes_accuracy = 1.0 - 0.5 * err;
    }
  }
  task.eval = draw_gold_samples(task, spec.eval_size, derive_key(spec.seed, {kEvalTag}));
  return task;
}

// ---------------------------------------------------------------- metrics

namespace {

struct Confusion {
  double tp = 0, fp = 0, fn = 0, tn = 0;
};

void check_lists(std::span<const std::size_t> p, std::span<const std::size_t> g) {
  if (p.empty()) throw ConfigError("metric inputs are empty");
  if (p.size() != g.size()) throw ConfigError("prediction and gold lists differ in length");
}

Confusion binary_confusion(std::span<const std::size_t> p, std::span<const std::size_t> g) {
  check_lists(p, g);
  Confusion c;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 1 || g[i] > 1) throw ConfigError("F1 and Matthews correlation need binary labels");
    if (p[i] == 1 && g[i] == 1) c.tp += 1;
    else if (p[i] == 1) c.fp += 1;
    else if (g[i] == 1) c.fn += 1;
    else c.tn += 1;
  }
  return c;
}

}  // namespace

double accuracy(std::span<const std::size_t> predictions, std::span<const std::size_t> gold) {
  check_lists(predictions, gold);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) hit += predictions[i] == gold[i];
  return static_cast<double>(hit) / static_cast<double>(gold.size());
}

double f1_score(std::span<const std::size_t> predictions, std::span<const std::size_t> gold) {
  const auto c = binary_confusion(predictions, gold);
  const double denom = 2 * c.tp + c.fp + c.fn;
  return denom == 0 ? 0.0 : 2 * c.tp / denom;
}

double matthews(std::span<const std::size_t> predictions, std::span<const std::size_t> gold) {
  const auto c = binary_confusion(predictions, gold);
  const double denom = (c.tp + c.fp) * (c.tp + c.fn) * (c.tn + c.fp) * (c.tn + c.fn);
  if (denom == 0) return 0.0;
  return (c.tp * c.tn - c.fp * c.fn) / std::sqrt(denom);
}

double compute_metric(std::string_view metric, std::span<const std::size_t> predictions,
                      std::span<const std::size_t> gold) {
  if (metric == "accuracy") return accuracy(predictions, gold);
  if (metric == "f1") return f1_score(predictions, gold);
  if (metric == "matthews") return matthews(predictions, gold);
  throw ConfigError("unknown metric '" + std::string(metric) + "'");
}

EvalResult summarize(std::string metric, std::vector<std::uint64_t> seeds, std::vector<double> values) {
  if (values.size() < 2) throw ConfigError("multi-seed summaries need at least two seeds");
  EvalResult r{std::move(metric), std::move(seeds), std::move(values), 0.0, 0.0};
  // Welford: identical values give exactly zero spread
  double ss = 0.0;
  std::size_t k = 0;
  for (double v : r.per_seed) {
    const double d = v - r.mean;
    r.mean += d / static_cast<double>(++k);
    ss += d * (v - r.mean);
  }
  r.stddev = std::sqrt(ss / static_cast<double>(k - 1));
  return r;
}

EvalResult run_seeds(const std::function<double(std::uint64_t)>& experiment, std::span<const std::uint64_t> seeds,
                     std::string metric) {
  if (seeds.size() < 2) throw ConfigError("run_seeds needs at least two seeds");
  std::vector<double> values;
  for (auto s : seeds) values.push_back(experiment(s));
  return summarize(std::move(metric), {seeds.begin(), seeds.end()}, std::move(values));
}

}  // namespace zsgen
