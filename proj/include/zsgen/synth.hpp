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
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "zsgen/prompts.hpp"
#include "zsgen/sample.hpp"
#include "zsgen/vocab.hpp"

namespace zsgen {

TaskType parse_task_type(std::string_view name);
std::string_view to_string(TaskType type);

/// Generative description of a synthetic classification task.
///
/// single: each class owns `words_per_class` words. A class-y document draws
///   i.i.d. tokens: own words with total mass 1 - shared_mass - leak_mass,
///   every other class's words with leak_mass split evenly, shared words
///   with shared_mass. Corpus documents are [BOS, marker, tokens, EOS] with
///   the marker replaced by a wrong class with probability `noise`.
/// pair: first sequences are distinct content words; the label-0 second
///   sequence takes a uniform count in [ceil(min_overlap * L), L] of its
///   tokens from the first,
///   the label-1 second sequence avoids them entirely. Corpus documents
///   are [BOS, x_s, marker, x_g, EOS].
/// temperature_contrast: a sparse first-order chain over content words
///   (`successors` allowed next words each) defines acceptable sequences;
///   unacceptable ones are uniform random. Documents start with a stop word.
///   `noise` is the fraction of corpus documents replaced by random ones.
struct SyntheticTaskSpec {
  TaskType task_type = TaskType::kSingle;
  std::size_t num_labels = 2;
  std::size_t words_per_class = 12;
  std::size_t shared_words = 12;
  double shared_mass = 0.2;
  double leak_mass = 0.0;
  std::size_t content_words = 30;
  double min_overlap = 0.6;
  std::size_t stop_words = 6;
  std::size_t successors = 3;
  std::size_t min_len = 4;
  std::size_t max_len = 10;
  double noise = 0.0;
  std::size_t corpus_size = 20000;
  std::size_t eval_size = 4000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticTask {
  SyntheticTaskSpec spec;
  Vocabulary vocab;
  std::vector<TokenSequence> corpus;           // pretraining documents
  std::vector<TokenSequence> first_sequences;  // pair: the x_s population D
  std::vector<PromptTemplate> templates;       // default prompt per label
  std::vector<GeneratedSample> eval;           // gold labels, no markers
  std::vector<TokenId> label_markers;
  std::vector<TokenId> seed_tokens;            // temperature contrast stop words
  std::vector<std::vector<TokenId>> successors;  // temperature contrast chain, by content word
  double bayes_accuracy = 0.0;
  std::vector<std::string> warnings;

  /// Token probabilities of class `label` (single tasks), for oracles.
  std::vector<double> class_distribution(std::size_t label) const;
};

/// Pure function of `spec`, including its seed.
SyntheticTask make_task(const SyntheticTaskSpec& spec);

/// `count` gold samples (labels cycling 0..|Y|-1) drawn from the task's
/// class-conditional distributions; sample i uses stream derive_key(key, {i}).
std::vector<GeneratedSample> draw_gold_samples(const SyntheticTask& task, std::size_t count, std::uint64_t key);

/// Closed-form Bayes accuracy of the single-sequence task.
double single_task_bayes_accuracy(const SyntheticTaskSpec& spec);

// ---------------------------------------------------------------- metrics

double accuracy(std::span<const std::size_t> predictions, std::span<const std::size_t> gold);
/// F1 of label 1 as the positive class.
double f1_score(std::span<const std::size_t> predictions, std::span<const std::size_t> gold);
/// Binary Matthews correlation; 0 when the denominator vanishes.
double matthews(std::span<const std::size_t> predictions, std::span<const std::size_t> gold);
double compute_metric(std::string_view metric, std::span<const std::size_t> predictions,
                      std::span<const std::size_t> gold);

struct EvalResult {
  std::string metric;
  std::vector<std::uint64_t> seeds;
  std::vector<double> per_seed;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation
};

EvalResult summarize(std::string metric, std::vector<std::uint64_t> seeds, std::vector<double> values);
EvalResult run_seeds(const std::function<double(std::uint64_t)>& experiment, std::span<const std::uint64_t> seeds,
                     std::string metric = "accuracy");

inline const std::vector<std::uint64_t> kDefaultSeeds{1, 2, 3, 4, 5};

}  // namespace zsgen
