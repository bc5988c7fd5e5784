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
#include <set>

#include "zsgen/error.hpp"
#include "zsgen/synth.hpp"

using namespace zsgen;

namespace {

// Bayes decisions straight from the class-conditional token distributions;
// ties count 1/|Y|.
double bayes_score(const SyntheticTask& task, const TokenSequence& doc, std::size_t gold) {
  const std::size_t Y = task.spec.num_labels;
  std::vector<double> ll(Y, 0.0);
  for (std::size_t y = 0; y < Y; ++y) {
    const auto p = task.class_distribution(y);
    for (TokenId t : doc) ll[y] += p[t] > 0 ? std::log(p[t]) : -1e300;
  }
  double best = ll[0];
  for (double v : ll) best = std::max(best, v);
  std::size_t ties = 0;
  for (double v : ll) ties += std::abs(v - best) < 1e-9;
  return std::abs(ll[gold] - best) < 1e-9 ? 1.0 / static_cast<double>(ties) : 0.0;
}

// Documents drawn in the test from the class distributions, independent of
// the task's own sampler.
double monte_carlo_bayes(const SyntheticTask& task, std::size_t n, std::uint64_t seed) {
  const std::size_t Y = task.spec.num_labels;
  std::vector<std::vector<double>> cdf(Y);
  for (std::size_t y = 0; y < Y; ++y) {
    double c = 0;
    for (double p : task.class_distribution(y)) cdf[y].push_back(c += p);
  }
  CounterRng rng(seed);
  double acc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t y = i % Y;
    const std::size_t L = task.spec.min_len + rng.below(task.spec.max_len - task.spec.min_len + 1);
    TokenSequence doc;
    for (std::size_t k = 0; k < L; ++k) {
      const double u = rng.uniform() * cdf[y].back();
      doc.push_back(static_cast<TokenId>(std::lower_bound(cdf[y].begin(), cdf[y].end(), u) - cdf[y].begin()));
    }
    acc += bayes_score(task, doc, y);
  }
  return acc / static_cast<double>(n);
}

SyntheticTaskSpec single_spec(double shared, double leak, double noise = 0.0) {
  SyntheticTaskSpec s;
  s.shared_mass = shared;
  s.leak_mass = leak;
  s.noise = noise;
  s.corpus_size = 500;
  s.eval_size = 2000;
  s.seed = 4;
  return s;
}

}  // namespace

TEST_CASE("disjoint class vocabularies are separable") {
  const auto task = make_task(single_spec(0.0, 0.0));
  CHECK(task.bayes_accuracy == 1.0);
  CHECK(task.warnings.empty());
}

TEST_CASE("closed-form Bayes accuracy agrees with a Monte-Carlo oracle") {
  for (auto [shared, leak] : {std::pair{0.2, 0.0}, std::pair{0.2, 0.2}, std::pair{0.5, 0.1}}) {
    const auto task = make_task(single_spec(shared, leak));
    const double mc = monte_carlo_bayes(task, 100000, 11);
    CAPTURE(shared);
    CAPTURE(leak);
    CHECK(std::abs(mc - task.bayes_accuracy) < 0.005);
  }
  auto three = single_spec(0.2, 0.3);
  three.num_labels = 3;
  const auto task = make_task(three);
  CHECK(std::abs(monte_carlo_bayes(task, 100000, 12) - task.bayes_accuracy) < 0.005);
}

TEST_CASE("the Bayes classifier reaches bayes_accuracy on the eval set") {
  const auto task = make_task(single_spec(0.2, 0.0, 0.1));
  double acc = 0;
  for (const auto& s : task.eval) acc += bayes_score(task, s.x_g, s.label);
  CHECK(std::abs(acc / static_cast<double>(task.eval.size()) - task.bayes_accuracy) < 0.01);
}

TEST_CASE("identical class distributions warn and give chance") {
  const auto task = make_task(single_spec(0.2, 0.4));
  CHECK(task.bayes_accuracy == doctest::Approx(0.5));
  CHECK(!task.warnings.empty());
}

TEST_CASE("make_task is a pure function of its settings") {
  for (auto type : {TaskType::kSingle, TaskType::kPair, TaskType::kTemperatureContrast}) {
    auto spec = single_spec(0.2, 0.1, 0.1);
    spec.task_type = type;
    const auto a = make_task(spec), b = make_task(spec);
    CHECK(a.corpus == b.corpus);
    CHECK(a.eval == b.eval);
    CHECK(a.vocab == b.vocab);
    CHECK(a.first_sequences == b.first_sequences);
    CHECK(a.successors == b.successors);
    spec.seed = 5;
    CHECK(make_task(spec).corpus != a.corpus);
  }
}

TEST_CASE("single task corpus layout and marker noise") {
  const auto task = make_task(single_spec(0.2, 0.0, 0.25));
  std::size_t wrong = 0;
  for (const auto& doc : task.corpus) {
    REQUIRE(doc.size() >= 4);
    CHECK(doc.front() == task.vocab.bos());
    CHECK(doc.back() == task.vocab.eos());
    const std::size_t shown = doc[1] - task.label_markers[0];
    REQUIRE(shown < 2);
    // the body's own-class words reveal the true class
    std::size_t votes[2] = {0, 0};
    for (std::size_t i = 2; i + 1 < doc.size(); ++i) {
      const auto& name = task.vocab.token(doc[i]);
      if (name[0] == 'c') ++votes[name[1] - '0'];
    }
    if (votes[0] != votes[1]) wrong += (votes[1] > votes[0] ? 1u : 0u) != shown;
  }
  CHECK(std::abs(static_cast<double>(wrong) / static_cast<double>(task.corpus.size()) - 0.25) < 0.05);
  for (const auto& s : task.eval) {
    CHECK(!s.x_s);
    for (TokenId t : s.x_g) CHECK(t >= 3 + task.spec.num_labels);
  }
}

TEST_CASE("pair task overlap structure") {
  auto spec = single_spec(0, 0);
  spec.task_type = TaskType::kPair;
  const auto task = make_task(spec);
  CHECK(task.bayes_accuracy == 1.0);
  for (const auto& s : task.eval) {
    REQUIRE(s.x_s);
    const std::set<TokenId> first(s.x_s->begin(), s.x_s->end());
    CHECK(first.size() == s.x_s->size());
    std::size_t shared = 0;
    for (TokenId t : s.x_g) shared += first.count(t);
    if (s.label == 0)
      CHECK(static_cast<double>(shared) >= std::ceil(spec.min_overlap * static_cast<double>(s.x_g.size())) - 1e-9);
    else
      CHECK(shared == 0);
  }
}

TEST_CASE("temperature contrast task follows its chain") {
  auto spec = single_spec(0, 0);
  spec.task_type = TaskType::kTemperatureContrast;
  spec.successors = 3;
  const auto task = make_task(spec);
  const std::size_t first_content = 3 + spec.stop_words;
  auto grammatical = [&](const TokenSequence& x) {
    for (std::size_t i = 2; i < x.size(); ++i) {
      const auto& next = task.successors[x[i - 1] - first_content];
      if (std::find(next.begin(), next.end(), x[i]) == next.end()) return false;
    }
    return true;
  };
  std::size_t ok0 = 0, ok1 = 0;
  for (const auto& s : task.eval) (s.label == 0 ? ok0 : ok1) += grammatical(s.x_g);
  CHECK(ok0 == task.eval.size() / 2);
  CHECK(ok1 < task.eval.size() / 20);
  CHECK(task.bayes_accuracy > 0.95);
  CHECK(task.bayes_accuracy < 1.0);
}

TEST_CASE("task spec validation") {
  auto bad = single_spec(0.6, 0.5);
  CHECK_THROWS_AS(make_task(bad), ConfigError);
  bad = single_spec(0.2, 0.0);
  bad.num_labels = 1;
  CHECK_THROWS_AS(make_task(bad), ConfigError);
  bad = single_spec(0.2, 0.0);
  bad.min_len = 5;
  bad.max_len = 4;
  CHECK_THROWS_AS(make_task(bad), ConfigError);
  CHECK(parse_task_type(to_string(TaskType::kPair)) == TaskType::kPair);
  CHECK_THROWS_AS(parse_task_type("regression"), ConfigError);
}

TEST_CASE("metric examples") {
  const std::vector<std::size_t> gold{0, 1, 1, 0, 1, 0};
  CHECK(accuracy(gold, gold) == 1.0);
  CHECK(f1_score(gold, gold) == 1.0);
  CHECK(matthews(gold, gold) == 1.0);
  const std::vector<std::size_t> ones(6, 1);
  CHECK(matthews(ones, gold) == 0.0);
  // TP=6, FP=2, FN=2, TN=0
  std::vector<std::size_t> p, g;
  for (int i = 0; i < 6; ++i) p.push_back(1), g.push_back(1);
  for (int i = 0; i < 2; ++i) p.push_back(1), g.push_back(0);
  for (int i = 0; i < 2; ++i) p.push_back(0), g.push_back(1);
  CHECK(f1_score(p, g) == 0.75);
  const std::vector<std::size_t> zeros(4, 0);
  CHECK(f1_score(zeros, zeros) == 0.0);
  CHECK(compute_metric("accuracy", p, g) == 0.6);
  CHECK_THROWS_AS(compute_metric("auc", p, g), ConfigError);
  CHECK_THROWS_AS(accuracy(std::vector<std::size_t>{}, std::vector<std::size_t>{}), ConfigError);
  CHECK_THROWS_AS(accuracy(p, gold), ConfigError);
  const std::vector<std::size_t> three{0, 2};
  CHECK(accuracy(three, three) == 1.0);
  CHECK_THROWS_AS(f1_score(three, three), ConfigError);
}

TEST_CASE("metrics agree with a confusion-matrix oracle") {
  CounterRng rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.below(1000);
    const double bias = rng.uniform();
    std::vector<std::size_t> p(n), g(n);
    long long tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = rng.bernoulli(bias);
      g[i] = rng.bernoulli(0.5);
      tp += p[i] == 1 && g[i] == 1;
      fp += p[i] == 1 && g[i] == 0;
      fn += p[i] == 0 && g[i] == 1;
      tn += p[i] == 0 && g[i] == 0;
    }
    CHECK(accuracy(p, g) == static_cast<double>(tp + tn) / static_cast<double>(n));
    const long long f1d = 2 * tp + fp + fn;
    CHECK(f1_score(p, g) == (f1d == 0 ? 0.0 : static_cast<double>(2 * tp) / static_cast<double>(f1d)));
    const long long md = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    CHECK(matthews(p, g) ==
          (md == 0 ? 0.0 : static_cast<double>(tp * tn - fp * fn) / std::sqrt(static_cast<double>(md))));
  }
}

TEST_CASE("seed summaries") {
  const auto same = summarize("accuracy", {1, 2, 3}, {0.7, 0.7, 0.7});
  CHECK(same.stddev == 0.0);
  const auto r = run_seeds([](std::uint64_t s) { return static_cast<double>(s); }, kDefaultSeeds);
  CHECK(r.mean == 3.0);
  CHECK(std::abs(r.stddev - 1.5811) <= 1e-4);
  CHECK(r.per_seed == std::vector<double>{1, 2, 3, 4, 5});
  CHECK(r.seeds == kDefaultSeeds);
  CHECK(kDefaultSeeds.size() == 5);
  const std::vector<std::uint64_t> one{1};
  CHECK_THROWS_AS(run_seeds([](std::uint64_t) { return 0.0; }, one), ConfigError);
}

TEST_CASE("gold sample streams") {
  const auto task = make_task(single_spec(0.2, 0.0));
  const auto a = draw_gold_samples(task, 10, 5);
  const auto b = draw_gold_samples(task, 20, 5);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(a[i] == b[i]);
    CHECK(a[i].label == i % 2);
  }
  CHECK(draw_gold_samples(task, 10, 6) != a);
}
