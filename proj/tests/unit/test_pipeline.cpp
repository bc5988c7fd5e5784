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

#include "zsgen/pipeline.hpp"
#include "zsgen/records.hpp"

using namespace zsgen;

namespace {

PipelineConfig tiny() {
  return parse_config(R"(
task: {corpus_size: 600, eval_size: 200, noise: 0.1, seed: 3}
generation: {samples_per_label: 60}
selection: {n: 20}
training: {steps: 60, ensemble_interval: 20, batch_size: 8}
evaluation: {seeds: [1, 2], metrics: [accuracy, matthews], fewshot_per_label: 4}
)");
}

}  // namespace

TEST_CASE("ablation settings") {
  const auto cfg = tiny();
  const auto none = train_config(cfg, 1, 1, Ablation::kNoEnsemble);
  CHECK(none.lambda_max == 0.0);
  CHECK(none.delta == 0.0);
  CHECK(train_config(cfg, 1, 1, Ablation::kNoSmooth).epsilon == 0.0);
  const auto rand = selection_policy(cfg, Ablation::kNoSelection);
  CHECK(!rand.merge_pools);
  for (auto r : rand.per_label) CHECK(r == SelectionRule::kRandomN);
  const auto full = train_config(cfg, 1, 1);
  CHECK(full.epsilon == cfg.training.epsilon);
  CHECK(full.lambda_max == cfg.training.lambda_max);
}

TEST_CASE("pipeline stages are worker invariant") {
  const auto cfg = tiny();
  const auto task = make_task(cfg.task);
  const auto lm = pretrain_lm(cfg, task);
  auto run = [&](int workers) {
    auto pools = generate_stage(cfg, task, lm, 1, workers);
    score_stage(cfg, task, lm, pools, workers);
    const auto selected = select_stage(cfg, pools, 1);
    const auto trained = train_stage(cfg, task, selected, 1, workers);
    return std::tuple{samples_to_jsonl(selected, task.vocab), trace_to_csv(trained.trace),
                      serialize_checkpoint(trained.net.to_checkpoint(task.vocab)),
                      evaluate(cfg, task, trained.net, workers)};
  };
  const auto one = run(1);
  CHECK(run(3) == one);
  CHECK(std::get<0>(one).size() > 0);
  for (const auto& [name, value] : std::get<3>(one)) CHECK(value >= -1.0);
}

TEST_CASE("generated pools exclude markers and carry ids") {
  const auto cfg = tiny();
  const auto task = make_task(cfg.task);
  const auto lm = pretrain_lm(cfg, task);
  const auto pools = generate_stage(cfg, task, lm, 2, 1);
  REQUIRE(pools.size() == 2);
  for (std::size_t y = 0; y < 2; ++y) {
    CHECK(pools[y].size() == cfg.samples_per_label);
    for (const auto& s : pools[y]) {
      CHECK(s.label == y);
      CHECK(!s.x_g.empty());
      for (TokenId t : s.x_g)
        for (TokenId m : task.label_markers) CHECK(t != m);
    }
  }
}

TEST_CASE("ablation and fewshot reports") {
  const auto cfg = tiny();
  const auto task = make_task(cfg.task);
  const auto lm = pretrain_lm(cfg, task);
  const auto rows = run_ablation(cfg, task, lm, 2);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].name == "full");
  CHECK(rows[1].name == "-selection");
  CHECK(rows[2].name == "-smooth");
  CHECK(rows[3].name == "-ensemble");
  for (const auto& r : rows) {
    REQUIRE(r.results.size() == 2);
    CHECK(r.results[0].metric == "accuracy");
    CHECK(r.results[0].per_seed.size() == 2);
  }
  const auto csv = report_csv(rows);
  CHECK(csv == report_csv(run_ablation(cfg, task, lm, 1)));
  CHECK(!report_table(rows).empty());

  const auto few = run_fewshot(cfg, task, lm, 1);
  REQUIRE(few.size() == 2);
  CHECK(few[0].name == "fewshot-only");
  CHECK(few[1].name == "fewshot+generated");
  const auto shots = fewshot_set(cfg, task, 1);
  CHECK(shots.size() == 8);
}
