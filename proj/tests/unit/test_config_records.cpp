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

#include <filesystem>
#include <fstream>

#include "zsgen/config.hpp"
#include "zsgen/error.hpp"
#include "zsgen/records.hpp"

using namespace zsgen;

namespace {

std::string error_of(const std::string& yaml, const std::vector<std::string>& overrides = {}) {
  try {
    parse_config(yaml, overrides);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string configs_dir() { return ZSGEN_CONFIG_DIR; }

}  // namespace

TEST_CASE("empty config takes defaults") {
  const auto c = parse_config("");
  CHECK(c.task.task_type == TaskType::kSingle);
  CHECK(c.lm.kind == LmKind::kNgram);
  CHECK(c.sampling.top_k == std::optional<std::size_t>(10));
  CHECK(c.training.epsilon == 0.15);
  CHECK(c.training.gamma == 0.8);
  CHECK(c.training.delta == 0.8);
  CHECK(c.training.lambda_max == 10.0);
  CHECK(c.training.ensemble_interval == 100);
  CHECK(c.evaluation.seeds == kDefaultSeeds);
}

TEST_CASE("config values and overrides") {
  const std::string yaml = "sampling:\n  temperature: 0.5\n  top_k: all\ntraining:\n  steps: 40\n";
  const auto c = parse_config(yaml, {"training.steps=70", "selection.policy=[top_n, bottom_n]"});
  CHECK(c.sampling.temperature == 0.5);
  CHECK(!c.sampling.top_k);
  CHECK(c.training.steps == 70);
  CHECK(c.selection.policy == std::vector<std::string>{"top_n", "bottom_n"});
}

TEST_CASE("config errors name the field path") {
  CHECK(error_of("training:\n  stpes: 3\n").find("training.stpes") != std::string::npos);
  CHECK(error_of("bogus: 1\n").find("bogus") != std::string::npos);
  CHECK(error_of("training:\n  steps: many\n").find("training.steps") != std::string::npos);
  CHECK(error_of("sampling:\n  alpha: 0\n").find("sampling.alpha") != std::string::npos);
  CHECK(error_of("lm:\n  kind: transformer\n").find("lm.kind") != std::string::npos);
  CHECK(error_of("evaluation:\n  seeds: [1]\n").find("evaluation.seeds") != std::string::npos);
  CHECK(error_of("selection:\n  n: 20000\n").find("selection.n") != std::string::npos);
  CHECK(error_of("", {"training.steps"}).find("--set") != std::string::npos);
  CHECK(error_of("", {"steps=3"}).find("steps: unknown key") != std::string::npos);
  CHECK(!error_of("", {"training.nope=3"}).empty());
  CHECK(!error_of("training: [1, 2]\n").empty());
  CHECK(!error_of("evaluation:\n  metrics: [auc]\n").empty());
  CHECK_THROWS_AS(load_config("/nonexistent/config.yaml"), MissingArtifactError);
}

TEST_CASE("to_yaml round trips every shipped config") {
  std::size_t seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(configs_dir())) {
    if (entry.path().extension() != ".yaml") continue;
    CAPTURE(entry.path().string());
    const auto c = load_config(entry.path().string());
    const auto text = to_yaml(c);
    CHECK(to_yaml(parse_config(text)) == text);
    CHECK(config_hash(parse_config(text)) == config_hash(c));
    ++seen;
  }
  CHECK(seen >= 3);
}

TEST_CASE("config hash tracks content") {
  const auto a = parse_config("");
  const auto b = parse_config("", {"training.steps=7"});
  CHECK(config_hash(a) != config_hash(b));
  CHECK(config_hash(a).size() == 16);
  // FNV-1a 64 reference values
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("jsonl field order and nulls") {
  const auto vocab = Vocabulary::with_reserved({"a", "b"});
  GeneratedSample s;
  s.id = 7;
  s.label = 1;
  s.x_g = {3, 4};
  CHECK(sample_to_json(s, vocab) ==
        R"({"id":7,"label":1,"x_s":null,"x_s_text":null,"x_g":[3,4],"x_g_text":"a b","score":null})");
  s.x_s = TokenSequence{4};
  s.score = -0.1;
  CHECK(sample_to_json(s, vocab) ==
        R"({"id":7,"label":1,"x_s":[4],"x_s_text":"b","x_g":[3,4],"x_g_text":"a b","score":-0.1})");
}

TEST_CASE("jsonl round trip is exact") {
  const auto vocab = Vocabulary::with_reserved({"a", "b", "c"});
  std::vector<GeneratedSample> v;
  CounterRng rng(3);
  for (std::uint64_t i = 0; i < 50; ++i) {
    GeneratedSample s;
    s.id = i * 1000003;
    s.label = i % 3;
    for (std::size_t k = 0, n = 1 + rng.below(5); k < n; ++k) s.x_g.push_back(static_cast<TokenId>(3 + rng.below(3)));
    if (rng.bernoulli(0.5)) s.x_s = TokenSequence{5, 3};
    if (rng.bernoulli(0.7)) s.score = -10.0 * rng.uniform();
    v.push_back(s);
  }
  const auto text = samples_to_jsonl(v, vocab);
  CHECK(samples_from_jsonl(text, vocab) == v);
  CHECK(samples_to_jsonl(samples_from_jsonl(text, vocab), vocab) == text);
  CHECK_THROWS_AS(sample_from_json(R"({"id":1,"label":0,"x_g":[9]})", vocab), InvalidSampleError);
  CHECK_THROWS_AS(sample_from_json("not json", vocab), InvalidSampleError);
}

TEST_CASE("trace csv") {
  TrainTrace t;
  t.rows.push_back({100, 1, 0.5, 0.0674, 12});
  CHECK(trace_to_csv(t) == "step,interval,loss,lambda,filtered_size\n100,1,0.5,0.0674,12\n");
  CHECK(format_number(0.1) == "0.1");
  const double third = 1.0 / 3.0;
  CHECK(std::stod(format_number(third)) == third);
}

TEST_CASE("artifact files") {
  const auto dir = std::filesystem::temp_directory_path() / "zsgen_unit_files";
  std::filesystem::remove_all(dir);
  const auto path = (dir / "sub" / "x.txt").string();
  CHECK(!file_exists(path));
  write_file(path, "one", false);
  CHECK(read_file(path) == "one");
  CHECK_THROWS_AS(write_file(path, "two", false), ConfigError);
  write_file(path, "two", true);
  CHECK(read_file(path) == "two");
  CHECK_THROWS_AS(read_file((dir / "missing").string()), MissingArtifactError);
  std::filesystem::remove_all(dir);
}
