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
#include <optional>
#include <string>
#include <vector>

#include "zsgen/lm.hpp"
#include "zsgen/prompts.hpp"
#include "zsgen/sampling.hpp"
#include "zsgen/selection.hpp"
#include "zsgen/synth.hpp"
#include "zsgen/training.hpp"

namespace zsgen {

/// Prompt entry as written in a config file; `pattern` is whitespace-separated.
struct PromptSpec {
  std::size_t label = 0;
  std::string pattern;
  std::optional<double> alpha;
  std::optional<double> beta;
};

struct SamplingSection {
  double temperature = 1.0;
  std::optional<std::size_t> top_k = 10;
  double alpha = 1.0;
  double beta = 1.0;
  std::size_t max_len = 64;
  std::size_t min_len = 0;
  double tau_low = 0.1;
  double tau_high = 10.0;
};

struct SelectionSection {
  std::vector<std::string> policy;  // one entry, or one per label
  std::size_t n = 3000;
  std::optional<bool> merge_pools;  // defaults to true for temperature-contrast tasks
};

struct ClassifierSection {
  std::size_t embed_dim = 16;
  std::size_t hidden = 16;
  std::size_t bigram_buckets = 0;
};

struct EvaluationSection {
  std::vector<std::uint64_t> seeds = kDefaultSeeds;
  std::vector<std::string> metrics{"accuracy"};
  std::size_t fewshot_per_label = 16;
};

struct PipelineConfig {
  SyntheticTaskSpec task;
  LmTrainConfig lm;
  std::vector<PromptSpec> prompts;  // empty: the task's default templates
  SamplingSection sampling;
  std::size_t samples_per_label = 10000;
  SelectionSection selection;
  TrainConfig training;
  ClassifierSection classifier;
  EvaluationSection evaluation;
  std::string run_dir = "runs/default";

  /// Cross-field checks; throws ConfigError naming the field path.
  void validate() const;
};

/// Parses YAML text. Unknown keys and malformed values are ConfigErrors that
/// name the field path. `overrides` are "section.key=value" strings applied
/// before parsing; the value is read as YAML.
PipelineConfig parse_config(const std::string& yaml_text, const std::vector<std::string>& overrides = {});
PipelineConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Canonical YAML rendering with every field; parse_config(to_yaml(c)) == c.
std::string to_yaml(const PipelineConfig& config);

/// FNV-1a 64 of the given bytes, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);
std::string config_hash(const PipelineConfig& config);

}  // namespace zsgen
