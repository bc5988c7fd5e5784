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

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "zsgen/classifier_net.hpp"
#include "zsgen/config.hpp"
#include "zsgen/lm.hpp"
#include "zsgen/synth.hpp"
#include "zsgen/training.hpp"

namespace zsgen {

using Pools = std::vector<std::vector<GeneratedSample>>;
using MetricValues = std::vector<std::pair<std::string, double>>;

enum class Ablation { kFull, kNoSelection, kNoSmooth, kNoEnsemble };
inline constexpr std::array<Ablation, 4> kAllAblations{Ablation::kFull, Ablation::kNoSelection, Ablation::kNoSmooth,
                                                        Ablation::kNoEnsemble};
std::string_view to_string(Ablation a);

/// Config prompts when given, otherwise the task defaults.
std::vector<PromptTemplate> effective_templates(const PipelineConfig& cfg, const SyntheticTask& task);
/// Sampling settings with EOS as stop token; BOS, SEP and label markers banned.
SamplingConfig base_sampling(const PipelineConfig& cfg, const SyntheticTask& task);

AutoregressiveLM pretrain_lm(const PipelineConfig& cfg, const SyntheticTask& task, LmTrainReport* report = nullptr);

Pools generate_stage(const PipelineConfig& cfg, const SyntheticTask& task, const LanguageModel& lm,
                     std::uint64_t seed, int workers);
void score_stage(const PipelineConfig& cfg, const SyntheticTask& task, const LanguageModel& lm, Pools& pools,
                 int workers);

SelectionPolicy selection_policy(const PipelineConfig& cfg, Ablation ablation = Ablation::kFull);
std::vector<GeneratedSample> select_stage(const PipelineConfig& cfg, const Pools& pools, std::uint64_t seed,
                                          Ablation ablation = Ablation::kFull);

/// Training settings for one run. kNoSmooth sets epsilon = 0; kNoEnsemble
/// sets lambda_max = 0 and delta = 0 so neither the KL term nor the
/// agreement filter is active.
TrainConfig train_config(const PipelineConfig& cfg, std::uint64_t seed, int workers,
                         Ablation ablation = Ablation::kFull);
ClassifierNet init_classifier(const PipelineConfig& cfg, const SyntheticTask& task, std::uint64_t seed);

std::vector<LabeledExample> to_examples(const std::vector<GeneratedSample>& samples, const Vocabulary& vocab);

struct TrainResult {
  ClassifierNet net;
  TrainTrace trace;
};

TrainResult train_stage(const PipelineConfig& cfg, const SyntheticTask& task,
                        const std::vector<GeneratedSample>& selected, std::uint64_t seed, int workers,
                        Ablation ablation = Ablation::kFull);

/// `fewshot_per_label` gold samples per label, disjoint from the eval stream.
std::vector<GeneratedSample> fewshot_set(const PipelineConfig& cfg, const SyntheticTask& task, std::uint64_t seed);
TrainResult train_fewshot_only(const PipelineConfig& cfg, const SyntheticTask& task,
                               const std::vector<GeneratedSample>& fewshot, std::uint64_t seed, int workers);
TrainResult train_fewshot_then_generated(const PipelineConfig& cfg, const SyntheticTask& task,
                                         const std::vector<GeneratedSample>& fewshot,
                                         const std::vector<GeneratedSample>& selected, std::uint64_t seed,
                                         int workers);

/// Every configured metric on the task's eval set.
MetricValues evaluate(const PipelineConfig& cfg, const SyntheticTask& task, const ClassifierNet& net, int workers);

struct ReportRow {
  std::string name;
  std::vector<EvalResult> results;  // one per configured metric
};

/// Full pipeline plus the three ablations over the configured seeds. The
/// generated pools and scores are shared by all variants of a seed.
std::vector<ReportRow> run_ablation(const PipelineConfig& cfg, const SyntheticTask& task, const LanguageModel& lm,
                                    int workers);
/// Few-shot only vs few-shot then generated, over the configured seeds.
std::vector<ReportRow> run_fewshot(const PipelineConfig& cfg, const SyntheticTask& task, const LanguageModel& lm,
                                   int workers);

std::string report_csv(const std::vector<ReportRow>& rows);
std::string report_table(const std::vector<ReportRow>& rows);

}  // namespace zsgen
