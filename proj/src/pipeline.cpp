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

#include "zsgen/pipeline.hpp"

#include <algorithm>
#include <cstdio>

#include "zsgen/error.hpp"
#include "zsgen/records.hpp"
#include "zsgen/rng.hpp"

namespace zsgen {
namespace {

constexpr std::uint64_t kSelectTag = 0x53454c;
constexpr std::uint64_t kClassifierTag = 0x434c46;
constexpr std::uint64_t kFewshotTag = 0x465753;

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

std::string_view to_string(Ablation a) {
  switch (a) {
    case Ablation::kFull:
      return "full";
    case Ablation::kNoSelection:
      return "-selection";
    case Ablation::kNoSmooth:
      return "-smooth";
    case Ablation::kNoEnsemble:
      return "-ensemble";
  }
  return "?";
}

std::vector<PromptTemplate> effective_templates(const PipelineConfig& cfg, const SyntheticTask& task) {
  if (cfg.prompts.empty()) return task.templates;
  std::vector<PromptTemplate> out(cfg.prompts.size());
  for (const auto& p : cfg.prompts) {
    PromptTemplate t{p.label, split_ws(p.pattern), task.spec.task_type, p.alpha, p.beta};
    t.validate();
    for (const auto& tok : t.pattern)
      if (tok != PromptTemplate::kFirstSequenceSlot && !task.vocab.contains(tok))
        throw ConfigError("prompts: unknown token '" + tok + "' in pattern for label " + std::to_string(p.label));
    out[p.label] = std::move(t);
  }
  return out;
}

SamplingConfig base_sampling(const PipelineConfig& cfg, const SyntheticTask& task) {
  SamplingConfig s;
  s.temperature = cfg.sampling.temperature;
  s.top_k = cfg.sampling.top_k;
  s.alpha = cfg.sampling.alpha;
  s.beta = cfg.sampling.beta;
  s.max_len = cfg.sampling.max_len;
  s.min_len = cfg.sampling.min_len;
  s.stop_tokens = {task.vocab.eos()};
  s.banned_tokens = {task.vocab.bos(), task.vocab.sep()};
  s.banned_tokens.insert(s.banned_tokens.end(), task.label_markers.begin(), task.label_markers.end());
  s.validate(task.vocab.size());
  return s;
}

AutoregressiveLM pretrain_lm(const PipelineConfig& cfg, const SyntheticTask& task, LmTrainReport* report) {
  return train_lm(task.corpus, task.vocab, cfg.lm, report);
}

Pools generate_stage(const PipelineConfig& cfg, const SyntheticTask& task, const LanguageModel& lm,
                     std::uint64_t seed, int workers) {
  if (lm.vocab_size() != task.vocab.size()) throw ConfigError("language model does not match the task vocabulary");
  GenerationRequest req;
  req.task_type = task.spec.task_type;
  req.templates = effective_templates(cfg, task);
  req.sampling = base_sampling(cfg, task);
  req.samples_per_label = cfg.samples_per_label;
  req.tau_low = cfg.sampling.tau_low;
  req.tau_high = cfg.sampling.tau_high;
  req.seed_tokens = task.seed_tokens;
  req.seed = seed;
  req.workers = workers;
  std::optional<CorpusSampler> sampler;
  if (task.spec.task_type == TaskType::kPair) {
    CorpusSamplerConstraints constraints;
    constraints.min_len = task.spec.min_len;
    constraints.max_len = task.spec.max_len;
    sampler.emplace(task.first_sequences, constraints);
    req.first_sequences = &*sampler;
  }
  return generate_pools(lm, task.vocab, req);
}

void score_stage(const PipelineConfig& cfg, const SyntheticTask& task, const LanguageModel& lm, Pools& pools,
                 int workers) {
  const auto templates = effective_templates(cfg, task);
  score_pools(lm, task.vocab, pools, templates, workers);
}

SelectionPolicy selection_policy(const PipelineConfig& cfg, Ablation ablation) {
  const std::size_t Y = cfg.task.num_labels;
  const bool contrast = cfg.task.task_type == TaskType::kTemperatureContrast;
  SelectionPolicy p;
  p.n = cfg.selection.n;
  p.merge_pools = cfg.selection.merge_pools.value_or(contrast);
  if (cfg.selection.policy.empty()) {
    p.per_label.assign(Y, SelectionRule::kTopN);
    if (contrast) p.per_label[1] = SelectionRule::kBottomN;
  } else if (cfg.selection.policy.size() == 1) {
    p.per_label.assign(Y, parse_selection_rule(cfg.selection.policy[0]));
  } else {
    for (const auto& s : cfg.selection.policy) p.per_label.push_back(parse_selection_rule(s));
  }
  if (ablation == Ablation::kNoSelection) {
    std::ranges::fill(p.per_label, SelectionRule::kRandomN);
    p.merge_pools = false;
  }
  return p;
}

std::vector<GeneratedSample> select_stage(const PipelineConfig& cfg, const Pools& pools, std::uint64_t seed,
                                          Ablation ablation) {
  CounterRng rng(derive_key(seed, {kSelectTag}));
  return select(pools, selection_policy(cfg, ablation), rng);
}

TrainConfig train_config(const PipelineConfig& cfg, std::uint64_t seed, int workers, Ablation ablation) {
  TrainConfig t = cfg.training;
  t.seed = seed;
  t.workers = workers;
  if (ablation == Ablation::kNoSmooth) t.epsilon = 0.0;
  if (ablation == Ablation::kNoEnsemble) {
    t.lambda_max = 0.0;
    t.delta = 0.0;
  }
  return t;
}

ClassifierNet init_classifier(const PipelineConfig& cfg, const SyntheticTask& task, std::uint64_t seed) {
  ClassifierNet::Shape shape;
  shape.vocab_size = task.vocab.size();
  shape.embed_dim = cfg.classifier.embed_dim;
  shape.hidden = cfg.classifier.hidden;
  shape.num_labels = task.spec.num_labels;
  shape.pair = task.spec.task_type == TaskType::kPair;
  shape.sep = task.vocab.sep();
  shape.bigram_buckets = cfg.classifier.bigram_buckets;
  CounterRng rng(derive_key(seed, {kClassifierTag}));
  return ClassifierNet::initialized(shape, rng);
}

std::vector<LabeledExample> to_examples(const std::vector<GeneratedSample>& samples, const Vocabulary& vocab) {
  std::vector<LabeledExample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(to_example(s, vocab.sep()));
  return out;
}

TrainResult train_stage(const PipelineConfig& cfg, const SyntheticTask& task,
                        const std::vector<GeneratedSample>& selected, std::uint64_t seed, int workers,
                        Ablation ablation) {
  auto net = init_classifier(cfg, task, seed);
  const auto examples = to_examples(selected, task.vocab);
  auto trace = train_classifier(examples, net, train_config(cfg, seed, workers, ablation));
  return {std::move(net), std::move(trace)};
}

std::vector<GeneratedSample> fewshot_set(const PipelineConfig& cfg, const SyntheticTask& task, std::uint64_t seed) {
  return draw_gold_samples(task, cfg.evaluation.fewshot_per_label * task.spec.num_labels,
                           derive_key(task.spec.seed, {kFewshotTag, seed}));
}

TrainResult train_fewshot_only(const PipelineConfig& cfg, const SyntheticTask& task,
                               const std::vector<GeneratedSample>& fewshot, std::uint64_t seed, int workers) {
  return train_fewshot_then_generated(cfg, task, fewshot, {}, seed, workers);
}

TrainResult train_fewshot_then_generated(const PipelineConfig& cfg, const SyntheticTask& task,
                                         const std::vector<GeneratedSample>& fewshot,
                                         const std::vector<GeneratedSample>& selected, std::uint64_t seed,
                                         int workers) {
  auto net = init_classifier(cfg, task, seed);
  const auto shots = to_examples(fewshot, task.vocab);
  const auto generated = to_examples(selected, task.vocab);
  auto trace = finetune_fewshot_then_generated(shots, generated, net, train_config(cfg, seed, workers));
  return {std::move(net), std::move(trace)};
}

MetricValues evaluate(const PipelineConfig& cfg, const SyntheticTask& task, const ClassifierNet& net, int workers) {
  const auto examples = to_examples(task.eval, task.vocab);
  const auto predictions = predict_labels(net, examples, workers);
  std::vector<std::size_t> gold;
  gold.reserve(examples.size());
  for (const auto& e : examples) gold.push_back(e.label);
  MetricValues out;
  for (const auto& m : cfg.evaluation.metrics) out.emplace_back(m, compute_metric(m, predictions, gold));
  return out;
}

namespace {

std::vector<ReportRow> summarize_rows(const PipelineConfig& cfg, const std::vector<std::string>& names,
                                      const std::vector<std::vector<MetricValues>>& per_seed) {
  std::vector<ReportRow> rows;
  for (std::size_t v = 0; v < names.size(); ++v) {
    ReportRow row{names[v], {}};
    for (std::size_t m = 0; m < cfg.evaluation.metrics.size(); ++m) {
      std::vector<double> values;
      for (const auto& seed_values : per_seed) values.push_back(seed_values[v][m].second);
      row.results.push_back(summarize(cfg.evaluation.metrics[m], cfg.evaluation.seeds, std::move(values)));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::vector<ReportRow> run_ablation(const PipelineConfig& cfg, const SyntheticTask& task, const LanguageModel& lm,
                                    int workers) {
  std::vector<std::string> names;
  for (auto a : kAllAblations) names.emplace_back(to_string(a));
  std::vector<std::vector<MetricValues>> per_seed;
  for (auto seed : cfg.evaluation.seeds) {
    auto pools = generate_stage(cfg, task, lm, seed, workers);
    score_stage(cfg, task, lm, pools, workers);
    std::vector<MetricValues> values;
    for (auto a : kAllAblations) {
      const auto selected = select_stage(cfg, pools, seed, a);
      const auto trained = train_stage(cfg, task, selected, seed, workers, a);
      values.push_back(evaluate(cfg, task, trained.net, workers));
    }
    per_seed.push_back(std::move(values));
  }
  return summarize_rows(cfg, names, per_seed);
}

std::vector<ReportRow> run_fewshot(const PipelineConfig& cfg, const SyntheticTask& task, const LanguageModel& lm,
                                   int workers) {
  const std::vector<std::string> names{"fewshot-only", "fewshot+generated"};
  std::vector<std::vector<MetricValues>> per_seed;
  for (auto seed : cfg.evaluation.seeds) {
    auto pools = generate_stage(cfg, task, lm, seed, workers);
    score_stage(cfg, task, lm, pools, workers);
    const auto selected = select_stage(cfg, pools, seed);
    const auto shots = fewshot_set(cfg, task, seed);
    std::vector<MetricValues> values;
    values.push_back(evaluate(cfg, task, train_fewshot_only(cfg, task, shots, seed, workers).net, workers));
    values.push_back(
        evaluate(cfg, task, train_fewshot_then_generated(cfg, task, shots, selected, seed, workers).net, workers));
    per_seed.push_back(std::move(values));
  }
  return summarize_rows(cfg, names, per_seed);
}

std::string report_csv(const std::vector<ReportRow>& rows) {
  std::string out = "variant,metric,mean,std";
  const std::size_t seeds = rows.empty() || rows[0].results.empty() ? 0 : rows[0].results[0].seeds.size();
  for (std::size_t i = 0; i < seeds; ++i) out += ",seed_" + std::to_string(rows[0].results[0].seeds[i]);
  out += "\n";
  for (const auto& row : rows)
    for (const auto& r : row.results) {
      out += row.name + "," + r.metric + "," + format_number(r.mean) + "," + format_number(r.stddev);
      for (double v : r.per_seed) out += "," + format_number(v);
      out += "\n";
    }
  return out;
}

std::string report_table(const std::vector<ReportRow>& rows) {
  if (rows.empty()) return "";
  std::vector<std::vector<std::string>> cells{{"variant"}};
  for (const auto& r : rows[0].results) cells[0].push_back(r.metric);
  for (const auto& row : rows) {
    std::vector<std::string> line{row.name};
    for (const auto& r : row.results) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.2f ± %.2f", 100.0 * r.mean, 100.0 * r.stddev);
      line.emplace_back(buf);
    }
    cells.push_back(std::move(line));
  }
  // Width in code points so the ± sign aligns.
  auto width = [](const std::string& s) {
    return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) { return (c & 0xC0) != 0x80; }));
  };
  std::vector<std::size_t> widths(cells[0].size(), 0);
  for (const auto& line : cells)
    for (std::size_t c = 0; c < line.size(); ++c) widths[c] = std::max(widths[c], width(line[c]));
  std::string out;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      const auto& s = cells[r][c];
      const std::string pad(widths[c] - width(s), ' ');
      out += c == 0 ? s + pad : "  " + pad + s;
    }
    out += "\n";
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : widths) total += w + 2;
      out += std::string(total - 2, '-') + "\n";
    }
  }
  return out;
}

}  // namespace zsgen
