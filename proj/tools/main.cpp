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

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "zsgen/checkpoint.hpp"
#include "zsgen/config.hpp"
#include "zsgen/error.hpp"
#include "zsgen/pipeline.hpp"
#include "zsgen/records.hpp"

namespace fs = std::filesystem;
using namespace zsgen;
using ordered_json = nlohmann::ordered_json;

namespace {

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  bool force = false;
  std::string variant = "full";
  bool fewshot = false;
};

// Everything a command needs: parsed config plus the layout of the run directory.
class Run {
 public:
  explicit Run(const Options& o) : opt_(o), cfg_(load_config(o.config_path, o.overrides)) {
    if (o.workers < 1) throw ConfigError("--workers must be >= 1");
  }

  const PipelineConfig& cfg() const { return cfg_; }
  const Options& opt() const { return opt_; }
  std::uint64_t seed() const { return opt_.seed.value_or(cfg_.evaluation.seeds.front()); }

  std::string path(const std::string& rel) const { return (fs::path(cfg_.run_dir) / rel).string(); }
  std::string seed_path(std::uint64_t seed, const std::string& name) const {
    return path("seed_" + std::to_string(seed) + "/" + name);
  }

  const SyntheticTask& task() {
    if (!task_) task_ = make_task(cfg_.task);
    return *task_;
  }

  // Writes an output and remembers its hash for the stage manifest.
  void write(const std::string& p, const std::string& bytes) {
    write_file(p, bytes, opt_.force);
    outputs_[rel(p)] = fnv1a_hex(bytes);
  }
  std::string read(const std::string& p) {
    auto bytes = read_file(p);
    inputs_[rel(p)] = fnv1a_hex(bytes);
    return bytes;
  }

  AutoregressiveLM load_lm() {
    const auto bytes = read(path("lm.sglm"));
    const auto ckpt = deserialize_checkpoint(bytes);
    if (ckpt.vocab != task().vocab.tokens()) throw ConfigError("lm.sglm was trained for a different task config");
    return AutoregressiveLM::from_checkpoint(ckpt);
  }

  void manifest(const std::string& stage, std::optional<std::uint64_t> seed, ordered_json extra = {}) {
    ordered_json m;
    m["stage"] = stage;
    m["config_hash"] = config_hash(cfg_);
    if (seed) m["seed"] = *seed;
    else m["seed"] = nullptr;
    m["inputs"] = ordered_json::object();
    for (const auto& [k, v] : inputs_) m["inputs"][k] = v;
    m["outputs"] = ordered_json::object();
    for (const auto& [k, v] : outputs_) m["outputs"][k] = v;
    if (!extra.is_null()) m["details"] = std::move(extra);
    m["config"] = to_yaml(cfg_);
    const std::string name = seed ? stage + "-seed_" + std::to_string(*seed) + ".json" : stage + ".json";
    write_file(path("manifests/" + name), m.dump(2) + "\n", opt_.force);
    inputs_.clear();
    outputs_.clear();
  }

 private:
  std::string rel(const std::string& p) const { return fs::path(p).lexically_relative(cfg_.run_dir).generic_string(); }

  Options opt_;
  PipelineConfig cfg_;
  std::optional<SyntheticTask> task_;
  std::map<std::string, std::string> inputs_, outputs_;
};

Ablation parse_variant(const std::string& s) {
  for (auto a : kAllAblations)
    if (to_string(a) == s) return a;
  throw ConfigError("--variant must be one of full, -selection, -smooth, -ensemble");
}

std::string metrics_csv(const MetricValues& values) {
  std::string out = "metric,value\n";
  for (const auto& [m, v] : values) out += m + "," + format_number(v) + "\n";
  return out;
}

std::string metrics_text(const MetricValues& values) {
  std::string out;
  for (const auto& [m, v] : values) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%-10s %8.2f\n", m.c_str(), 100.0 * v);
    out += buf;
  }
  return out;
}

void cmd_pretrain(Run& run) {
  const auto& task = run.task();
  LmTrainReport report;
  const auto lm = pretrain_lm(run.cfg(), task, &report);
  run.write(run.path("lm.sglm"), serialize_checkpoint(lm.to_checkpoint(task.vocab)));
  run.write(run.path("task/eval.jsonl"), samples_to_jsonl(task.eval, task.vocab));
  std::string corpus;
  for (const auto& doc : task.corpus) corpus += task.vocab.decode(doc) + "\n";
  run.write(run.path("task/corpus.txt"), corpus);
  ordered_json details;
  details["bayes_accuracy"] = task.bayes_accuracy;
  details["vocab_size"] = task.vocab.size();
  details["warnings"] = task.warnings;
  details["lm_epoch_loss"] = report.epoch_loss;
  run.manifest("pretrain-lm", std::nullopt, details);
  for (const auto& w : task.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "bayes_accuracy " << format_number(task.bayes_accuracy) << "\n";
}

Pools read_pools(Run& run, std::uint64_t seed) {
  const auto samples = samples_from_jsonl(run.read(run.seed_path(seed, "generated.jsonl")), run.task().vocab);
  Pools pools(run.task().spec.num_labels);
  for (const auto& s : samples) {
    if (s.label >= pools.size()) throw InvalidSampleError("generated record has an out-of-range label");
    pools[s.label].push_back(s);
  }
  return pools;
}

void cmd_generate(Run& run, std::uint64_t seed) {
  const auto lm = run.load_lm();
  const auto pools = generate_stage(run.cfg(), run.task(), lm, seed, run.opt().workers);
  std::vector<GeneratedSample> flat;
  for (const auto& p : pools) flat.insert(flat.end(), p.begin(), p.end());
  run.write(run.seed_path(seed, "generated.jsonl"), samples_to_jsonl(flat, run.task().vocab));
  ordered_json details;
  details["samples_per_label"] = run.cfg().samples_per_label;
  details["kept"] = ordered_json::array();
  for (const auto& p : pools) details["kept"].push_back(p.size());
  run.manifest("generate", seed, details);
}

void cmd_select(Run& run, std::uint64_t seed, Ablation variant) {
  const auto lm = run.load_lm();
  auto pools = read_pools(run, seed);
  score_stage(run.cfg(), run.task(), lm, pools, run.opt().workers);
  const auto selected = select_stage(run.cfg(), pools, seed, variant);
  run.write(run.seed_path(seed, "selected.jsonl"), samples_to_jsonl(selected, run.task().vocab));
  const auto policy = selection_policy(run.cfg(), variant);
  ordered_json details;
  details["variant"] = std::string(to_string(variant));
  details["policy"] = ordered_json::array();
  for (auto r : policy.per_label) details["policy"].push_back(std::string(to_string(r)));
  details["n"] = policy.n;
  details["m"] = run.cfg().samples_per_label;
  details["merge_pools"] = policy.merge_pools;
  details["rng_seed"] = seed;
  run.manifest("select", seed, details);
}

void cmd_train(Run& run, std::uint64_t seed, Ablation variant, bool fewshot) {
  const auto& task = run.task();
  const auto selected = samples_from_jsonl(run.read(run.seed_path(seed, "selected.jsonl")), task.vocab);
  TrainResult result = fewshot ? train_fewshot_then_generated(run.cfg(), task, fewshot_set(run.cfg(), task, seed),
                                                              selected, seed, run.opt().workers)
                               : train_stage(run.cfg(), task, selected, seed, run.opt().workers, variant);
  run.write(run.seed_path(seed, "classifier.sglm"), serialize_checkpoint(result.net.to_checkpoint(task.vocab)));
  run.write(run.seed_path(seed, "trace.csv"), trace_to_csv(result.trace));
  ordered_json details;
  details["variant"] = std::string(to_string(variant));
  details["fewshot"] = fewshot;
  details["ensemble_updates"] = result.trace.ensemble_updates;
  details["fallback_steps"] = result.trace.fallback_steps;
  run.manifest("train", seed, details);
}

void cmd_eval(Run& run, std::uint64_t seed) {
  const auto ckpt = deserialize_checkpoint(run.read(run.seed_path(seed, "classifier.sglm")));
  if (ckpt.vocab != run.task().vocab.tokens()) throw ConfigError("classifier.sglm was trained for a different task config");
  const auto net = ClassifierNet::from_checkpoint(ckpt);
  const auto values = evaluate(run.cfg(), run.task(), net, run.opt().workers);
  run.write(run.seed_path(seed, "eval.csv"), metrics_csv(values));
  run.write(run.seed_path(seed, "eval.txt"), metrics_text(values));
  run.manifest("eval", seed);
  std::cout << metrics_text(values);
}

void cmd_pipeline(Run& run) {
  std::vector<std::uint64_t> seeds = run.opt().seed ? std::vector<std::uint64_t>{*run.opt().seed}
                                                    : run.cfg().evaluation.seeds;
  if (!file_exists(run.path("lm.sglm")) || run.opt().force) cmd_pretrain(run);
  const auto variant = parse_variant(run.opt().variant);
  for (auto seed : seeds) {
    cmd_generate(run, seed);
    cmd_select(run, seed, variant);
    cmd_train(run, seed, variant, run.opt().fewshot);
    cmd_eval(run, seed);
  }
}

void emit_report(Run& run, const std::string& name, const std::vector<ReportRow>& rows) {
  run.write(run.path("reports/" + name + ".csv"), report_csv(rows));
  const auto table = report_table(rows);
  run.write(run.path("reports/" + name + ".txt"), table);
  std::cout << table;
}

void cmd_ablate(Run& run) {
  const auto lm = run.load_lm();
  emit_report(run, "ablation", run_ablation(run.cfg(), run.task(), lm, run.opt().workers));
  run.manifest("ablate", std::nullopt);
}

void cmd_fewshot(Run& run) {
  const auto lm = run.load_lm();
  emit_report(run, "fewshot", run_fewshot(run.cfg(), run.task(), lm, run.opt().workers));
  run.manifest("fewshot", std::nullopt);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-shot training-data generation pipeline on synthetic tasks"};
  app.require_subcommand(1);
  Options opt;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* cmd, bool seeded) {
    cmd->add_option("-c,--config", opt.config_path, "Pipeline config (YAML)")->required();
    cmd->add_option("--set", opt.overrides, "Override a config field: section.key=value (repeatable)");
    cmd->add_option("--workers", opt.workers, "Worker threads; never changes output bytes")->default_val(1);
    cmd->add_flag("--force", opt.force, "Overwrite existing stage outputs");
    if (seeded) cmd->add_option("--seed", seed, "Run seed (default: first evaluation seed)");
  };

  auto* pretrain = app.add_subcommand("pretrain-lm", "Build the synthetic task and train the generator LM");
  add_common(pretrain, false);
  auto* generate = app.add_subcommand("generate", "Generate M samples per label with the prompts");
  add_common(generate, true);
  auto* select = app.add_subcommand("select", "Score generated samples and select N per label");
  add_common(select, true);
  select->add_option("--variant", opt.variant, "full, -selection, -smooth or -ensemble")->default_val("full");
  auto* train = app.add_subcommand("train", "Fine-tune the classifier on the selected samples");
  add_common(train, true);
  train->add_option("--variant", opt.variant, "full, -selection, -smooth or -ensemble")->default_val("full");
  train->add_flag("--fewshot", opt.fewshot, "Train on gold few-shot samples first, then on the selected samples");
  auto* eval = app.add_subcommand("eval", "Evaluate the trained classifier on the gold eval set");
  add_common(eval, true);
  auto* pipeline = app.add_subcommand("pipeline", "Run every stage (all evaluation seeds unless --seed)");
  add_common(pipeline, true);
  pipeline->add_option("--variant", opt.variant, "full, -selection, -smooth or -ensemble")->default_val("full");
  pipeline->add_flag("--fewshot", opt.fewshot, "Use few-shot-then-generated training");
  auto* ablate = app.add_subcommand("ablate", "Full pipeline and its three ablations over the evaluation seeds");
  add_common(ablate, false);
  auto* fewshot = app.add_subcommand("fewshot", "Few-shot only versus few-shot then generated, over the seeds");
  add_common(fewshot, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    for (auto* cmd : {generate, select, train, eval, pipeline})
      if (cmd->parsed() && cmd->count("--seed") > 0) opt.seed = seed;
    Run run(opt);
    const auto variant = parse_variant(opt.variant);
    if (pretrain->parsed()) cmd_pretrain(run);
    else if (generate->parsed()) cmd_generate(run, run.seed());
    else if (select->parsed()) cmd_select(run, run.seed(), variant);
    else if (train->parsed()) cmd_train(run, run.seed(), variant, opt.fewshot);
    else if (eval->parsed()) cmd_eval(run, run.seed());
    else if (pipeline->parsed()) cmd_pipeline(run);
    else if (ablate->parsed()) cmd_ablate(run);
    else if (fewshot->parsed()) cmd_fewshot(run);
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
