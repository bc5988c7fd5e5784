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

#include "zsgen/config.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "zsgen/error.hpp"

namespace zsgen {
namespace {

static_assert(std::is_same_v<std::uint64_t, std::size_t>, "seeds are read as size_t");

// Reads the keys of one mapping and rejects any key left unread.
class MapReader {
 public:
  MapReader(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) throw ConfigError(path_ + ": expected a mapping");
  }

  template <class T>
  void read(const std::string& key, T& out) {
    seen_.insert(key);
    if (!node_ || node_.IsNull()) return;
    const YAML::Node v = node_[key];
    if (!v) return;
    convert(v, field(key), out);
  }

  YAML::Node child(const std::string& key) {
    seen_.insert(key);
    if (!node_ || node_.IsNull()) return YAML::Node();
    return node_[key];
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    if (!node_ || node_.IsNull()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.count(key)) throw ConfigError(field(key) + ": unknown key");
    }
  }

  static void convert(const YAML::Node& v, const std::string& path, double& out) { out = scalar<double>(v, path); }
  static void convert(const YAML::Node& v, const std::string& path, bool& out) { out = scalar<bool>(v, path); }
  static void convert(const YAML::Node& v, const std::string& path, std::string& out) {
    out = scalar<std::string>(v, path);
  }
  static void convert(const YAML::Node& v, const std::string& path, int& out) { out = scalar<int>(v, path); }
  static void convert(const YAML::Node& v, const std::string& path, std::size_t& out) {
    const auto x = scalar<long long>(v, path);
    if (x < 0) throw ConfigError(path + ": must be non-negative");
    out = static_cast<std::size_t>(x);
  }
  static void convert(const YAML::Node& v, const std::string& path, std::optional<double>& out) {
    double x = 0;
    convert(v, path, x);
    out = x;
  }
  static void convert(const YAML::Node& v, const std::string& path, std::optional<bool>& out) {
    bool x = false;
    convert(v, path, x);
    out = x;
  }
  template <class T>
  static void convert(const YAML::Node& v, const std::string& path, std::vector<T>& out) {
    out.clear();
    if (v.IsScalar()) {
      T x{};
      convert(v, path, x);
      out.push_back(x);
      return;
    }
    if (!v.IsSequence()) throw ConfigError(path + ": expected a list");
    for (std::size_t i = 0; i < v.size(); ++i) {
      T x{};
      convert(v[i], path + "[" + std::to_string(i) + "]", x);
      out.push_back(x);
    }
  }

 private:
  template <class T>
  static T scalar(const YAML::Node& v, const std::string& path) {
    if (!v.IsScalar()) throw ConfigError(path + ": expected a scalar");
    try {
      return v.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(path + ": cannot parse '" + v.Scalar() + "'");
    }
  }

  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

void apply_override(YAML::Node& root, const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects section.key=value, got '" + text + "'");
  const std::string path = text.substr(0, eq);
  YAML::Node value;
  try {
    value = YAML::Load(text.substr(eq + 1));
  } catch (const YAML::Exception& e) {
    throw ConfigError("--set " + path + ": " + e.msg);
  }
  const auto dot = path.find('.');
  if (dot == std::string::npos) {
    root[path] = value;
    return;
  }
  const std::string section = path.substr(0, dot), key = path.substr(dot + 1);
  if (key.empty() || key.find('.') != std::string::npos) throw ConfigError("--set path must be section.key: " + path);
  if (root[section] && !root[section].IsMap()) throw ConfigError("--set " + path + ": " + section + " is not a mapping");
  root[section][key] = value;
}

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string_view lm_kind_name(LmKind k) { return k == LmKind::kNgram ? "ngram" : "neural"; }

LmKind parse_lm_kind(const std::string& s, const std::string& path) {
  if (s == "ngram") return LmKind::kNgram;
  if (s == "neural") return LmKind::kNeural;
  throw ConfigError(path + ": unknown LM kind '" + s + "' (ngram, neural)");
}

}  // namespace

PipelineConfig parse_config(const std::string& yaml_text, const std::vector<std::string>& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("config: " + e.msg);
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  for (const auto& o : overrides) apply_override(root, o);

  PipelineConfig c;
  MapReader top(root, "");
  {
    MapReader r(top.child("task"), "task");
    std::string type = std::string(to_string(c.task.task_type));
    r.read("type", type);
    try {
      c.task.task_type = parse_task_type(type);
    } catch (const ConfigError& e) {
      throw ConfigError("task.type: " + std::string(e.what()));
    }
    r.read("num_labels", c.task.num_labels);
    r.read("words_per_class", c.task.words_per_class);
    r.read("shared_words", c.task.shared_words);
    r.read("shared_mass", c.task.shared_mass);
    r.read("leak_mass", c.task.leak_mass);
    r.read("content_words", c.task.content_words);
    r.read("min_overlap", c.task.min_overlap);
    r.read("stop_words", c.task.stop_words);
    r.read("successors", c.task.successors);
    r.read("min_len", c.task.min_len);
    r.read("max_len", c.task.max_len);
    r.read("noise", c.task.noise);
    r.read("corpus_size", c.task.corpus_size);
    r.read("eval_size", c.task.eval_size);
    r.read("seed", c.task.seed);
    r.finish();
  }
  {
    MapReader r(top.child("lm"), "lm");
    std::string kind(lm_kind_name(c.lm.kind));
    r.read("kind", kind);
    c.lm.kind = parse_lm_kind(kind, "lm.kind");
    r.read("order", c.lm.order);
    r.read("kappa", c.lm.kappa);
    r.read("embed_dim", c.lm.embed_dim);
    r.read("hidden", c.lm.hidden);
    r.read("epochs", c.lm.epochs);
    r.read("lr", c.lm.lr);
    r.read("seed", c.lm.seed);
    r.finish();
  }
  if (YAML::Node prompts = top.child("prompts"); prompts && !prompts.IsNull()) {
    if (!prompts.IsSequence()) throw ConfigError("prompts: expected a list");
    for (std::size_t i = 0; i < prompts.size(); ++i) {
      MapReader r(prompts[i], "prompts[" + std::to_string(i) + "]");
      PromptSpec p;
      r.read("label", p.label);
      r.read("pattern", p.pattern);
      r.read("alpha", p.alpha);
      r.read("beta", p.beta);
      r.finish();
      c.prompts.push_back(std::move(p));
    }
  }
  {
    MapReader r(top.child("sampling"), "sampling");
    r.read("temperature", c.sampling.temperature);
    if (YAML::Node k = r.child("top_k"); k && !k.IsNull()) {
      if (k.IsScalar() && k.Scalar() == "all") {
        c.sampling.top_k.reset();
      } else {
        std::size_t v = 0;
        MapReader::convert(k, "sampling.top_k", v);
        c.sampling.top_k = v;
      }
    }
    r.read("alpha", c.sampling.alpha);
    r.read("beta", c.sampling.beta);
    r.read("max_len", c.sampling.max_len);
    r.read("min_len", c.sampling.min_len);
    r.read("tau_low", c.sampling.tau_low);
    r.read("tau_high", c.sampling.tau_high);
    r.finish();
  }
  {
    MapReader r(top.child("generation"), "generation");
    r.read("samples_per_label", c.samples_per_label);
    r.finish();
  }
  {
    MapReader r(top.child("selection"), "selection");
    r.read("policy", c.selection.policy);
    r.read("n", c.selection.n);
    r.read("merge_pools", c.selection.merge_pools);
    r.finish();
  }
  {
    MapReader r(top.child("training"), "training");
    r.read("lr", c.training.lr);
    r.read("batch_size", c.training.batch_size);
    r.read("steps", c.training.steps);
    r.read("ensemble_interval", c.training.ensemble_interval);
    r.read("epsilon", c.training.epsilon);
    r.read("gamma", c.training.gamma);
    r.read("delta", c.training.delta);
    r.read("lambda_max", c.training.lambda_max);
    r.read("scale_step_by_lambda", c.training.scale_step_by_lambda);
    r.finish();
  }
  {
    MapReader r(top.child("classifier"), "classifier");
    r.read("embed_dim", c.classifier.embed_dim);
    r.read("hidden", c.classifier.hidden);
    r.read("bigram_buckets", c.classifier.bigram_buckets);
    r.finish();
  }
  {
    MapReader r(top.child("evaluation"), "evaluation");
    r.read("seeds", c.evaluation.seeds);
    r.read("metrics", c.evaluation.metrics);
    r.read("fewshot_per_label", c.evaluation.fewshot_per_label);
    r.finish();
  }
  {
    MapReader r(top.child("paths"), "paths");
    r.read("run_dir", c.run_dir);
    r.finish();
  }
  top.finish();
  c.validate();
  return c;
}

PipelineConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifactError(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

void PipelineConfig::validate() const {
  try {
    task.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("task: ") + e.what());
  }
  const std::size_t Y = task.num_labels;
  if (lm.kind == LmKind::kNgram && (lm.order < 1 || lm.order > 5)) throw ConfigError("lm.order: ngram order must be in [1, 5]");
  if (lm.kind == LmKind::kNeural && lm.order < 1) throw ConfigError("lm.order: neural window must be positive");
  if (!(lm.kappa > 0.0)) throw ConfigError("lm.kappa: must be positive");
  if (lm.embed_dim == 0 || lm.hidden == 0) throw ConfigError("lm.embed_dim/hidden: must be positive");
  if (lm.epochs < 1) throw ConfigError("lm.epochs: must be positive");
  if (!(lm.lr > 0.0)) throw ConfigError("lm.lr: must be positive");

  if (!prompts.empty()) {
    if (prompts.size() != Y) throw ConfigError("prompts: need exactly one template per label");
    std::vector<char> seen(Y, 0);
    for (std::size_t i = 0; i < prompts.size(); ++i) {
      const auto& p = prompts[i];
      const std::string at = "prompts[" + std::to_string(i) + "]";
      if (p.label >= Y) throw ConfigError(at + ".label: out of range");
      if (seen[p.label]++) throw ConfigError(at + ".label: duplicate label");
      if (p.alpha && !(*p.alpha > 0.0)) throw ConfigError(at + ".alpha: must be positive");
      if (p.beta && !(*p.beta > 0.0)) throw ConfigError(at + ".beta: must be positive");
    }
  }
  if (!(sampling.temperature >= 0.0)) throw ConfigError("sampling.temperature: must be >= 0");
  if (sampling.top_k && *sampling.top_k == 0) throw ConfigError("sampling.top_k: must be positive or 'all'");
  if (!(sampling.alpha > 0.0)) throw ConfigError("sampling.alpha: must be positive");
  if (!(sampling.beta > 0.0)) throw ConfigError("sampling.beta: must be positive");
  if (sampling.max_len == 0) throw ConfigError("sampling.max_len: must be positive");
  if (sampling.min_len > sampling.max_len) throw ConfigError("sampling.min_len: exceeds sampling.max_len");
  if (!(sampling.tau_low > 0.0 && sampling.tau_low < sampling.tau_high))
    throw ConfigError("sampling.tau_low/tau_high: need 0 < tau_low < tau_high");

  if (samples_per_label == 0) throw ConfigError("generation.samples_per_label: must be positive");
  if (selection.n == 0) throw ConfigError("selection.n: must be positive");
  if (selection.n > samples_per_label) throw ConfigError("selection.n: exceeds generation.samples_per_label");
  if (!selection.policy.empty() && selection.policy.size() != 1 && selection.policy.size() != Y)
    throw ConfigError("selection.policy: give one rule or one per label");
  for (const auto& p : selection.policy) {
    try {
      parse_selection_rule(p);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("selection.policy: ") + e.what());
    }
  }
  try {
    training.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("training: ") + e.what());
  }
  if (classifier.embed_dim == 0 || classifier.hidden == 0)
    throw ConfigError("classifier.embed_dim/hidden: must be positive");
  if (evaluation.seeds.size() < 2) throw ConfigError("evaluation.seeds: need at least two seeds");
  if (std::set<std::uint64_t>(evaluation.seeds.begin(), evaluation.seeds.end()).size() != evaluation.seeds.size())
    throw ConfigError("evaluation.seeds: duplicate seed");
  if (evaluation.metrics.empty()) throw ConfigError("evaluation.metrics: need at least one metric");
  for (const auto& m : evaluation.metrics) {
    if (m != "accuracy" && m != "f1" && m != "matthews") throw ConfigError("evaluation.metrics: unknown metric '" + m + "'");
    if (m != "accuracy" && Y != 2) throw ConfigError("evaluation.metrics: " + m + " needs a binary task");
  }
  if (evaluation.fewshot_per_label == 0) throw ConfigError("evaluation.fewshot_per_label: must be positive");
  if (run_dir.empty()) throw ConfigError("paths.run_dir: must not be empty");
}

std::string to_yaml(const PipelineConfig& c) {
  YAML::Emitter out;
  auto num = [&](const char* key, double v) { out << YAML::Key << key << YAML::Value << format_double(v); };
  auto uint = [&](const char* key, std::uint64_t v) { out << YAML::Key << key << YAML::Value << v; };
  out << YAML::BeginMap;
  out << YAML::Key << "task" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "type" << YAML::Value << std::string(to_string(c.task.task_type));
  uint("num_labels", c.task.num_labels);
  uint("words_per_class", c.task.words_per_class);
  uint("shared_words", c.task.shared_words);
  num("shared_mass", c.task.shared_mass);
  num("leak_mass", c.task.leak_mass);
  uint("content_words", c.task.content_words);
  num("min_overlap", c.task.min_overlap);
  uint("stop_words", c.task.stop_words);
  uint("successors", c.task.successors);
  uint("min_len", c.task.min_len);
  uint("max_len", c.task.max_len);
  num("noise", c.task.noise);
  uint("corpus_size", c.task.corpus_size);
  uint("eval_size", c.task.eval_size);
  uint("seed", c.task.seed);
  out << YAML::EndMap;

  out << YAML::Key << "lm" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << std::string(lm_kind_name(c.lm.kind));
  out << YAML::Key << "order" << YAML::Value << c.lm.order;
  num("kappa", c.lm.kappa);
  uint("embed_dim", c.lm.embed_dim);
  uint("hidden", c.lm.hidden);
  out << YAML::Key << "epochs" << YAML::Value << c.lm.epochs;
  num("lr", c.lm.lr);
  uint("seed", c.lm.seed);
  out << YAML::EndMap;

  out << YAML::Key << "prompts" << YAML::Value << YAML::BeginSeq;
  for (const auto& p : c.prompts) {
    out << YAML::BeginMap;
    uint("label", p.label);
    out << YAML::Key << "pattern" << YAML::Value << YAML::DoubleQuoted << p.pattern;
    if (p.alpha) num("alpha", *p.alpha);
    if (p.beta) num("beta", *p.beta);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "sampling" << YAML::Value << YAML::BeginMap;
  num("temperature", c.sampling.temperature);
  out << YAML::Key << "top_k" << YAML::Value;
  if (c.sampling.top_k) out << *c.sampling.top_k;
  else out << "all";
  num("alpha", c.sampling.alpha);
  num("beta", c.sampling.beta);
  uint("max_len", c.sampling.max_len);
  uint("min_len", c.sampling.min_len);
  num("tau_low", c.sampling.tau_low);
  num("tau_high", c.sampling.tau_high);
  out << YAML::EndMap;

  out << YAML::Key << "generation" << YAML::Value << YAML::BeginMap;
  uint("samples_per_label", c.samples_per_label);
  out << YAML::EndMap;

  out << YAML::Key << "selection" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "policy" << YAML::Value << YAML::Flow << c.selection.policy;
  uint("n", c.selection.n);
  if (c.selection.merge_pools) out << YAML::Key << "merge_pools" << YAML::Value << *c.selection.merge_pools;
  out << YAML::EndMap;

  out << YAML::Key << "training" << YAML::Value << YAML::BeginMap;
  num("lr", c.training.lr);
  uint("batch_size", c.training.batch_size);
  uint("steps", c.training.steps);
  uint("ensemble_interval", c.training.ensemble_interval);
  num("epsilon", c.training.epsilon);
  num("gamma", c.training.gamma);
  num("delta", c.training.delta);
  num("lambda_max", c.training.lambda_max);
  out << YAML::Key << "scale_step_by_lambda" << YAML::Value << c.training.scale_step_by_lambda;
  out << YAML::EndMap;

  out << YAML::Key << "classifier" << YAML::Value << YAML::BeginMap;
  uint("embed_dim", c.classifier.embed_dim);
  uint("hidden", c.classifier.hidden);
  uint("bigram_buckets", c.classifier.bigram_buckets);
  out << YAML::EndMap;

  out << YAML::Key << "evaluation" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "seeds" << YAML::Value << YAML::Flow << c.evaluation.seeds;
  out << YAML::Key << "metrics" << YAML::Value << YAML::Flow << c.evaluation.metrics;
  uint("fewshot_per_label", c.evaluation.fewshot_per_label);
  out << YAML::EndMap;

  out << YAML::Key << "paths" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "run_dir" << YAML::Value << YAML::DoubleQuoted << c.run_dir;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const PipelineConfig& config) { return fnv1a_hex(to_yaml(config)); }

}  // namespace zsgen
