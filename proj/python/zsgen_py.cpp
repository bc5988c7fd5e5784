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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "zsgen/checkpoint.hpp"
#include "zsgen/config.hpp"
#include "zsgen/error.hpp"
#include "zsgen/pipeline.hpp"
#include "zsgen/sampling.hpp"
#include "zsgen/synth.hpp"
#include "zsgen/training.hpp"

namespace py = pybind11;
using namespace zsgen;

namespace {

py::dict metric_dict(const MetricValues& values) {
  py::dict d;
  for (const auto& [name, v] : values) d[py::str(name)] = v;
  return d;
}

py::list report_rows(const std::vector<ReportRow>& rows) {
  py::list out;
  for (const auto& row : rows) {
    py::dict metrics;
    for (const auto& r : row.results) {
      py::dict m;
      m["mean"] = r.mean;
      m["std"] = r.stddev;
      m["per_seed"] = r.per_seed;
      m["seeds"] = r.seeds;
      metrics[py::str(r.metric)] = m;
    }
    py::dict d;
    d["name"] = row.name;
    d["metrics"] = metrics;
    out.append(d);
  }
  return out;
}

Ablation parse_variant(const std::string& name) {
  for (auto a : kAllAblations)
    if (to_string(a) == name) return a;
  throw ConfigError("unknown variant '" + name + "'");
}

TokenSet token_set(const std::vector<TokenId>& ids, std::size_t vocab) { return TokenSet::of(ids, vocab); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Prompt-driven training data generation for text classifiers.";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<MissingArtifactError>(m, "MissingArtifactError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<InvalidSampleError>(m, "InvalidSampleError", base.ptr());
  py::register_exception<ConstraintUnsatisfiableError>(m, "ConstraintUnsatisfiableError", base.ptr());
  py::register_exception<InsufficientPoolError>(m, "InsufficientPoolError", base.ptr());

  // sampling
  m.def("temperature_probs", [](const std::vector<double>& l, double tau) { return temperature_probs(l, tau); },
        py::arg("logits"), py::arg("tau"));
  m.def(
      "repetition_adjusted_probs",
      [](const std::vector<double>& l, double tau, double alpha, double beta, const std::vector<TokenId>& x_s,
         const std::vector<TokenId>& x_g) {
        return repetition_adjusted_probs(l, tau, alpha, beta, token_set(x_s, l.size()), token_set(x_g, l.size()));
      },
      py::arg("logits"), py::arg("tau"), py::arg("alpha"), py::arg("beta"), py::arg("x_s"), py::arg("x_g"));
  m.def("top_k_filter", [](const std::vector<double>& p, std::size_t k) { return top_k_filter(p, k); },
        py::arg("probs"), py::arg("k"));

  // regularizers
  m.def("smoothed_targets", [](std::size_t y, std::size_t n, double eps) { return smoothed_targets(y, n, eps).q; },
        py::arg("label"), py::arg("num_labels"), py::arg("epsilon"));
  m.def(
      "training_loss",
      [](const std::vector<double>& p, const std::vector<double>& q, std::optional<std::vector<double>> zbar,
         double lambda) {
        std::optional<std::span<const double>> z;
        if (zbar) z = std::span<const double>(*zbar);
        const auto r = training_loss(p, q, z, lambda);
        return py::make_tuple(r.loss, r.grad_logits);
      },
      py::arg("p"), py::arg("q"), py::arg("zbar") = py::none(), py::arg("lam") = 0.0);
  m.def("lambda_schedule", &lambda_schedule, py::arg("t"), py::arg("lambda_max"));

  py::class_<EnsembleState>(m, "EnsembleState")
      .def(py::init<std::size_t, double>(), py::arg("num_labels"), py::arg("gamma") = 0.8)
      .def("update", [](EnsembleState& s, const std::vector<double>& p) { s.update(p); })
      .def_property_readonly("accumulator", &EnsembleState::accumulator)
      .def_property_readonly("ensemble", &EnsembleState::ensemble)
      .def_property_readonly("count", &EnsembleState::count);

  // metrics
  m.def("accuracy", [](const std::vector<std::size_t>& p, const std::vector<std::size_t>& g) { return accuracy(p, g); });
  m.def("f1_score", [](const std::vector<std::size_t>& p, const std::vector<std::size_t>& g) { return f1_score(p, g); });
  m.def("matthews", [](const std::vector<std::size_t>& p, const std::vector<std::size_t>& g) { return matthews(p, g); });

  // config and pipeline
  py::class_<PipelineConfig>(m, "Config")
      .def_static("load", &load_config, py::arg("path"), py::arg("overrides") = std::vector<std::string>{})
      .def_static("parse", &parse_config, py::arg("text"), py::arg("overrides") = std::vector<std::string>{})
      .def("to_yaml", &to_yaml)
      .def_property_readonly("hash", &config_hash)
      .def_property_readonly("seeds", [](const PipelineConfig& c) { return c.evaluation.seeds; })
      .def_readwrite("run_dir", &PipelineConfig::run_dir);

  py::class_<SyntheticTask>(m, "Task")
      .def(py::init([](const PipelineConfig& c) { return make_task(c.task); }), py::arg("config"))
      .def_readonly("bayes_accuracy", &SyntheticTask::bayes_accuracy)
      .def_readonly("warnings", &SyntheticTask::warnings)
      .def_property_readonly("vocab", [](const SyntheticTask& t) { return t.vocab.tokens(); })
      .def_property_readonly("eval_size", [](const SyntheticTask& t) { return t.eval.size(); });

  py::class_<AutoregressiveLM>(m, "LanguageModel")
      .def(py::init([](const PipelineConfig& c, const SyntheticTask& t) { return pretrain_lm(c, t); }),
           py::arg("config"), py::arg("task"), py::call_guard<py::gil_scoped_release>())
      .def("next_token_logits",
           [](const AutoregressiveLM& lm, const std::vector<TokenId>& ctx) { return lm.next_token_logits(ctx); })
      .def("save", [](const AutoregressiveLM& lm, const std::string& path, const SyntheticTask& t) {
        save_checkpoint(path, lm.to_checkpoint(t.vocab));
      });

  m.def(
      "run_pipeline",
      [](const PipelineConfig& c, const SyntheticTask& t, const AutoregressiveLM& lm, std::uint64_t seed,
         const std::string& variant, int workers) {
        MetricValues values;
        {
          py::gil_scoped_release release;
          const auto a = parse_variant(variant);
          auto pools = generate_stage(c, t, lm, seed, workers);
          score_stage(c, t, lm, pools, workers);
          const auto trained = train_stage(c, t, select_stage(c, pools, seed, a), seed, workers, a);
          values = evaluate(c, t, trained.net, workers);
        }
        return metric_dict(values);
      },
      py::arg("config"), py::arg("task"), py::arg("lm"), py::arg("seed"), py::arg("variant") = "full",
      py::arg("workers") = 1);
  m.def(
      "run_ablation",
      [](const PipelineConfig& c, const SyntheticTask& t, const AutoregressiveLM& lm, int workers) {
        std::vector<ReportRow> rows;
        {
          py::gil_scoped_release release;
          rows = run_ablation(c, t, lm, workers);
        }
        return report_rows(rows);
      },
      py::arg("config"), py::arg("task"), py::arg("lm"), py::arg("workers") = 1);
  m.def(
      "run_fewshot",
      [](const PipelineConfig& c, const SyntheticTask& t, const AutoregressiveLM& lm, int workers) {
        std::vector<ReportRow> rows;
        {
          py::gil_scoped_release release;
          rows = run_fewshot(c, t, lm, workers);
        }
        return report_rows(rows);
      },
      py::arg("config"), py::arg("task"), py::arg("lm"), py::arg("workers") = 1);

  m.def("checkpoint_arrays", [](const std::string& path) {
    const auto c = load_checkpoint(path);
    py::dict out;
    for (const auto& a : c.arrays) out[py::str(a.name)] = py::make_tuple(a.dims, a.data);
    return py::make_tuple(c.vocab, out);
  });
}
