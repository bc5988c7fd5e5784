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
#include <span>
#include <vector>

#include "zsgen/classifier_net.hpp"
#include "zsgen/sample.hpp"

namespace zsgen {

/// Floor applied inside every log of the training objective.
inline constexpr double kProbFloor = 1e-8;

struct SmoothedTarget {
  std::vector<double> q;
  double epsilon = 0.0;
};

/// q_j = 1(j == y)(1 - eps) + eps / |Y|.
SmoothedTarget smoothed_targets(std::size_t label, std::size_t num_labels, double epsilon);

struct LossResult {
  double loss = 0.0;
  std::vector<double> grad_logits;  // dloss/dlogits, with p = softmax(logits)
};

/// -sum_j q_j log p_j - lambda * sum_j zbar_j log(p_j / zbar_j).
/// `zbar` is a fixed target; without it (or with lambda = 0) this is the
/// smoothed cross-entropy.
LossResult training_loss(std::span<const double> p, std::span<const double> q,
                         std::optional<std::span<const double>> zbar, double lambda);

/// Bias-corrected exponential moving average of one sample's predictions.
class EnsembleState {
 public:
  EnsembleState() = default;
  EnsembleState(std::size_t num_labels, double gamma);

  void update(std::span<const double> p);

  const std::vector<double>& accumulator() const noexcept { return z_hat_; }
  const std::vector<double>& ensemble() const noexcept { return z_bar_; }
  int count() const noexcept { return t_; }
  double gamma() const noexcept { return gamma_; }

 private:
  std::vector<double> z_hat_;
  std::vector<double> z_bar_;
  double gamma_ = 0.8;
  double gamma_pow_ = 1.0;  // gamma^t
  int t_ = 0;
};

/// lambda_max * exp(-5 (1 - t/10)^2) for t < 10, lambda_max afterwards.
double lambda_schedule(int t, double lambda_max);

/// Indices i with ensemble(i)[label(i)] > delta (strict).
std::vector<std::size_t> filter_training_set(std::span<const LabeledExample> examples,
                                             std::span<const EnsembleState> states, double delta);

struct TrainConfig {
  double lr = 1.0;  // 1e-5 in the large-model setting; rescaled for the toy net
  std::size_t batch_size = 16;
  std::size_t steps = 1125;
  std::size_t ensemble_interval = 100;
  double epsilon = 0.15;
  double gamma = 0.8;
  double delta = 0.8;
  double lambda_max = 10.0;
  /// While the KL term is active, step with lr / (1 + lambda). The objective
  /// is then a cross-entropy of fixed scale against (q + lambda zbar) / (1 + lambda).
  bool scale_step_by_lambda = true;
  std::uint64_t seed = 0;
  int workers = 1;

  void validate() const;
  /// Unregularized cross-entropy variant of this config.
  TrainConfig plain() const;
};

struct TraceRow {
  std::size_t step = 0;      // last step of the interval
  std::size_t interval = 0;  // ensemble updates performed before the interval
  double loss = 0.0;         // mean minibatch loss over the interval
  double lambda = 0.0;       // lambda_schedule(interval, lambda_max)
  std::size_t filtered_size = 0;

  bool operator==(const TraceRow&) const = default;
};

struct TrainTrace {
  std::vector<TraceRow> rows;
  std::size_t ensemble_updates = 0;
  std::vector<std::size_t> fallback_steps;  // steps where |T*| < bs forced the top-z fallback

  bool operator==(const TrainTrace&) const = default;
};

/// Fine-tunes `net` in place for exactly cfg.steps minibatch steps.
TrainTrace train_classifier(std::span<const LabeledExample> train, ClassifierNet& net, const TrainConfig& cfg);

/// Plain cross-entropy on the few-shot set, then regularized training on the
/// generated set from those parameters with fresh ensemble state.
TrainTrace finetune_fewshot_then_generated(std::span<const LabeledExample> fewshot,
                                           std::span<const LabeledExample> generated, ClassifierNet& net,
                                           const TrainConfig& cfg);

std::vector<std::size_t> predict_labels(const ClassifierNet& net, std::span<const LabeledExample> examples,
                                        int workers = 1);

}  // namespace zsgen
