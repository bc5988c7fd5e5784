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

#include "zsgen/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "zsgen/error.hpp"
#include "zsgen/numeric.hpp"
#include "zsgen/parallel.hpp"
#include "zsgen/rng.hpp"

namespace zsgen {
namespace {

constexpr std::uint64_t kShuffleTag = 0x5348;

}  // namespace

SmoothedTarget smoothed_targets(std::size_t label, std::size_t num_labels, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ConfigError("label smoothing epsilon must be in [0, 1)");
  if (label >= num_labels) throw InvalidSampleError("label out of range");
  SmoothedTarget t{std::vector<double>(num_labels, epsilon / static_cast<double>(num_labels)), epsilon};
  t.q[label] += 1.0 - epsilon;
  return t;
}

LossResult training_loss(std::span<const double> p, std::span<const double> q,
                         std::optional<std::span<const double>> zbar, double lambda) {
  const std::size_t Y = p.size();
  if (q.size() != Y || (zbar && zbar->size() != Y)) throw InvalidSampleError("loss inputs have mismatched sizes");
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  const bool use_kl = zbar.has_value() && lambda > 0.0;

  LossResult r;
  r.grad_logits.assign(Y, 0.0);
  // With p = softmax(l): d(-w_j log p_j)/dl_k = w_j (p_k - 1(j == k)) while p_j is above the floor.
  double active_weight = 0.0;
  for (std::size_t j = 0; j < Y; ++j) {
    const bool floored = p[j] < kProbFloor;
    const double log_p = std::log(std::max(p[j], kProbFloor));
    double w = q[j];
    r.loss -= q[j] * log_p;
    if (use_kl) {
      const double z = (*zbar)[j];
      if (z > 0.0) r.loss -= lambda * z * (log_p - std::log(std::max(z, kProbFloor)));
      w += lambda * z;
    }
    if (!floored) {
      active_weight += w;
      r.grad_logits[j] -= w;
    }
  }
  for (std::size_t k = 0; k < Y; ++k) r.grad_logits[k] += active_weight * p[k];
  return r;
}

EnsembleState::EnsembleState(std::size_t num_labels, double gamma)
    : z_hat_(num_labels, 0.0), z_bar_(num_labels, 0.0), gamma_(gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("ensemble momentum gamma must be in (0, 1)");
}

void EnsembleState::update(std::span<const double> p) {
  if (p.size() != z_hat_.size()) throw InvalidSampleError("ensemble update has wrong size");
  ++t_;
  gamma_pow_ *= gamma_;
  // z_bar as a running weighted mean: w = 1 at t = 1, and a constant p is a fixed point
  const double w = (1.0 - gamma_) / (1.0 - gamma_pow_);
  for (std::size_t j = 0; j < p.size(); ++j) {
    z_hat_[j] = gamma_ * z_hat_[j] + (1.0 - gamma_) * p[j];
    z_bar_[j] += w * (p[j] - z_bar_[j]);
  }
}

double lambda_schedule(int t, double lambda_max) {
  if (t >= 10) return lambda_max;
  const double x = 1.0 - static_cast<double>(t) / 10.0;
  return lambda_max * std::exp(-5.0 * x * x);
}

std::vector<std::size_t> filter_training_set(std::span<const LabeledExample> examples,
                                             std::span<const EnsembleState> states, double delta) {
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < examples.size(); ++i)
    if (states[i].ensemble()[examples[i].label] > delta) kept.push_back(i);
  return kept;
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("training.lr must be > 0");
  if (batch_size < 1) throw ConfigError("training.batch_size must be >= 1");
  if (steps < 1) throw ConfigError("training.steps must be >= 1");
  if (ensemble_interval < 1) throw ConfigError("training.ensemble_interval must be >= 1");
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ConfigError("training.epsilon must be in [0, 1)");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("training.gamma must be in (0, 1)");
  if (!(delta >= 0.0 && delta < 1.0)) throw ConfigError("training.delta must be in [0, 1)");
  if (!(lambda_max >= 0.0)) throw ConfigError("training.lambda_max must be >= 0");
}

TrainConfig TrainConfig::plain() const {
  TrainConfig c = *this;
  c.epsilon = 0.0;
  c.lambda_max = 0.0;
  c.delta = 0.0;
  return c;
}

std::vector<std::size_t> predict_labels(const ClassifierNet& net, std::span<const LabeledExample> examples,
                                        int workers) {
  std::vector<std::size_t> out(examples.size());
  parallel_for(examples.size(), workers,
               [&](std::size_t i) { out[i] = argmax(net.logits(examples[i].tokens)); });
  return out;
}

TrainTrace train_classifier(std::span<const LabeledExample> train, ClassifierNet& net, const TrainConfig& cfg) {
  cfg.validate();
  const std::size_t N = train.size();
  const std::size_t Y = net.num_labels();
  if (N < cfg.batch_size)
    throw ConfigError("training set has " + std::to_string(N) + " samples, fewer than batch size " +
                      std::to_string(cfg.batch_size));
  for (const auto& ex : train)
    if (ex.label >= Y) throw InvalidSampleError("training label out of range");

  std::vector<std::vector<double>> targets(N);
  for (std::size_t i = 0; i < N; ++i) targets[i] = smoothed_targets(train[i].label, Y, cfg.epsilon).q;
  std::vector<EnsembleState> states(N, EnsembleState(Y, cfg.gamma));

  std::vector<std::size_t> active(N);
  std::iota(active.begin(), active.end(), std::size_t{0});
  std::vector<std::size_t> order;
  std::size_t cursor = 0;
  std::uint64_t reshuffles = 0;
  auto reshuffle = [&] {
    order = active;
    CounterRng rng(derive_key(cfg.seed, {kShuffleTag, reshuffles++}));
    shuffle(order, rng);
    cursor = 0;
  };
  reshuffle();

  TrainTrace trace;
  int ensembles = 0;
  double interval_loss = 0.0;
  std::size_t interval_steps = 0;
  std::vector<double> grad(net.params().size());
  std::vector<double> dlogits(Y);
  std::vector<std::size_t> batch(cfg.batch_size);
  ClassifierNet::Cache cache;
  std::vector<std::vector<double>> preds(N);

  auto close_interval = [&](std::size_t step) {
    trace.rows.push_back(TraceRow{step, static_cast<std::size_t>(ensembles),
                                  interval_loss / static_cast<double>(interval_steps),
                                  lambda_schedule(ensembles, cfg.lambda_max), active.size()});
    interval_loss = 0.0;
    interval_steps = 0;
  };

  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    for (auto& b : batch) {
      if (cursor == order.size()) reshuffle();
      b = order[cursor++];
    }
    const double lambda = lambda_schedule(ensembles, cfg.lambda_max);
    const double inv_bs = 1.0 / static_cast<double>(cfg.batch_size);
    std::fill(grad.begin(), grad.end(), 0.0);
    double batch_loss = 0.0;
    for (std::size_t i : batch) {
      net.forward(train[i].tokens, cache);
      const auto p = softmax(cache.logits);
      std::optional<std::span<const double>> zbar;
      if (ensembles > 0) zbar = std::span<const double>(states[i].ensemble());
      const auto lr = training_loss(p, targets[i], zbar, lambda);
      if (!std::isfinite(lr.loss)) throw NumericError("non-finite training loss at step " + std::to_string(step));
      batch_loss += lr.loss;
      for (std::size_t k = 0; k < Y; ++k) dlogits[k] = lr.grad_logits[k] * inv_bs;
      net.backward(train[i].tokens, cache, dlogits, grad);
    }
    const bool kl_active = ensembles > 0 && lambda > 0.0;
    sgd_step(net.params(), grad, kl_active && cfg.scale_step_by_lambda ? cfg.lr / (1.0 + lambda) : cfg.lr);
    interval_loss += batch_loss * inv_bs;
    ++interval_steps;

    if (step % cfg.ensemble_interval == 0) {
      close_interval(step);
      parallel_for(N, cfg.workers, [&](std::size_t i) { preds[i] = net.predict(train[i].tokens); });
      for (std::size_t i = 0; i < N; ++i) states[i].update(preds[i]);
      ++ensembles;
      ++trace.ensemble_updates;
      active = filter_training_set(train, states, cfg.delta);
      if (active.size() < cfg.batch_size) {
        std::vector<std::size_t> all(N);
        std::iota(all.begin(), all.end(), std::size_t{0});
        std::stable_sort(all.begin(), all.end(), [&](std::size_t a, std::size_t b) {
          return states[a].ensemble()[train[a].label] > states[b].ensemble()[train[b].label];
        });
        all.resize(cfg.batch_size);
        std::sort(all.begin(), all.end());
        active = std::move(all);
        trace.fallback_steps.push_back(step);
      }
      reshuffle();
    }
  }
  if (interval_steps > 0) close_interval(cfg.steps);
  return trace;
}

TrainTrace finetune_fewshot_then_generated(std::span<const LabeledExample> fewshot,
                                           std::span<const LabeledExample> generated, ClassifierNet& net,
                                           const TrainConfig& cfg) {
  if (fewshot.empty()) throw ConfigError("few-shot set is empty");
  TrainConfig stage1 = cfg.plain();
  stage1.batch_size = std::min(cfg.batch_size, fewshot.size());
  TrainTrace trace = train_classifier(fewshot, net, stage1);
  if (generated.empty()) return trace;
  TrainTrace stage2 = train_classifier(generated, net, cfg);
  trace.rows.insert(trace.rows.end(), stage2.rows.begin(), stage2.rows.end());
  trace.ensemble_updates += stage2.ensemble_updates;
  trace.fallback_steps.insert(trace.fallback_steps.end(), stage2.fallback_steps.begin(), stage2.fallback_steps.end());
  return trace;
}

}  // namespace zsgen
