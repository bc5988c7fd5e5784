# Copyright (c) 2026 The zsgen Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math
import os
import pathlib

import pytest

import zsgen

CONFIGS = pathlib.Path(os.environ.get("ZSGEN_CONFIG_DIR", pathlib.Path(__file__).resolve().parents[2] / "configs"))


def test_temperature_probs():
    p = zsgen.temperature_probs([2.0, 1.0, 0.0], 1.0)
    assert p == pytest.approx([0.6652, 0.2447, 0.0900], abs=1e-4)
    with pytest.raises(zsgen.ConfigError):
        zsgen.temperature_probs([1.0], -1.0)


def test_repetition_hand_example():
    p = zsgen.repetition_adjusted_probs([1.0, 1.0, 1.0], 1.0, 0.8, 1.2, [0], [1])
    assert p == pytest.approx([0.4102, 0.2704, 0.3195], abs=1e-4)


def test_top_k():
    assert zsgen.top_k_filter([0.5, 0.3, 0.2], 2) == pytest.approx([0.625, 0.375, 0.0])


def test_regularizers():
    assert zsgen.smoothed_targets(0, 3, 0.15) == pytest.approx([0.90, 0.05, 0.05])
    loss, grad = zsgen.training_loss([0.925, 0.075], [0.925, 0.075])
    assert loss == pytest.approx(0.2664, abs=1e-3)
    assert len(grad) == 2
    assert zsgen.lambda_schedule(0, 10.0) == pytest.approx(10 * math.exp(-5), abs=1e-12)
    e = zsgen.EnsembleState(2, 0.8)
    e.update([0.6, 0.4])
    assert e.ensemble == [0.6, 0.4]
    e.update([1.0, 0.0])
    assert e.ensemble == pytest.approx([0.8222, 0.1778], abs=1e-4)
    assert e.count == 2


def test_metrics():
    p = [1] * 8 + [0] * 2
    g = [1] * 6 + [0] * 2 + [1] * 2
    assert zsgen.f1_score(p, g) == 0.75
    assert zsgen.matthews([1, 1], [0, 1]) == 0.0
    with pytest.raises(zsgen.ConfigError):
        zsgen.accuracy([], [])


def test_config_errors():
    with pytest.raises(zsgen.ConfigError, match="training.stpes"):
        zsgen.Config.parse("training:\n  stpes: 3\n")
    with pytest.raises(zsgen.MissingArtifactError):
        zsgen.Config.load("/nonexistent.yaml")


def test_small_pipeline(tmp_path):
    cfg = zsgen.Config.load(
        str(CONFIGS / "single_separable.yaml"),
        ["generation.samples_per_label=200", "selection.n=60", "training.steps=120", "evaluation.seeds=[1, 2]"],
    )
    assert zsgen.Config.parse(cfg.to_yaml()).hash == cfg.hash
    task = zsgen.Task(cfg)
    assert 0.9 < task.bayes_accuracy <= 1.0
    lm = zsgen.LanguageModel(cfg, task)
    a = zsgen.run_pipeline(cfg, task, lm, 1)
    b = zsgen.run_pipeline(cfg, task, lm, 1, workers=3)
    assert a == b
    assert set(a) == {"accuracy", "f1", "matthews"}
    rows = zsgen.run_ablation(cfg, task, lm)
    assert [r["name"] for r in rows] == ["full", "-selection", "-smooth", "-ensemble"]
    assert len(rows[0]["metrics"]["accuracy"]["per_seed"]) == 2

    path = tmp_path / "lm.sglm"
    lm.save(str(path), task)
    vocab, arrays = zsgen.checkpoint_arrays(str(path))
    assert vocab == task.vocab
    assert arrays
