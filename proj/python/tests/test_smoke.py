# python/tests/test_smoke.py

# Copyright 2026  csphmm authors

# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#   http://www.apache.org/licenses/LICENSE-2.0
#
# THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
# KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
# WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
# MERCHANTABLITY OR NON-INFRINGEMENT.
# See the Apache 2 License for the specific language governing permissions and
# limitations under the License.

import itertools
import math

import numpy as np
import pytest

import csphmm


def _pipeline_model(seed=3):
    rng = np.random.default_rng(seed)
    means = np.array([[-2.0, 0.0], [2.0, 1.0], [0.0, -2.0]])
    data = []
    for _ in range(6):
        states = np.repeat(np.arange(3), 8)
        data.append(means[states] + rng.normal(scale=0.5, size=(states.size, 2)))
    return csphmm.train_order_pipeline(data, order=3, num_states=3, num_mixtures=1, max_iters=5), data


def test_trained_pipeline_is_valid_and_monotone():
    (model, traces), _ = _pipeline_model()
    assert model.order == 3
    assert model.num_states == 3 and model.dim == 2
    model.validate()
    assert len(traces) == 3
    for trace in traces:
        assert all(b >= a - 1e-8 for a, b in zip(trace, trace[1:]))


def test_forward_matches_path_enumeration():
    (model, _), data = _pipeline_model()
    obs = data[0][:5]
    first_order = csphmm.expand_to_first_order(model)
    assert csphmm.forward_log_likelihood(model, obs) == pytest.approx(
        csphmm.forward_log_likelihood(first_order, obs), rel=1e-10)
    lifted = csphmm.lift_order(csphmm.train_order_pipeline(data, order=1, num_states=3,
                                                           num_mixtures=1, max_iters=3)[0])
    base = csphmm.train_order_pipeline(data, order=1, num_states=3, num_mixtures=1, max_iters=3)[0]
    assert csphmm.forward_log_likelihood(lifted, obs) == pytest.approx(
        csphmm.forward_log_likelihood(base, obs), rel=1e-10)


def test_viterbi_and_sampling():
    (model, _), data = _pipeline_model()
    path, logp = csphmm.viterbi(model, data[1])
    assert len(path) == len(data[1])
    assert logp <= csphmm.forward_log_likelihood(model, data[1])
    states, obs = csphmm.sample(model, 12, 7)
    states2, obs2 = csphmm.sample(model, 12, 7)
    assert states == states2 and np.array_equal(obs, obs2)
    assert obs.shape == (12, 2)


def test_errors_map_to_python_exceptions():
    (model, _), _ = _pipeline_model()
    with pytest.raises(csphmm.InvalidInput):
        csphmm.forward_log_likelihood(model, np.zeros((4, 5)))
    with pytest.raises(csphmm.Error):
        csphmm.forward_log_likelihood(model, np.full((3, 2), np.nan))
    with pytest.raises(csphmm.UndefinedStatistic):
        csphmm.ttest([1, 1, 1], [2, 2, 2])


def test_eer_against_sweep():
    gen = [2.0, 3.0, 3.0, 6.0]
    imp = [0.0, 2.0, 4.0]
    curve = csphmm.evaluate(gen + imp, [True] * len(gen) + [False] * len(imp))
    levels = sorted(set(gen + imp))
    thetas = [-math.inf] + [(a + b) / 2 for a, b in zip(levels, levels[1:])] + [math.inf]
    far = [sum(s >= t for s in imp) / len(imp) for t in thetas]
    frr = [sum(s < t for s in gen) / len(gen) for t in thetas]
    assert list(curve["far"]) == far
    assert list(curve["frr"]) == frr
    assert 0.0 <= curve["eer"] <= 1.0
    assert csphmm.evaluate([1.0, 1.0], [True, False])["eer"] == 0.5
    assert csphmm.evaluate([1.0, 2.0], [True, False])["eer"] == 1.0


def test_ttest_hand_case():
    r = csphmm.ttest([1, 2, 3], [3, 4, 5])
    assert r["t_sample_sd"] == -2.0
    assert not r["significant_sample_sd"]


def test_mfcc_and_prosody_on_a_tone():
    sr = 16000
    t = np.arange(sr // 2) / sr
    tone = 0.3 * np.sign(np.sin(2 * np.pi * 150 * t))
    feats = csphmm.extract_mfcc(tone, sr)
    assert feats.shape[1] == 32
    assert np.all(np.isfinite(feats))
    f0, energy = csphmm.prosody_track(tone, sr)
    assert len(f0) == feats.shape[0] == len(energy)
    voiced = f0[f0 > 0]
    assert voiced.size > 0.9 * f0.size
    assert abs(np.median(voiced) - 150) < 5


def test_cli_pipeline_round_trip(tmp_path):
    corpus = str(tmp_path / "corpus")
    sets = ["--set", "synth.speakers=4", "--set", "synth.repetitions=1", "--set", "synth.states=3",
            "--set", "synth.dim=4", "--set", "protocol.claimants_per_gender=1"]
    code, out, err = csphmm.run_cli(["synth", "-o", corpus] + sets)
    assert code == 0, err
    code, out, err = csphmm.run_cli(["train", "-m", corpus + "/manifest.jsonl", "-o",
                                     str(tmp_path / "models"), "--set", "model.states=3",
                                     "--set", "model.mixtures=1", "--set", "model.max_iters=3"])
    assert code == 0, err
    model = csphmm.load_speaker_model(str(tmp_path / "models" / "spk01.shm3"))
    assert model.has_supra
    assert model.acoustic.order == 3
    code, out, err = csphmm.run_cli(["verify", "--models", str(tmp_path / "models"), "-t",
                                     corpus + "/trials.jsonl", "-o", str(tmp_path / "verify")])
    assert code == 0, err
    assert "eer\tpooled" in out
    code, _, err = csphmm.run_cli(["synth", "-o", corpus, "--set", "synth.speakers=1"])
    assert code != 0 and "speaker" in err
