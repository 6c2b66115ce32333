import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from robusteval.ensemble import (EnsembleModel, EnsembleWeights, REFERENCE_WEIGHTS,
                                 ensemble_score, fit_ensemble, fit_normalizer, grid_taus,
                                 reference_weights, simplex_grid, tune_weights)
from robusteval.errors import DegenerateInputError
from robusteval.records import MetricVector

import oracles


def perfect_neural_dev(n=40, seed=0):
    rng = np.random.default_rng(seed)
    gold = rng.normal(size=n)
    return [(MetricVector(float(rng.random()), float(rng.random()), float(g)), float(g))
            for g in gold]


def test_two_point_normalizer():
    n = fit_normalizer({"m": [0.0, 2.0]})
    assert n.means["m"] == 1.0 and n.stds["m"] == 1.0
    assert fit_normalizer({"m": [0.0, 2.0]}, ddof=1).stds["m"] == pytest.approx(2 ** 0.5)


def test_standardized_dev_has_unit_moments():
    dev = [0.3, 0.1, 0.7, 0.55, 0.2, 0.9]
    n = fit_normalizer({"m": dev})
    z = n.z("m", dev)
    assert z.mean() == pytest.approx(0.0, abs=1e-12)
    assert z.std() == pytest.approx(1.0, abs=1e-12)


def test_out_of_range_test_scores():
    dev = [1.0, 2.0, 3.0, 4.0, 5.0]
    n = fit_normalizer({"m": dev})
    # mean 3, population std sqrt(2): dev |z| tops out at 2/sqrt(2).
    max_dev = max(abs(n.z("m", dev)))
    assert max_dev == pytest.approx(2 / 2 ** 0.5)
    assert abs(n.z("m", 8.0)) == pytest.approx(5 / 2 ** 0.5)
    assert abs(n.z("m", 8.0)) > max_dev and abs(n.z("m", -1.0)) > max_dev


def test_normalizer_degenerate():
    with pytest.raises(DegenerateInputError):
        fit_normalizer({"m": [1.0, 1.0, 1.0]})
    with pytest.raises(DegenerateInputError):
        fit_normalizer({"m": [1.0]})


def test_weights_validation():
    with pytest.raises(ValueError):
        EnsembleWeights(0.5, 0.5, 0.5)
    with pytest.raises(ValueError):
        EnsembleWeights(-0.1, 0.6, 0.5)
    EnsembleWeights(0.2, 0.3, 0.5)


def test_ensemble_score_examples():
    assert ensemble_score(EnsembleWeights(0, 0, 1), 0.3, -2.0, 1.7) == 1.7
    assert ensemble_score(EnsembleWeights(1 / 3, 1 / 3, 1 / 3), 3, 0, 0) == pytest.approx(1.0)
    w = reference_weights()
    assert ensemble_score(w, 1, 1, 1) == pytest.approx(1.00001, abs=1e-9)
    assert w.as_tuple() == REFERENCE_WEIGHTS


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_ensemble_linear(a, b, c, k):
    w = EnsembleWeights(0.2, 0.3, 0.5)
    assert ensemble_score(w, a + k, b, c) - ensemble_score(w, a, b, c) == pytest.approx(
        0.2 * k, abs=1e-9)


def test_simplex_grid():
    g = simplex_grid(4)
    assert len(g) == 15
    assert np.allclose(g.sum(axis=1), 1.0)
    assert tuple(g[0]) == (1.0, 0.0, 0.0)
    assert [tuple(r) for r in g] == sorted((tuple(r) for r in g), reverse=True)
    assert len(simplex_grid(1)) == 3


def test_grid_taus_match_bruteforce():
    dev = perfect_neural_dev(25, seed=3)
    grid, taus = grid_taus(dev, 6)
    n = fit_normalizer({m: [getattr(v, m) for v, _ in dev] for m in ("bleu", "chrf", "neural")})
    gold = [g for _, g in dev]
    for w, tau in zip(grid, taus):
        scores = [w[0] * n.z("bleu", v.bleu) + w[1] * n.z("chrf", v.chrf)
                  + w[2] * n.z("neural", v.neural) for v, _ in dev]
        assert tau == pytest.approx(oracles.kendall_tau_b(scores, gold), abs=1e-12)


def test_tune_prefers_perfect_neural():
    dev = perfect_neural_dev()
    w = tune_weights(dev, resolution=20)
    assert w.w_neural >= w.w_bleu and w.w_neural >= w.w_chrf
    # Exhaustive check that the returned point attains the grid maximum.
    grid, taus = grid_taus(dev, 20)
    best = taus.max()
    k = int(np.flatnonzero(np.all(np.isclose(grid, w.as_tuple()), axis=1))[0])
    assert taus[k] == best == pytest.approx(1.0)


def test_identical_members_tie_break_to_first_vertex():
    rng = np.random.default_rng(1)
    x = rng.normal(size=15)
    gold = x + 0.5 * rng.normal(size=15)
    dev = [(MetricVector(float(v), float(v), float(v)), float(g)) for v, g in zip(x, gold)]
    assert tune_weights(dev, 10).as_tuple() == (1.0, 0.0, 0.0)


def test_resolution_one_picks_best_vertex():
    dev = perfect_neural_dev()
    assert tune_weights(dev, 1).as_tuple() == (0.0, 0.0, 1.0)


def test_tune_degenerate_gold():
    dev = [(MetricVector(float(i), float(i), float(i)), 1.0) for i in range(12)]
    with pytest.raises(DegenerateInputError):
        tune_weights(dev, 5)


def test_weights_on_simplex():
    for seed in range(5):
        w = tune_weights(perfect_neural_dev(15, seed), 7)
        assert abs(sum(w.as_tuple()) - 1.0) <= 1e-9


@settings(max_examples=25, deadline=None)
@given(scale=st.floats(0.1, 10), shift=st.floats(-5, 5), seed=st.integers(0, 50))
def test_affine_invariance_of_ranking(scale, shift, seed):
    rng = np.random.default_rng(seed)
    dev = [(MetricVector(*map(float, rng.random(3))), float(rng.normal())) for _ in range(20)]
    test = [MetricVector(*map(float, rng.random(3))) for _ in range(10)]

    def ranking(dev_rows, test_rows):
        ens = fit_ensemble(dev_rows, resolution=8)
        s = [ens.score(v.bleu, v.chrf, v.neural) for v in test_rows]
        return list(np.argsort(s, kind="stable")), ens.weights.as_tuple()

    moved = lambda v: MetricVector(v.bleu * scale + shift, v.chrf, v.neural)
    r1, w1 = ranking(dev, test)
    r2, w2 = ranking([(moved(v), g) for v, g in dev], [moved(v) for v in test])
    assert w1 == w2
    assert r1 == r2


def test_neural_only_weights_reproduce_neural_ranking():
    dev = perfect_neural_dev(30, seed=4)
    ens = EnsembleModel(fit_normalizer({m: [getattr(v, m) for v, _ in dev]
                                        for m in ("bleu", "chrf", "neural")}),
                        EnsembleWeights(0, 0, 1))
    neural = [v.neural for v, _ in dev]
    scores = [ens.score(v.bleu, v.chrf, v.neural) for v, _ in dev]
    assert list(np.argsort(scores)) == list(np.argsort(neural))


def test_json_roundtrip(tmp_path):
    ens = fit_ensemble(perfect_neural_dev(), resolution=10)
    path = tmp_path / "ens.json"
    ens.save(path)
    doc = json.loads(path.read_text())
    assert set(doc) == {"means", "stds", "weights", "resolution"}
    assert doc["resolution"] == 10
    back = EnsembleModel.load(path)
    assert back.weights == ens.weights
    assert back.normalizer.means == ens.normalizer.means
    with pytest.raises(ValueError):
        EnsembleModel.from_json({**doc, "extra": 1})
