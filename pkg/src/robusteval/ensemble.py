"""Weighted ensemble of z-normalized BLEU, chrF and neural scores.

Normalization statistics come from a development set and are reused as-is on
test data. Weights live on the probability simplex and are tuned by an
exhaustive grid search that maximizes Kendall tau-b against gold scores.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import DegenerateInputError
from .records import MetricVector

MEMBERS = ("bleu", "chrf", "neural")
DEFAULT_RESOLUTION = 200
# Tuned on MQM 2021 development data in the original experiments.
REFERENCE_WEIGHTS = (0.02513, 0.04523, 0.92965)


@dataclass
class Normalizer:
    means: dict[str, float]
    stds: dict[str, float]
    ddof: int = 0

    def __post_init__(self):
        for name, s in self.stds.items():
            if not s > 0:
                raise DegenerateInputError(f"std for {name!r} must be positive, got {s}")

    def z(self, metric: str, value):
        return (np.asarray(value, dtype=float) - self.means[metric]) / self.stds[metric]

    def transform(self, scores: Mapping[str, Sequence[float]]) -> dict[str, np.ndarray]:
        return {k: self.z(k, v) for k, v in scores.items()}


def fit_normalizer(dev_scores: Mapping[str, Sequence[float]], ddof: int = 0) -> Normalizer:
    """Mean and standard deviation per metric; ``ddof=0`` is the population std."""
    means, stds = {}, {}
    for name, values in dev_scores.items():
        x = np.asarray(values, dtype=float)
        if x.size < 2:
            raise DegenerateInputError(f"metric {name!r} needs at least two dev scores")
        s = float(x.std(ddof=ddof))
        if s == 0.0:
            raise DegenerateInputError(f"metric {name!r} has zero variance on the dev set")
        means[name] = float(x.mean())
        stds[name] = s
    return Normalizer(means, stds, ddof)


@dataclass(frozen=True)
class EnsembleWeights:
    w_bleu: float
    w_chrf: float
    w_neural: float
    tol: float = field(default=1e-9, repr=False, compare=False)

    def __post_init__(self):
        ws = self.as_tuple()
        if min(ws) < 0:
            raise ValueError(f"weights must be non-negative, got {ws}")
        if abs(sum(ws) - 1.0) > self.tol:
            raise ValueError(f"weights must sum to 1, got {sum(ws)!r}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.w_bleu, self.w_chrf, self.w_neural)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(MEMBERS, self.as_tuple()))


def reference_weights() -> EnsembleWeights:
    # The published weights sum to 1.00001; accept them at table precision.
    return EnsembleWeights(*REFERENCE_WEIGHTS, tol=1e-4)


def ensemble_score(weights: EnsembleWeights, z_bleu, z_chrf, z_neural):
    """Weighted sum of z-scores; works elementwise on arrays."""
    return weights.w_bleu * z_bleu + weights.w_chrf * z_chrf + weights.w_neural * z_neural


def simplex_grid(resolution: int) -> np.ndarray:
    """All (i, j, k) / resolution with i + j + k == resolution.

    Rows come in descending lexicographic order, so the first maximum found is
    the lexicographically largest weight triple.
    """
    if resolution < 1:
        raise ValueError(f"resolution must be >= 1, got {resolution}")
    rows = [(i, j, resolution - i - j)
            for i in range(resolution, -1, -1)
            for j in range(resolution - i, -1, -1)]
    return np.asarray(rows, dtype=float) / resolution


def _tau_b_many(z: np.ndarray, gold: np.ndarray, grid: np.ndarray,
                chunk: int = 2048) -> np.ndarray:
    """Kendall tau-b of ``z @ w`` against gold for every row ``w`` of ``grid``."""
    i, j = np.triu_indices(len(gold), k=1)
    sg = np.sign(gold[i] - gold[j])
    keep = sg != 0
    n_gold = int(keep.sum())
    dz = z[i] - z[j]
    out = np.empty(len(grid))
    for start in range(0, len(grid), chunk):
        sp = np.sign(dz @ grid[start:start + chunk].T)
        num = sg @ sp
        n_pred = np.abs(sp).sum(axis=0)
        with np.errstate(invalid="ignore", divide="ignore"):
            out[start:start + chunk] = np.where(n_pred > 0, num / np.sqrt(n_gold * n_pred), -np.inf)
    return out


def _stack(dev: Sequence[tuple[MetricVector, float]]):
    raw = {m: np.array([getattr(v, m) for v, _ in dev], dtype=float) for m in MEMBERS}
    gold = np.array([g for _, g in dev], dtype=float)
    return raw, gold


def tune_weights(dev: Sequence[tuple[MetricVector, float]],
                 resolution: int = DEFAULT_RESOLUTION,
                 normalizer: Normalizer | None = None) -> EnsembleWeights:
    """Grid-search simplex weights maximizing Kendall tau-b on ``dev``.

    If ``normalizer`` is omitted it is fitted on ``dev`` itself. Ties in tau
    go to the lexicographically largest (w_bleu, w_chrf, w_neural).
    """
    if len(dev) < 2:
        raise DegenerateInputError("development set needs at least two segments")
    raw, gold = _stack(dev)
    if np.all(gold == gold[0]):
        raise DegenerateInputError("gold scores are all tied")
    if normalizer is None:
        normalizer = fit_normalizer(raw)
    z = np.column_stack([normalizer.z(m, raw[m]) for m in MEMBERS])
    grid = simplex_grid(resolution)
    taus = _tau_b_many(z, gold, grid)
    best = int(np.argmax(taus))
    if not math.isfinite(taus[best]):
        raise DegenerateInputError("every grid point produced constant ensemble scores")
    w = grid[best]
    w = w / w.sum()
    return EnsembleWeights(*(float(x) for x in w))


def grid_taus(dev: Sequence[tuple[MetricVector, float]], resolution: int,
              normalizer: Normalizer | None = None) -> tuple[np.ndarray, np.ndarray]:
    """The full grid and its tau-b values, for inspection and plotting."""
    raw, gold = _stack(dev)
    normalizer = normalizer or fit_normalizer(raw)
    z = np.column_stack([normalizer.z(m, raw[m]) for m in MEMBERS])
    grid = simplex_grid(resolution)
    return grid, _tau_b_many(z, gold, grid)


@dataclass
class EnsembleModel:
    """A fitted normalizer plus tuned weights."""

    normalizer: Normalizer
    weights: EnsembleWeights
    resolution: int = DEFAULT_RESOLUTION

    def score(self, bleu, chrf, neural):
        n = self.normalizer
        return ensemble_score(self.weights, n.z("bleu", bleu), n.z("chrf", chrf),
                              n.z("neural", neural))

    def to_json(self) -> dict:
        return {
            "means": dict(self.normalizer.means),
            "stds": dict(self.normalizer.stds),
            "weights": self.weights.as_dict(),
            "resolution": self.resolution,
        }

    @classmethod
    def from_json(cls, doc: Mapping) -> EnsembleModel:
        unknown = set(doc) - {"means", "stds", "weights", "resolution"}
        if unknown:
            raise ValueError(f"unknown keys in ensemble document: {sorted(unknown)}")
        w = doc["weights"]
        return cls(Normalizer(dict(doc["means"]), dict(doc["stds"])),
                   EnsembleWeights(w["bleu"], w["chrf"], w["neural"], tol=1e-4),
                   int(doc.get("resolution", DEFAULT_RESOLUTION)))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n",
                              encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> EnsembleModel:
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def fit_ensemble(dev: Sequence[tuple[MetricVector, float]],
                 resolution: int = DEFAULT_RESOLUTION, ddof: int = 0) -> EnsembleModel:
    raw, _ = _stack(dev)
    normalizer = fit_normalizer(raw, ddof=ddof)
    return EnsembleModel(normalizer, tune_weights(dev, resolution, normalizer), resolution)
