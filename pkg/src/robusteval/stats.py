"""Correlation and significance utilities.

Covers Pearson, Spearman, Kendall tau-b, the challenge-set tau-like
statistic, the Fisher r-to-z transform and Williams' test for comparing two
dependent correlations that share one variable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Literal, Sequence

import numpy as np
from scipy import stats as _sps

from .errors import DegenerateInputError, OutOfDomainError

SIGNIFICANCE_LEVEL = 0.01


@dataclass(frozen=True)
class PairedScores:
    predicted: tuple[float, ...]
    gold: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "predicted", tuple(float(x) for x in self.predicted))
        object.__setattr__(self, "gold", tuple(float(x) for x in self.gold))
        if len(self.predicted) != len(self.gold):
            raise ValueError(
                f"length mismatch: {len(self.predicted)} predicted vs {len(self.gold)} gold")
        if len(self.predicted) < 2:
            raise DegenerateInputError("need at least two paired scores")


@dataclass(frozen=True)
class ContrastCounts:
    concordant: int = 0
    discordant: int = 0
    ties: int = 0

    def __post_init__(self):
        if min(self.concordant, self.discordant, self.ties) < 0:
            raise ValueError("contrast counts must be non-negative")

    def __add__(self, other: ContrastCounts) -> ContrastCounts:
        return ContrastCounts(self.concordant + other.concordant,
                              self.discordant + other.discordant,
                              self.ties + other.ties)

    @property
    def total(self) -> int:
        return self.concordant + self.discordant + self.ties


def _as_pair(p, gold=None) -> tuple[np.ndarray, np.ndarray]:
    if gold is not None:
        p = PairedScores(p, gold)
    elif not isinstance(p, PairedScores):
        p = PairedScores(*p)
    return np.asarray(p.predicted, dtype=float), np.asarray(p.gold, dtype=float)


def pearson(p: PairedScores | Sequence[float], gold: Sequence[float] | None = None) -> float:
    """Product-moment correlation.

    Accepts either a :class:`PairedScores` or two sequences.
    """
    x, y = _as_pair(p, gold)
    x = x - x.mean()
    y = y - y.mean()
    sxx, syy = float(x @ x), float(y @ y)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateInputError("pearson is undefined for a zero-variance vector")
    r = float(x @ y) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def spearman(p: PairedScores | Sequence[float], gold: Sequence[float] | None = None) -> float:
    """Pearson correlation of fractional (tie-averaged) ranks."""
    x, y = _as_pair(p, gold)
    return pearson(_sps.rankdata(x), _sps.rankdata(y))


def kendall_tau_b(p: PairedScores | Sequence[float], gold: Sequence[float] | None = None) -> float:
    """Kendall tau-b with the usual tie correction."""
    x, y = _as_pair(p, gold)
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise DegenerateInputError("kendall tau-b is undefined when a vector is constant")
    tau = _sps.kendalltau(x, y, variant="b").statistic
    return max(-1.0, min(1.0, float(tau)))


def kendall_tau_like(counts: ContrastCounts) -> float:
    """(concordant - discordant) / (concordant + discordant); ties are ignored."""
    denom = counts.concordant + counts.discordant
    if denom == 0:
        raise DegenerateInputError("tau-like needs at least one non-tied contrast")
    return (counts.concordant - counts.discordant) / denom


def fisher_z(r: float) -> float:
    """0.5 * ln((1 + r) / (1 - r)), evaluated as atanh for accuracy near 0."""
    if not -1.0 < r < 1.0:
        raise OutOfDomainError(f"fisher_z needs |r| < 1, got {r}")
    return math.atanh(r)


def inverse_fisher_z(z: float) -> float:
    return math.tanh(z)


def williams_test(r12: float, r13: float, r23: float, n: int) -> tuple[float, float]:
    """Williams' t for H0: r12 == r13, where variables 2 and 3 correlate by r23.

    Returns ``(t, p)`` with a two-sided p-value from Student's t with n - 3
    degrees of freedom.
    """
    for name, r in (("r12", r12), ("r13", r13), ("r23", r23)):
        if not -1.0 < r < 1.0:
            raise OutOfDomainError(f"{name} must lie in (-1, 1), got {r}")
    if n < 4:
        raise OutOfDomainError(f"williams_test needs n >= 4, got {n}")
    k = 1.0 - r12 ** 2 - r13 ** 2 - r23 ** 2 + 2.0 * r12 * r13 * r23
    if k <= 0.0:
        raise OutOfDomainError("correlations do not form a positive definite matrix")
    rbar = 0.5 * (r12 + r13)
    denom = 2.0 * k * (n - 1) / (n - 3) + rbar ** 2 * (1.0 - r23) ** 3
    t = (r12 - r13) * math.sqrt((n - 1) * (1.0 + r23)) / math.sqrt(denom)
    p = float(2.0 * _sps.t.sf(abs(t), n - 3))
    return t, min(1.0, p)


def macro_average(values: Iterable[float]) -> float:
    values = list(values)
    if not values:
        raise DegenerateInputError("cannot average an empty collection")
    return sum(values) / len(values)


CombineMethod = Literal["transform_then_average", "average_then_transform"]


def fisher_macro_average(correlations: Iterable[float],
                         method: CombineMethod = "transform_then_average") -> float:
    """Average correlations, either in z-space or directly.

    ``"transform_then_average"`` maps each r through fisher_z, averages and maps
    back with tanh. ``"average_then_transform"`` is the plain mean of r (the
    returned value is still a correlation; callers needing z apply fisher_z).
    """
    rs = list(correlations)
    if method == "transform_then_average":
        return inverse_fisher_z(macro_average(fisher_z(r) for r in rs))
    if method == "average_then_transform":
        return macro_average(rs)
    raise ValueError(f"unknown combination method {method!r}")


def compare_correlations(metric_a: Sequence[float], metric_b: Sequence[float],
                         gold: Sequence[float],
                         alpha: float = SIGNIFICANCE_LEVEL) -> dict:
    """Williams' test on the Pearson correlations of two metrics with gold."""
    r12 = pearson(metric_a, gold)
    r13 = pearson(metric_b, gold)
    r23 = pearson(metric_a, metric_b)
    t, p = williams_test(r12, r13, r23, len(gold))
    return {"r_a": r12, "r_b": r13, "r_ab": r23, "t": t, "p": p,
            "significant": p <= alpha}
