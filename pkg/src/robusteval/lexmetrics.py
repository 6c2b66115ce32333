"""Sentence-level BLEU and chrF, reported on a [0, 1] scale."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

from .errors import InvalidReferenceError
from .text import char_ngrams, word_ngrams

SMOOTHING_METHODS = ("exp", "floor", "none")


@dataclass(frozen=True)
class LexicalScore:
    value: float
    metric_name: str
    params: dict[str, Any] = field(default_factory=dict)

    def __float__(self) -> float:
        return self.value


def bleu_statistics(hyp: Sequence[str], ref: Sequence[str], max_order: int = 4):
    """Clipped n-gram matches and hypothesis n-gram totals for orders 1..max_order."""
    matches, totals = [], []
    for n in range(1, max_order + 1):
        h = word_ngrams(hyp, n)
        r = word_ngrams(ref, n)
        matches.append(sum(min(c, r[g]) for g, c in h.items()))
        totals.append(sum(h.values()))
    return matches, totals


def sentence_bleu(
    hyp: Sequence[str],
    ref: Sequence[str],
    max_order: int = 4,
    smoothing: str = "exp",
    floor: float = 0.1,
) -> LexicalScore:
    """Brevity-penalized geometric mean of modified n-gram precisions.

    Orders for which the hypothesis has no n-grams are left out of the mean
    (effective order), so short identical segments still score 1.

    Smoothing applies to orders with zero matches:

    - ``"exp"``: the k-th such order gets ``(1 / 2**k) / total``.
    - ``"floor"``: every such order gets ``floor / total``.
    - ``"none"``: any zero-match order makes the score 0.
    """
    if max_order < 1:
        raise ValueError(f"max_order must be >= 1, got {max_order}")
    if smoothing not in SMOOTHING_METHODS:
        raise ValueError(f"unknown smoothing {smoothing!r}")
    if len(ref) == 0:
        raise InvalidReferenceError("reference must be non-empty")
    params = {"max_order": max_order, "smoothing": smoothing}
    if smoothing == "floor":
        params["floor"] = floor
    if len(hyp) == 0:
        return LexicalScore(0.0, "bleu", params)

    matches, totals = bleu_statistics(hyp, ref, max_order)
    log_sum = 0.0
    orders = 0
    inv = 1.0
    for m, t in zip(matches, totals):
        if t == 0:
            break
        orders += 1
        if m > 0:
            log_sum += math.log(m / t)
        elif smoothing == "exp":
            inv *= 2.0
            log_sum += math.log(1.0 / (inv * t))
        elif smoothing == "floor":
            log_sum += math.log(floor / t)
        else:
            return LexicalScore(0.0, "bleu", params)

    c, r = len(hyp), len(ref)
    bp = 1.0 if c > r else math.exp(1.0 - r / c)
    value = bp * math.exp(log_sum / orders)
    return LexicalScore(min(1.0, value), "bleu", params)


def f_beta(precision: float, recall: float, beta: float) -> float:
    b2 = beta * beta
    denom = b2 * precision + recall
    if denom == 0.0:
        return 0.0
    return (1.0 + b2) * precision * recall / denom


def sentence_chrf(
    hyp: str,
    ref: str,
    max_char_order: int = 6,
    beta: float = 2.0,
    strip_whitespace: bool = True,
) -> LexicalScore:
    """Mean over character orders of the F-beta of n-gram precision and recall.

    Orders where neither side has any n-gram are skipped.
    """
    if max_char_order < 1:
        raise ValueError(f"max_char_order must be >= 1, got {max_char_order}")
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if not ("".join(ref.split()) if strip_whitespace else ref):
        raise InvalidReferenceError("reference must be non-empty")
    params = {"max_char_order": max_char_order, "beta": beta,
              "strip_whitespace": strip_whitespace}

    scores = []
    for n in range(1, max_char_order + 1):
        h = char_ngrams(hyp, n, strip_whitespace)
        r = char_ngrams(ref, n, strip_whitespace)
        h_total, r_total = sum(h.values()), sum(r.values())
        if h_total == 0 and r_total == 0:
            continue
        common = sum((h & r).values())
        p = common / h_total if h_total else 0.0
        rc = common / r_total if r_total else 0.0
        scores.append(f_beta(p, rc, beta))
    value = sum(scores) / len(scores)
    return LexicalScore(min(1.0, value), "chrf", params)
