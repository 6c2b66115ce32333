"""Segment scoring with any mix of lexical, neural and ensemble metrics."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

from .ensemble import EnsembleModel
from .fusion import FusionModel
from .lexmetrics import sentence_bleu, sentence_chrf
from .records import SegmentTriplet
from .text import tokenize

METRICS = ("bleu", "chrf", "fusion", "ensemble")
THREADS_ENV = "ROBUSTEVAL_THREADS"


def max_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _map(fn: Callable, items: Sequence, threads: int | None = None) -> list:
    threads = threads or max_threads()
    if threads == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def bleu_score(hyp: str, ref: str, tokenizer: str = "word") -> float:
    return sentence_bleu(tokenize(hyp, tokenizer), tokenize(ref, tokenizer)).value


def chrf_score(hyp: str, ref: str) -> float:
    return sentence_chrf(hyp, ref).value


def score_segments(triplets: Sequence[SegmentTriplet], metrics: Sequence[str],
                   model: FusionModel | None = None, ensemble: EnsembleModel | None = None,
                   tokenizer: str = "word", threads: int | None = None,
                   ) -> dict[str, list[float]]:
    """Scores per metric, in input order."""
    unknown = [m for m in metrics if m not in METRICS]
    if unknown:
        raise ValueError(f"unknown metrics {unknown}; choose from {list(METRICS)}")
    if ("fusion" in metrics or "ensemble" in metrics) and model is None:
        raise ValueError("fusion and ensemble scores need a fusion model")
    if "ensemble" in metrics and ensemble is None:
        raise ValueError("ensemble scores need a fitted ensemble (normalizer and weights)")

    need = set(metrics)
    if "ensemble" in need:
        need |= {"bleu", "chrf", "fusion"}
    out: dict[str, list[float]] = {}
    if "bleu" in need:
        out["bleu"] = _map(lambda t: bleu_score(t.hypothesis, t.reference, tokenizer),
                           triplets, threads)
    if "chrf" in need:
        out["chrf"] = _map(lambda t: chrf_score(t.hypothesis, t.reference), triplets, threads)
    if "fusion" in need:
        out["fusion"] = _map(model.predict, triplets, threads)
    if "ensemble" in need:
        out["ensemble"] = [float(ensemble.score(b, c, n)) for b, c, n
                           in zip(out["bleu"], out["chrf"], out["fusion"])]
    return {m: out[m] for m in metrics}


def make_scorer(metric: str, model: FusionModel | None = None,
                ensemble: EnsembleModel | None = None,
                tokenizer: str = "word") -> Callable[[str, str, str], float]:
    """A ``scorer(src, hyp, ref) -> float`` for the challenge harness."""
    def scorer(src: str, hyp: str, ref: str) -> float:
        t = SegmentTriplet(src, hyp, ref)
        return score_segments([t], [metric], model, ensemble, tokenizer, threads=1)[metric][0]
    return scorer
