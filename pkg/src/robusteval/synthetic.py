"""Synthetic datasets and bundled reference tables for demos and tests."""

from __future__ import annotations

import json
from importlib import resources

import numpy as np

from .align import BAD, OK
from .challenge import ChallengeItem
from .fusion import Example
from .records import MetricVector, SegmentTriplet


def reference_results() -> dict:
    """Published per-category ACES taus, per-domain MQM Kendall taus and ensemble weights."""
    text = resources.files("robusteval").joinpath("data/reference_results.json").read_text(
        encoding="utf-8")
    return json.loads(text)


def reference_column(table: dict, system: str, systems: list[str]) -> dict[str, float]:
    k = systems.index(system)
    return {key: row[k] for key, row in table.items()}


def ok_fraction_task(n: int, seed: int = 0, vocab_size: int = 30,
                     min_len: int = 3, max_len: int = 10) -> list[Example]:
    """Random triplets whose gold score is the fraction of OK tags.

    Tags are drawn independently of the text, so only a model that reads the
    tags can predict the target.
    """
    rng = np.random.default_rng(seed)
    words = [f"w{i}" for i in range(vocab_size)]

    def sentence(k):
        return " ".join(rng.choice(words, size=k))

    out = []
    for _ in range(n):
        length = int(rng.integers(min_len, max_len + 1))
        p_ok = rng.random()
        tags = [OK if rng.random() < p_ok else BAD for _ in range(length)]
        triplet = SegmentTriplet(sentence(int(rng.integers(min_len, max_len + 1))),
                                 sentence(length),
                                 sentence(int(rng.integers(min_len, max_len + 1))))
        feats = (float(rng.random()), float(rng.random()))
        out.append(Example(triplet, tags, feats, tags.count(OK) / length))
    return out


def perfect_neural_dev(n: int = 40, seed: int = 0) -> list[tuple[MetricVector, float]]:
    """Dev rows where the neural score equals gold and BLEU/chrF are noise."""
    rng = np.random.default_rng(seed)
    gold = rng.normal(size=n)
    return [(MetricVector(float(rng.random()), float(rng.random()), float(g)), float(g))
            for g in gold]


def contrastive_items(per_category_taus: dict[str, dict[str, float]],
                      n_per_category: int = 2000) -> list[ChallengeItem]:
    """Challenge items with precomputed scores reproducing given category taus.

    ``per_category_taus`` maps metric -> category -> tau. Each tau must be a
    multiple of 2 / n_per_category so the concordant count is an integer.
    """
    categories = sorted({c for taus in per_category_taus.values() for c in taus})
    items = []
    for cat in categories:
        n_conc = {}
        for m, taus in per_category_taus.items():
            c = (1.0 + taus[cat]) * n_per_category / 2.0
            if abs(c - round(c)) > 1e-6:
                raise ValueError(f"tau {taus[cat]} for {m}/{cat} is not reachable with "
                                 f"{n_per_category} items")
            n_conc[m] = int(round(c))
        for k in range(n_per_category):
            scores = {m: ((1.0, 0.0) if k < n_conc[m] else (0.0, 1.0)) for m in n_conc}
            items.append(ChallengeItem(
                source=f"src {cat} {k}", good_translation=f"good {k}",
                incorrect_translation=f"bad {k}", reference=f"ref {k}",
                phenomenon=cat, langpair="de-en", id=f"{cat}-{k}", scores=scores))
    return items


def bundled_path(name: str):
    """Filesystem path of a bundled fixture such as ``synthetic_challenge.jsonl``."""
    return resources.files("robusteval").joinpath("data", name)
