"""Challenge-set harness for contrastive good/incorrect translation pairs.

Reads ACES/DEMETR-style JSONL, scores both translations of each item with a
metric, and reports per-phenomenon tau-like values, the severity-weighted
ACES-Score, severity-bucket accuracy and language-pair group aggregates.
"""

from __future__ import annotations

import csv
import io
import json
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from .errors import (DegenerateInputError, IncompleteCategoriesError,
                     IncompleteScoresError, SchemaError)
from .stats import ContrastCounts, kendall_tau_like

SEVERITIES = ("base", "critical", "major", "minor")
GROUPS = ("en-xx", "xx-en", "xx-yy")

ACES_CATEGORIES = (
    "addition",
    "omission",
    "mistranslation",
    "overtranslation",
    "undertranslation",
    "untranslated",
    "do-not-translate",
    "real-world-knowledge",
    "wrong-language",
    "punctuation",
)
DEFAULT_ACES_WEIGHTS = {
    "addition": 5.0,
    "omission": 5.0,
    "mistranslation": 5.0,
    "overtranslation": 5.0,
    "undertranslation": 5.0,
    "untranslated": 1.0,
    "do-not-translate": 1.0,
    "real-world-knowledge": 1.0,
    "wrong-language": 1.0,
    "punctuation": 0.1,
}

Scorer = Callable[[str, str, str], float]


@dataclass(frozen=True)
class ChallengeItem:
    source: str
    good_translation: str
    incorrect_translation: str
    reference: str
    phenomenon: str
    langpair: str = ""
    severity: str | None = None
    category: str | None = None
    id: str | None = None
    scores: Mapping[str, tuple[float, float]] | None = None

    def __post_init__(self):
        if not self.phenomenon:
            raise SchemaError("phenomenon must be non-empty")
        if self.good_translation == self.incorrect_translation:
            raise SchemaError("good and incorrect translations must differ")
        if self.severity is not None and self.severity not in SEVERITIES:
            raise SchemaError(f"unknown severity {self.severity!r}")


_REQUIRED = ("source", "good-translation", "incorrect-translation", "reference", "phenomena")
_OPTIONAL = ("langpair", "severity", "category", "id", "scores")


def item_from_json(obj: Mapping, line: int | None = None) -> ChallengeItem:
    where = f" (line {line})" if line is not None else ""
    missing = [k for k in _REQUIRED if k not in obj]
    if missing:
        raise SchemaError(f"missing keys {missing}{where}")
    unknown = set(obj) - set(_REQUIRED) - set(_OPTIONAL)
    if unknown:
        raise SchemaError(f"unknown keys {sorted(unknown)}{where}")
    scores = obj.get("scores")
    if scores is not None:
        try:
            scores = {k: (float(v[0]), float(v[1])) for k, v in scores.items()}
        except (TypeError, ValueError, IndexError, AttributeError):
            raise SchemaError(f"scores must map metric -> [good, bad]{where}") from None
    try:
        return ChallengeItem(
            source=obj["source"],
            good_translation=obj["good-translation"],
            incorrect_translation=obj["incorrect-translation"],
            reference=obj["reference"],
            phenomenon=obj["phenomena"],
            langpair=obj.get("langpair", ""),
            severity=obj.get("severity"),
            category=obj.get("category"),
            id=None if obj.get("id") is None else str(obj["id"]),
            scores=scores,
        )
    except SchemaError as e:
        raise SchemaError(f"{e}{where}") from None


def read_jsonl(path: str | Path) -> list[ChallengeItem]:
    items = []
    with open(path, encoding="utf-8") as f:
        for n, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise SchemaError(f"invalid JSON (line {n}): {e.msg}") from None
            items.append(item_from_json(obj, n))
    return items


def score_items(items: Sequence[ChallengeItem], scorer: Scorer) -> list[tuple[float, float]]:
    """(good_score, bad_score) for each item under ``scorer(src, hyp, ref)``."""
    return [(scorer(it.source, it.good_translation, it.reference),
             scorer(it.source, it.incorrect_translation, it.reference)) for it in items]


def precomputed_scores(items: Sequence[ChallengeItem], metric: str) -> list[tuple[float, float]]:
    out = []
    for k, it in enumerate(items):
        if not it.scores or metric not in it.scores:
            raise IncompleteScoresError(f"item {k} has no precomputed scores for {metric!r}")
        out.append(it.scores[metric])
    return out


def _check_lengths(items, scores) -> None:
    if len(scores) != len(items):
        raise IncompleteScoresError(f"{len(items)} items but {len(scores)} score pairs")
    for k, s in enumerate(scores):
        if s is None or len(s) != 2 or any(v is None for v in s):
            raise IncompleteScoresError(f"missing score pair for item {k}")


def _outcome(good: float, bad: float) -> ContrastCounts:
    if good > bad:
        return ContrastCounts(1, 0, 0)
    if good < bad:
        return ContrastCounts(0, 1, 0)
    return ContrastCounts(0, 0, 1)


def contrast_counts(items: Sequence[ChallengeItem],
                    scores: Sequence[tuple[float, float]],
                    key: Callable[[ChallengeItem], str] = lambda it: it.phenomenon,
                    ) -> dict[str, ContrastCounts]:
    """Concordant / discordant / tied counts grouped by ``key`` (phenomenon by default)."""
    _check_lengths(items, scores)
    out: dict[str, ContrastCounts] = {}
    for it, (good, bad) in zip(items, scores):
        k = key(it)
        out[k] = out.get(k, ContrastCounts()) + _outcome(good, bad)
    return dict(sorted(out.items()))


def tau_like_table(counts: Mapping[str, ContrastCounts]) -> dict[str, float | None]:
    """Tau-like per group; None where every contrast is tied."""
    out = {}
    for k, c in counts.items():
        out[k] = kendall_tau_like(c) if c.concordant + c.discordant else None
    return out


def category_of(item: ChallengeItem, mapping: Mapping[str, str] | None = None) -> str | None:
    """Top-level ACES category for an item.

    Resolution order: the item's explicit ``category``, the caller's
    ``mapping``, an exact top-level name, then a top-level name used as a
    hyphenated prefix (``"untranslated-vs-ref-word"`` -> ``"untranslated"``).
    """
    if item.category:
        return item.category
    p = item.phenomenon
    if mapping and p in mapping:
        return mapping[p]
    if p in ACES_CATEGORIES:
        return p
    for c in ACES_CATEGORIES:
        if p.startswith(c + "-"):
            return c
    return None


def category_taus(items: Sequence[ChallengeItem], scores: Sequence[tuple[float, float]],
                  mapping: Mapping[str, str] | None = None) -> dict[str, float]:
    """Top-level tau: unweighted mean of its sub-phenomenon taus.

    Phenomena without a resolvable category, or with only tied contrasts, are
    left out.
    """
    per_phen = tau_like_table(contrast_counts(items, scores))
    cat_of_phen = {}
    for it in items:
        cat_of_phen.setdefault(it.phenomenon, category_of(it, mapping))
    grouped: dict[str, list[float]] = defaultdict(list)
    for phen, tau in per_phen.items():
        cat = cat_of_phen[phen]
        if cat is not None and tau is not None:
            grouped[cat].append(tau)
    return {c: sum(v) / len(v) for c, v in sorted(grouped.items())}


def aces_score(per_category_tau: Mapping[str, float],
               weights: Mapping[str, float] | None = None) -> float:
    """Severity-weighted sum of the top-level category taus."""
    weights = DEFAULT_ACES_WEIGHTS if weights is None else weights
    if any(w <= 0 for w in weights.values()):
        raise ValueError("ACES weights must be positive")
    missing = [c for c in weights if c not in per_category_tau]
    if missing:
        raise IncompleteCategoriesError(f"missing categories: {missing}")
    return sum(w * per_category_tau[c] for c, w in weights.items())


@dataclass(frozen=True)
class SeverityTable:
    correct: dict[str, int]
    total: dict[str, int]

    @property
    def accuracy(self) -> dict[str, float]:
        return {b: self.correct[b] / self.total[b] for b in self.total}

    @property
    def micro(self) -> float:
        return sum(self.correct.values()) / sum(self.total.values())

    @property
    def macro(self) -> float:
        acc = self.accuracy
        return sum(acc.values()) / len(acc)

    def to_json(self) -> dict:
        return {"accuracy": self.accuracy, "all": self.micro,
                "correct": dict(self.correct), "total": dict(self.total)}


def severity_accuracy(items: Sequence[ChallengeItem],
                      scores: Sequence[tuple[float, float]]) -> SeverityTable:
    """Fraction of items per severity bucket where good strictly beats bad.

    Ties count as errors. The ``micro`` property pools items over buckets.
    """
    _check_lengths(items, scores)
    correct: dict[str, int] = {}
    total: dict[str, int] = {}
    for k, (it, (good, bad)) in enumerate(zip(items, scores)):
        if it.severity not in SEVERITIES:
            raise SchemaError(f"item {k} has severity {it.severity!r}")
        total[it.severity] = total.get(it.severity, 0) + 1
        correct[it.severity] = correct.get(it.severity, 0) + int(good > bad)
    if not total:
        raise DegenerateInputError("no items to score")
    order = [s for s in SEVERITIES if s in total]
    return SeverityTable({s: correct[s] for s in order}, {s: total[s] for s in order})


def langpair_group(langpair: str) -> str:
    parts = langpair.split("-")
    if len(parts) != 2 or not all(p.isalpha() and p.islower() for p in parts):
        raise SchemaError(f"unparseable language pair {langpair!r}")
    src, tgt = parts
    if src == "en":
        return "en-xx"
    if tgt == "en":
        return "xx-en"
    return "xx-yy"


def aggregate_langpairs(per_pair: Mapping[str, float]) -> dict:
    """Group per-language-pair values and average them.

    Each group value is the unweighted mean over its language pairs; the
    balanced average is the unweighted mean over the groups that are present.
    """
    grouped: dict[str, dict[str, float]] = {}
    for lp, v in sorted(per_pair.items()):
        grouped.setdefault(langpair_group(lp), {})[lp] = v
    groups = {g: sum(d.values()) / len(d.values()) for g in GROUPS if (d := grouped.get(g))}
    if not groups:
        raise DegenerateInputError("no language pairs to aggregate")
    return {
        "pairs": {g: grouped[g] for g in GROUPS if g in grouped},
        "groups": groups,
        "avg": sum(groups.values()) / len(groups),
    }


def langpair_taus(items: Sequence[ChallengeItem],
                  scores: Sequence[tuple[float, float]]) -> dict[str, float]:
    counts = contrast_counts(items, scores, key=lambda it: it.langpair)
    return {lp: t for lp, t in tau_like_table(counts).items() if t is not None}


def evaluate(items: Sequence[ChallengeItem], scores: Sequence[tuple[float, float]],
             mapping: Mapping[str, str] | None = None,
             weights: Mapping[str, float] | None = None) -> dict:
    """Full report for one metric's scores.

    Sections that the data cannot support (no severities, missing ACES
    categories, no language pairs) are reported as None.
    """
    counts = contrast_counts(items, scores)
    taus = tau_like_table(counts)
    cats = category_taus(items, scores, mapping)
    try:
        aces = aces_score(cats, weights)
    except IncompleteCategoriesError:
        aces = None
    severity = None
    if items and all(it.severity is not None for it in items):
        severity = severity_accuracy(items, scores).to_json()
    groups = None
    if items and all(it.langpair for it in items):
        groups = aggregate_langpairs(langpair_taus(items, scores))
    return {
        "phenomena": {
            p: {"concordant": c.concordant, "discordant": c.discordant,
                "ties": c.ties, "tau": taus[p]}
            for p, c in counts.items()
        },
        "categories": cats,
        "aces_score": aces,
        "severity": severity,
        "langpairs": groups,
    }


def report_tsv(reports: Mapping[str, dict]) -> str:
    """Flat export: one row per (metric, section, key, statistic)."""
    buf = io.StringIO()
    w = csv.writer(buf, delimiter="\t", lineterminator="\n")
    w.writerow(["metric", "section", "key", "statistic", "value"])
    for metric, rep in reports.items():
        for phen, row in rep["phenomena"].items():
            for stat in ("concordant", "discordant", "ties", "tau"):
                w.writerow([metric, "phenomenon", phen, stat, _fmt(row[stat])])
        for cat, tau in rep["categories"].items():
            w.writerow([metric, "category", cat, "tau", _fmt(tau)])
        w.writerow([metric, "aces", "all", "aces_score", _fmt(rep["aces_score"])])
        if rep["severity"]:
            for b, acc in rep["severity"]["accuracy"].items():
                w.writerow([metric, "severity", b, "accuracy", _fmt(acc)])
            w.writerow([metric, "severity", "all", "accuracy", _fmt(rep["severity"]["all"])])
        if rep["langpairs"]:
            for g, pairs in rep["langpairs"]["pairs"].items():
                for lp, tau in pairs.items():
                    w.writerow([metric, "langpair", lp, "tau", _fmt(tau)])
            for g, v in rep["langpairs"]["groups"].items():
                w.writerow([metric, "group", g, "tau", _fmt(v)])
            w.writerow([metric, "group", "avg", "tau", _fmt(rep["langpairs"]["avg"])])
    return buf.getvalue()


def _fmt(v) -> str:
    return "" if v is None else repr(v) if isinstance(v, float) else str(v)


def write_jsonl(items: Iterable[ChallengeItem], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for it in items:
            obj = {
                "source": it.source,
                "good-translation": it.good_translation,
                "incorrect-translation": it.incorrect_translation,
                "reference": it.reference,
                "phenomena": it.phenomenon,
                "langpair": it.langpair,
            }
            for k in ("severity", "category", "id"):
                if getattr(it, k) is not None:
                    obj[k] = getattr(it, k)
            if it.scores is not None:
                obj["scores"] = {k: list(v) for k, v in it.scores.items()}
            f.write(json.dumps(obj, ensure_ascii=False) + "\n")
