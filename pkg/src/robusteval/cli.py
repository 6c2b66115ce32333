"""Command-line entry point: ``robusteval <command> [options]``.

Commands: score, tags, tune-ensemble, train, eval-challenge, correlate.
Failures exit non-zero and print one ``error: {json}`` line on stderr.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .align import word_tags
from .challenge import evaluate, precomputed_scores, read_jsonl, report_tsv, score_items
from .ensemble import DEFAULT_RESOLUTION, EnsembleModel, fit_ensemble
from .errors import RobustEvalError, SchemaError
from .fusion import FusionConfig, FusionModel, fit, make_example
from .records import MetricVector, SegmentTriplet
from .scoring import METRICS, make_scorer, score_segments
from .stats import compare_correlations, kendall_tau_b, pearson, spearman
from .text import tokenize

TRIPLET_COLUMNS = ("id", "src", "mt", "ref")


class UsageError(RobustEvalError):
    pass


@dataclass
class RunConfig:
    command: str
    input: str | None = None
    output: str | None = None
    metrics: list[str] = field(default_factory=list)
    model: str | None = None
    normalizer: str | None = None
    weights: str | None = None
    seed: int = 42
    tokenizer: str = "word"
    resolution: int = DEFAULT_RESOLUTION
    variant: str | None = None
    gold: str | None = None
    config: str | None = None
    tsv: str | None = None

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> RunConfig:
        d = {k: v for k, v in vars(ns).items() if k != "func"}
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise UsageError(f"unknown options {sorted(unknown)}")
        cfg = cls(**d)
        for name in ("input", "output", "model", "normalizer", "weights", "gold", "config", "tsv"):
            v = getattr(cfg, name)
            if v is not None and v != "-":
                setattr(cfg, name, str(Path(v).resolve()))
        return cfg

    def fingerprint(self) -> str:
        """Hash of every option that can change results (output locations excluded)."""
        d = asdict(self)
        del d["output"], d["tsv"]
        blob = json.dumps(d, sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]


# ---------------------------------------------------------------------------
# I/O


def _open_in(path: str | None):
    if path is None or path == "-":
        return io.TextIOWrapper(sys.stdin.buffer, encoding="utf-8")
    return open(path, encoding="utf-8", newline="")


def _float(v, what: str, line: int) -> float:
    try:
        return float(v)
    except (TypeError, ValueError):
        raise SchemaError(f"line {line}: {what} is not a number: {v!r}") from None


def read_rows(path: str | None) -> list[tuple[int, dict[str, Any]]]:
    """Rows of a TSV (header optional) or JSONL file, with 1-based line numbers.

    A TSV header is recognized by a first field equal to ``id``. Without one,
    columns are id, src, mt, ref and an optional score.
    """
    rows = []
    with _open_in(path) as f:
        text = f.read()
    if text.startswith("﻿"):
        raise SchemaError("input must be UTF-8 without a byte order mark")
    if path and path.endswith(".jsonl"):
        for n, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise SchemaError(f"line {n}: invalid JSON: {e.msg}") from None
            if not isinstance(obj, dict):
                raise SchemaError(f"line {n}: expected a JSON object")
            rows.append((n, obj))
        return rows
    lines = text.splitlines()
    header = None
    for n, line in enumerate(lines, 1):
        if not line:
            continue
        cells = line.split("\t")
        if header is None and n == 1 and cells[0] == "id":
            header = cells
            continue
        if header is not None:
            if len(cells) != len(header):
                raise SchemaError(f"line {n}: expected {len(header)} columns, got {len(cells)}")
            rows.append((n, dict(zip(header, cells))))
        else:
            if len(cells) not in (4, 5):
                raise SchemaError(f"line {n}: expected 4 or 5 columns, got {len(cells)}")
            rows.append((n, dict(zip(TRIPLET_COLUMNS + ("score",), cells))))
    return rows


def read_triplets(path: str | None, need_score: bool = False
                  ) -> tuple[list[SegmentTriplet], list[dict[str, Any]]]:
    triplets, extras = [], []
    for n, row in read_rows(path):
        missing = [c for c in TRIPLET_COLUMNS if c not in row]
        if missing:
            raise SchemaError(f"line {n}: missing columns {missing}")
        score = row.get("score")
        if score in ("", None):
            if need_score:
                raise SchemaError(f"line {n}: missing gold score")
            score = None
        else:
            score = _float(score, "score", n)
        extra = {k: _float(v, k, n) for k, v in row.items()
                 if k not in TRIPLET_COLUMNS and k != "score" and v not in ("", None)}
        triplets.append(SegmentTriplet(str(row["src"]), str(row["mt"]), str(row["ref"]),
                                       score, str(row["id"])))
        extras.append(extra)
    return triplets, extras


def read_score_table(path: str) -> dict[str, dict[str, float]]:
    """id -> {column: value} from a headed TSV or JSONL file."""
    table = {}
    for n, row in read_rows(path):
        if "id" not in row:
            raise SchemaError(f"line {n}: missing id column")
        rid = str(row["id"])
        if rid in table:
            raise SchemaError(f"line {n}: duplicate id {rid!r}")
        table[rid] = {k: _float(v, k, n) for k, v in row.items()
                      if k not in ("id", "src", "mt", "ref")}
    return table


def _fmt(x: float) -> str:
    return repr(float(x))


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _dump_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# Commands


def _load_model(cfg: RunConfig) -> FusionModel | None:
    if cfg.model is None:
        return None
    if not Path(cfg.model).exists():
        raise UsageError(f"model file not found: {cfg.model}")
    return FusionModel.load(cfg.model)


def _load_ensemble(cfg: RunConfig) -> EnsembleModel | None:
    path = cfg.weights or cfg.normalizer
    if path is None:
        return None
    if not Path(path).exists():
        raise UsageError(f"ensemble file not found: {path}")
    return EnsembleModel.load(path)


def _check_metrics(cfg: RunConfig, allowed: Sequence[str]) -> list[str]:
    metrics = cfg.metrics or ["bleu", "chrf"]
    bad = [m for m in metrics if m not in allowed]
    if bad:
        raise UsageError(f"unknown metrics {bad}; choose from {list(allowed)}")
    if ("fusion" in metrics or "ensemble" in metrics) and cfg.model is None:
        raise UsageError("--model is required for fusion and ensemble metrics")
    if "ensemble" in metrics and cfg.weights is None and cfg.normalizer is None:
        raise UsageError("--weights (or --normalizer) is required for the ensemble metric")
    return metrics


def cmd_score(cfg: RunConfig) -> str:
    metrics = _check_metrics(cfg, METRICS)
    model, ens = _load_model(cfg), _load_ensemble(cfg)
    triplets, _ = read_triplets(cfg.input)
    for k, t in enumerate(triplets):
        if not "".join(t.reference.split()):
            raise SchemaError(f"segment {t.id!r} (row {k + 1}): empty reference")
    scores = score_segments(triplets, metrics, model, ens, cfg.tokenizer)
    lines = ["\t".join(["id", *metrics])]
    for k, t in enumerate(triplets):
        lines.append("\t".join([t.id, *(_fmt(scores[m][k]) for m in metrics)]))
    return "\n".join(lines) + "\n"


def cmd_tags(cfg: RunConfig) -> str:
    triplets, _ = read_triplets(cfg.input)
    lines = ["id\ttags"]
    for t in triplets:
        tags = word_tags(tokenize(t.hypothesis, cfg.tokenizer), tokenize(t.reference, cfg.tokenizer))
        lines.append(f"{t.id}\t{tags}")
    return "\n".join(lines) + "\n"


def cmd_tune_ensemble(cfg: RunConfig) -> str:
    triplets, extras = read_triplets(cfg.input, need_score=True)
    model = _load_model(cfg)
    if model is None and not all("neural" in e for e in extras):
        raise UsageError("dev rows need a 'neural' column or --model to compute neural scores")
    base = score_segments(triplets, ["bleu", "chrf"], tokenizer=cfg.tokenizer)
    dev = []
    for k, (t, e) in enumerate(zip(triplets, extras)):
        neural = e["neural"] if "neural" in e else model.predict(t)
        dev.append((MetricVector(e.get("bleu", base["bleu"][k]), e.get("chrf", base["chrf"][k]),
                                 neural), t.score))
    ens = fit_ensemble(dev, cfg.resolution)
    doc = ens.to_json()
    doc["fingerprint"] = cfg.fingerprint()
    return _dump_json(doc)


def cmd_train(cfg: RunConfig) -> str:
    overrides = {}
    if cfg.config:
        overrides = json.loads(Path(cfg.config).read_text(encoding="utf-8"))
    overrides["seed"] = cfg.seed
    if cfg.variant:
        overrides["variant"] = cfg.variant
    overrides.setdefault("tokenizer", cfg.tokenizer)
    try:
        config = FusionConfig.from_json(overrides)
    except (TypeError, ValueError) as e:
        raise UsageError(str(e)) from None
    triplets, _ = read_triplets(cfg.input, need_score=True)
    model = fit([make_example(t, config) for t in triplets], config)
    doc = model.to_json()
    return json.dumps(doc) + "\n"


def cmd_eval_challenge(cfg: RunConfig) -> tuple[str, str]:
    items = read_jsonl(cfg.input)
    metrics = cfg.metrics or ["bleu", "chrf"]
    computed = [m for m in metrics if m in METRICS]
    if computed:
        _check_metrics(RunConfig("eval-challenge", metrics=computed, model=cfg.model,
                                 weights=cfg.weights, normalizer=cfg.normalizer), METRICS)
    model, ens = _load_model(cfg), _load_ensemble(cfg)
    reports = {}
    for m in metrics:
        if m in METRICS:
            scores = score_items(items, make_scorer(m, model, ens, cfg.tokenizer))
        else:
            scores = precomputed_scores(items, m)
        reports[m] = evaluate(items, scores)
    doc = {"fingerprint": cfg.fingerprint(), "n_items": len(items), "metrics": reports}
    return _dump_json(doc), report_tsv(reports)


def cmd_correlate(cfg: RunConfig) -> str:
    if cfg.gold is None:
        raise UsageError("--gold is required")
    scores = read_score_table(cfg.input)
    gold_table = read_score_table(cfg.gold)
    ids = list(scores)
    missing = [i for i in ids if i not in gold_table]
    if missing:
        raise SchemaError(f"ids without gold scores: {missing[:5]}")
    gold_col = "score"
    sample = gold_table[ids[0]] if ids else {}
    if gold_col not in sample:
        if len(sample) != 1:
            raise SchemaError("gold file needs a 'score' column")
        gold_col = next(iter(sample))
    gold = [gold_table[i][gold_col] for i in ids]
    columns = list(scores[ids[0]]) if ids else []
    if cfg.metrics:
        columns = [c for c in columns if c in cfg.metrics]
    result = {}
    for c in columns:
        pred = [scores[i][c] for i in ids]
        result[c] = {"pearson": pearson(pred, gold), "spearman": spearman(pred, gold),
                     "kendall": kendall_tau_b(pred, gold)}
    tests = []
    for a_i, a in enumerate(columns):
        for b in columns[a_i + 1:]:
            pa = [scores[i][a] for i in ids]
            pb = [scores[i][b] for i in ids]
            try:
                t = compare_correlations(pa, pb, gold)
            except RobustEvalError as e:
                t = {"error": str(e)}
            tests.append({"a": a, "b": b, **t})
    doc = {"fingerprint": cfg.fingerprint(), "n": len(ids), "correlations": result,
           "williams": tests}
    return _dump_json(doc)


# ---------------------------------------------------------------------------


def _metrics_arg(s: str) -> list[str]:
    return [m.strip() for m in s.split(",") if m.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="robusteval", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, metrics=False, model=False):
        sp.add_argument("--input", required=True)
        sp.add_argument("--output", default=None)
        sp.add_argument("--seed", type=int, default=42)
        sp.add_argument("--tokenizer", default="word")
        if metrics:
            sp.add_argument("--metrics", type=_metrics_arg, default=[])
        if model:
            sp.add_argument("--model", default=None)
            sp.add_argument("--normalizer", default=None)
            sp.add_argument("--weights", default=None)

    sp = sub.add_parser("score", help="per-segment metric scores as TSV")
    common(sp, metrics=True, model=True)
    sp.set_defaults(func=cmd_score)

    sp = sub.add_parser("tags", help="OK/BAD tags per hypothesis token as TSV")
    common(sp)
    sp.set_defaults(func=cmd_tags)

    sp = sub.add_parser("tune-ensemble", help="fit normalizer and grid-search ensemble weights")
    common(sp, model=True)
    sp.add_argument("--resolution", type=int, default=DEFAULT_RESOLUTION)
    sp.set_defaults(func=cmd_tune_ensemble)

    sp = sub.add_parser("train", help="train a fusion regressor")
    common(sp)
    sp.add_argument("--variant", choices=["baseline", "sl_features", "wl_tags"], default=None)
    sp.add_argument("--config", default=None, help="JSON file of FusionConfig fields")
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("eval-challenge", help="challenge-set report as JSON")
    common(sp, metrics=True, model=True)
    sp.add_argument("--tsv", default=None, help="also write a flat TSV export here")
    sp.set_defaults(func=cmd_eval_challenge)

    sp = sub.add_parser("correlate", help="correlations of score columns with gold")
    common(sp, metrics=True)
    sp.add_argument("--gold", default=None)
    sp.set_defaults(func=cmd_correlate)
    return p


def _error_line(exc: BaseException, code: int) -> int:
    sys.stderr.write("error: " + json.dumps({"type": type(exc).__name__, "message": str(exc)})
                     + "\n")
    return code


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    func = args.func
    try:
        cfg = RunConfig.from_namespace(args)
        if cfg.output is None and args.command == "train":
            raise UsageError("train needs --output")
        out = func(cfg)
        if isinstance(out, tuple):
            out, tsv = out
            if cfg.tsv:
                _write(cfg.tsv, tsv)
        _write(cfg.output, out)
    except UsageError as e:
        return _error_line(e, 2)
    except (RobustEvalError, ValueError, KeyError, OSError) as e:
        return _error_line(e, 1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
