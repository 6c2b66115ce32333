"""Levenshtein alignment of hypothesis against reference and OK/BAD tagging.

Edit kinds are named from the hypothesis side: an ``insert`` is a hypothesis
token with no reference counterpart, a ``delete`` is a reference token missing
from the hypothesis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Literal, Sequence

from .errors import InvalidScriptError

OK = "OK"
BAD = "BAD"

EditKind = Literal["match", "substitute", "insert", "delete"]


@dataclass(frozen=True)
class EditOp:
    kind: EditKind
    hyp_index: int | None = None
    ref_index: int | None = None

    def __post_init__(self):
        has_h = self.hyp_index is not None
        has_r = self.ref_index is not None
        ok = {
            "match": has_h and has_r,
            "substitute": has_h and has_r,
            "insert": has_h and not has_r,
            "delete": has_r and not has_h,
        }.get(self.kind)
        if not ok:
            raise InvalidScriptError(f"malformed edit op {self}")


@dataclass(frozen=True)
class TagSequence(Sequence[str]):
    tags: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "tags", tuple(self.tags))
        bad = [t for t in self.tags if t not in (OK, BAD)]
        if bad:
            raise ValueError(f"tags must be OK or BAD, got {bad[0]!r}")

    def __getitem__(self, i):
        return self.tags[i]

    def __len__(self) -> int:
        return len(self.tags)

    def __iter__(self) -> Iterator[str]:
        return iter(self.tags)

    def __eq__(self, other) -> bool:
        if isinstance(other, TagSequence):
            return self.tags == other.tags
        if isinstance(other, (list, tuple)):
            return self.tags == tuple(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.tags)

    def __str__(self) -> str:
        return " ".join(self.tags)

    @property
    def ok_fraction(self) -> float:
        return self.tags.count(OK) / len(self.tags) if self.tags else 0.0


def levenshtein_align(hyp: Sequence[str], ref: Sequence[str]) -> tuple[int, list[EditOp]]:
    """Minimal unit-cost edit script between ``hyp`` and ``ref``.

    Among equally short scripts the backtrace prefers, at every cell,
    match > substitute > delete > insert.
    """
    m, n = len(hyp), len(ref)
    d = [[0] * (n + 1) for _ in range(m + 1)]
    for j in range(n + 1):
        d[0][j] = j
    for i in range(1, m + 1):
        row, prev = d[i], d[i - 1]
        row[0] = i
        h = hyp[i - 1]
        for j in range(1, n + 1):
            diag = prev[j - 1] + (0 if h == ref[j - 1] else 1)
            row[j] = min(diag, prev[j] + 1, row[j - 1] + 1)

    ops: list[EditOp] = []
    i, j = m, n
    while i > 0 or j > 0:
        cur = d[i][j]
        if i > 0 and j > 0:
            if hyp[i - 1] == ref[j - 1] and cur == d[i - 1][j - 1]:
                ops.append(EditOp("match", i - 1, j - 1))
                i, j = i - 1, j - 1
                continue
            if hyp[i - 1] != ref[j - 1] and cur == d[i - 1][j - 1] + 1:
                ops.append(EditOp("substitute", i - 1, j - 1))
                i, j = i - 1, j - 1
                continue
        if j > 0 and cur == d[i][j - 1] + 1:
            ops.append(EditOp("delete", None, j - 1))
            j -= 1
        else:
            ops.append(EditOp("insert", i - 1, None))
            i -= 1
    ops.reverse()
    return d[m][n], ops


def tags_from_alignment(hyp: Sequence[str], ops: Sequence[EditOp]) -> TagSequence:
    """One tag per hypothesis token: OK under a match, BAD otherwise."""
    tags: list[str | None] = [None] * len(hyp)
    for op in ops:
        if op.kind == "delete":
            continue
        k = op.hyp_index
        if k is None or not 0 <= k < len(hyp) or tags[k] is not None:
            raise InvalidScriptError(f"edit op {op} does not fit a hypothesis of length {len(hyp)}")
        tags[k] = OK if op.kind == "match" else BAD
    if any(t is None for t in tags):
        missing = tags.index(None)
        raise InvalidScriptError(f"hypothesis token {missing} is not covered by the edit script")
    return TagSequence(tuple(tags))


def word_tags(hyp: Sequence[str], ref: Sequence[str]) -> TagSequence:
    """Align and tag in one call."""
    _, ops = levenshtein_align(hyp, ref)
    return tags_from_alignment(hyp, ops)
