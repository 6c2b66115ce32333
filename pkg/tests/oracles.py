"""Independent brute-force reference implementations used only by the tests.

None of these import robusteval; each recomputes a quantity from its
textbook definition along a different code path.
"""

from __future__ import annotations

import math
import re
import unicodedata
from fractions import Fraction

import mpmath
import numpy as np


_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


def split_tokens(text: str) -> list[str]:
    """Regex reference tokenizer; valid for text without combining marks or CJK."""
    return _TOKEN_RE.findall(unicodedata.normalize("NFC", text))


def ngram_list(seq, n):
    return [tuple(seq[i:i + n]) for i in range(len(seq) - n + 1)]


def clipped_matches(hyp, ref, n):
    """Greedy one-to-one consumption of reference n-grams."""
    pool = ngram_list(ref, n)
    matched = 0
    for g in ngram_list(hyp, n):
        if g in pool:
            pool.remove(g)
            matched += 1
    return matched


def bleu(hyp, ref, max_order=4, smoothing="exp", floor=0.1):
    if not hyp:
        return 0.0
    precisions = []
    halvings = 0
    for n in range(1, max_order + 1):
        total = len(ngram_list(hyp, n))
        if total == 0:
            break
        m = clipped_matches(hyp, ref, n)
        if m:
            precisions.append(Fraction(m, total))
        elif smoothing == "exp":
            halvings += 1
            precisions.append(Fraction(1, 2 ** halvings * total))
        elif smoothing == "floor":
            precisions.append(Fraction(floor).limit_denominator(10 ** 6) / total)
        else:
            return 0.0
    prod = Fraction(1)
    for p in precisions:
        prod *= p
    geo = float(prod) ** (1.0 / len(precisions))
    bp = 1.0 if len(hyp) > len(ref) else math.exp(1 - len(ref) / len(hyp))
    return bp * geo


def chrf(hyp: str, ref: str, max_order=6, beta=2.0):
    hyp = "".join(c for c in hyp if not c.isspace())
    ref = "".join(c for c in ref if not c.isspace())
    fs = []
    for n in range(1, max_order + 1):
        hg = [hyp[i:i + n] for i in range(len(hyp) - n + 1)]
        rg = [ref[i:i + n] for i in range(len(ref) - n + 1)]
        if not hg and not rg:
            continue
        pool = list(rg)
        common = 0
        for g in hg:
            if g in pool:
                pool.remove(g)
                common += 1
        p = common / len(hg) if hg else 0.0
        r = common / len(rg) if rg else 0.0
        if p == 0 and r == 0:
            fs.append(0.0)
        else:
            fs.append((1 + beta ** 2) * p * r / (beta ** 2 * p + r))
    return sum(fs) / len(fs)


def edit_matrix(hyp, ref) -> np.ndarray:
    m, n = len(hyp), len(ref)
    D = np.zeros((m + 1, n + 1), dtype=np.int64)
    D[:, 0] = np.arange(m + 1)
    D[0, :] = np.arange(n + 1)
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            D[i, j] = min(D[i - 1, j - 1] + (hyp[i - 1] != ref[j - 1]),
                          D[i - 1, j] + 1, D[i, j - 1] + 1)
    return D


def edit_script(hyp, ref):
    """(distance, kinds) with the match > substitute > delete > insert backtrace."""
    D = edit_matrix(hyp, ref)
    i, j = len(hyp), len(ref)
    kinds = []
    while (i, j) != (0, 0):
        cands = []
        if i and j and hyp[i - 1] == ref[j - 1]:
            cands.append(("match", D[i - 1, j - 1], -1, -1))
        if i and j and hyp[i - 1] != ref[j - 1]:
            cands.append(("substitute", D[i - 1, j - 1] + 1, -1, -1))
        if j:
            cands.append(("delete", D[i, j - 1] + 1, 0, -1))
        if i:
            cands.append(("insert", D[i - 1, j] + 1, -1, 0))
        kind, _, di, dj = next(c for c in cands if c[1] == D[i, j])
        kinds.append(kind)
        i, j = i + di, j + dj
    return int(D[-1, -1]), kinds[::-1]


def oracle_tags(hyp, ref):
    _, kinds = edit_script(hyp, ref)
    return ["OK" if k == "match" else "BAD" for k in kinds if k != "delete"]


def recursive_distance(a, b):
    from functools import lru_cache

    @lru_cache(maxsize=None)
    def go(i, j):
        if i == len(a):
            return len(b) - j
        if j == len(b):
            return len(a) - i
        return min(go(i + 1, j + 1) + (a[i] != b[j]), go(i + 1, j) + 1, go(i, j + 1) + 1)

    return go(0, 0)


def pearson(x, y):
    mpmath.mp.dps = 50
    x = [mpmath.mpf(v) for v in x]
    y = [mpmath.mpf(v) for v in y]
    mx, my = sum(x) / len(x), sum(y) / len(y)
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    return float(sxy / mpmath.sqrt(sxx * syy))


def average_ranks(x):
    ranks = []
    for v in x:
        less = sum(1 for w in x if w < v)
        equal = sum(1 for w in x if w == v)
        ranks.append(less + (equal + 1) / 2)
    return ranks


def kendall_tau_b(x, y):
    n = len(x)
    conc = disc = tx = ty = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx, dy = x[i] - x[j], y[i] - y[j]
            if dx == 0 and dy == 0:
                continue
            if dx == 0:
                tx += 1
            elif dy == 0:
                ty += 1
            elif (dx > 0) == (dy > 0):
                conc += 1
            else:
                disc += 1
    return (conc - disc) / math.sqrt((conc + disc + tx) * (conc + disc + ty))


def williams(r12, r13, r23, n):
    """Williams' t from the determinant form, p via mpmath's incomplete beta."""
    mpmath.mp.dps = 40
    R = mpmath.matrix([[1, r12, r13], [r12, 1, r23], [r13, r23, 1]])
    det = mpmath.det(R)
    rbar = (mpmath.mpf(r12) + r13) / 2
    t = (r12 - r13) * mpmath.sqrt((n - 1) * (1 + mpmath.mpf(r23))
                                  / (2 * det * (n - 1) / (n - 3) + rbar ** 2 * (1 - r23) ** 3))
    df = n - 3
    x = df / (df + t ** 2)
    p = mpmath.betainc(df / 2, mpmath.mpf(1) / 2, 0, x, regularized=True)
    return float(t), float(p)


def fisher_z(r):
    mpmath.mp.dps = 40
    r = mpmath.mpf(r)
    return float(mpmath.log((1 + r) / (1 - r)) / 2)
