"""Desk-scale neural quality regressor with lexical-feature and word-tag fusion.

A trainable mean-pooled embedding encoder stands in for a pretrained
multilingual encoder. Three variants share the estimator:

``baseline``
    pooled features -> FF1 -> FF2 -> score
``sl_features``
    FF1 output concatenated with (bleu, chrf) -> bottleneck -> FF2 -> score
``wl_tags``
    pooled features extended with the mean OK/BAD tag embedding and the mean
    of (token embedding + tag embedding) -> FF1 -> FF2 -> score

Forward and backward passes are written out by hand in numpy.
"""

from __future__ import annotations

import json
import math
import zlib
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable, Literal, Mapping, Sequence

import numpy as np

from .align import BAD, OK, TagSequence, word_tags
from .errors import (InvalidTagsError, MissingFeatureError, NumericFailureError,
                     TrainingDivergedError)
from .lexmetrics import sentence_bleu, sentence_chrf
from .records import SegmentTriplet
from .text import tokenize

FORMAT_VERSION = "fusion-v1"
VARIANTS = ("baseline", "sl_features", "wl_tags")
Variant = Literal["baseline", "sl_features", "wl_tags"]

# Hypothesis, source, reference, hyp*ref, |hyp-ref|, hyp*src, |hyp-src|.
N_BASE_BLOCKS = 7
N_TAG_BLOCKS = 2
N_SL_FEATURES = 2
_TAG_ROW = {OK: 0, BAD: 1}


@dataclass
class FusionConfig:
    embed_dim: int = 32
    hidden_sizes: tuple[int, int] = (96, 32)
    bottleneck_size: int = 8
    dropout: float = 0.15
    learning_rate: float = 3e-4
    batch_size: int = 4
    epochs: int = 2
    frozen_fraction: float = 0.3
    seed: int = 42
    variant: Variant = "baseline"
    hash_buckets: int = 32
    init_scale: float = 0.1
    tokenizer: str = "word"
    max_length: int = 512

    def __post_init__(self):
        self.hidden_sizes = tuple(int(h) for h in self.hidden_sizes)
        if len(self.hidden_sizes) != 2:
            raise ValueError("hidden_sizes must hold exactly two layer widths")
        sizes = (self.embed_dim, *self.hidden_sizes, self.bottleneck_size,
                 self.batch_size, self.epochs, self.hash_buckets)
        if min(sizes) < 1:
            raise ValueError("all sizes must be >= 1")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must be in [0, 1), got {self.dropout}")
        if not 0.0 <= self.frozen_fraction <= 1.0:
            raise ValueError(f"frozen_fraction must be in [0, 1], got {self.frozen_fraction}")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")

    @property
    def feature_dim(self) -> int:
        blocks = N_BASE_BLOCKS + (N_TAG_BLOCKS if self.variant == "wl_tags" else 0)
        return blocks * self.embed_dim

    def to_json(self) -> dict:
        d = asdict(self)
        d["hidden_sizes"] = list(self.hidden_sizes)
        return d

    @classmethod
    def from_json(cls, doc: Mapping) -> FusionConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown FusionConfig keys: {sorted(unknown)}")
        return cls(**doc)


@dataclass
class FusionParams:
    """Every trainable array plus the vocabulary that indexes ``emb``."""

    arrays: dict[str, np.ndarray]
    vocab: dict[str, int]
    hash_buckets: int

    def __post_init__(self):
        if self.arrays["tag_emb"].shape[0] != 2:
            raise ValueError("tag embedding table must have exactly two rows (OK, BAD)")
        expected = len(self.vocab) + self.hash_buckets
        if self.arrays["emb"].shape[0] != expected:
            raise ValueError(f"embedding table has {self.arrays['emb'].shape[0]} rows, "
                             f"expected {expected}")

    def __getitem__(self, name: str) -> np.ndarray:
        return self.arrays[name]

    def token_id(self, token: str) -> int:
        i = self.vocab.get(token)
        if i is None:
            i = len(self.vocab) + zlib.crc32(token.encode("utf-8")) % self.hash_buckets
        return i

    def token_ids(self, tokens: Iterable[str]) -> np.ndarray:
        return np.fromiter((self.token_id(t) for t in tokens), dtype=np.int64)

    def copy(self) -> FusionParams:
        return FusionParams({k: v.copy() for k, v in self.arrays.items()},
                            dict(self.vocab), self.hash_buckets)

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in self.arrays.values())

    def names(self) -> list[str]:
        return list(self.arrays)


def param_shapes(config: FusionConfig, vocab_size: int) -> dict[str, tuple[int, ...]]:
    d = config.embed_dim
    h1, h2 = config.hidden_sizes
    shapes = {
        "emb": (vocab_size + config.hash_buckets, d),
        "tag_emb": (2, d),
        "W1": (config.feature_dim, h1),
        "b1": (h1,),
    }
    if config.variant == "sl_features":
        shapes["Wb"] = (h1 + N_SL_FEATURES, config.bottleneck_size)
        shapes["bb"] = (config.bottleneck_size,)
        shapes["W2"] = (config.bottleneck_size, h2)
    else:
        shapes["W2"] = (h1, h2)
    shapes["b2"] = (h2,)
    shapes["Wo"] = (h2,)
    shapes["bo"] = (1,)
    return shapes


def build_vocab(token_lists: Iterable[Sequence[str]]) -> dict[str, int]:
    seen = sorted({t for toks in token_lists for t in toks})
    return {t: i for i, t in enumerate(seen)}


def init_params(config: FusionConfig, vocab: Mapping[str, int],
                rng: np.random.Generator | None = None) -> FusionParams:
    """Uniform(-init_scale, init_scale) for every array, drawn in a fixed order."""
    if rng is None:
        rng = np.random.default_rng(config.seed)
    s = config.init_scale
    arrays = {name: rng.uniform(-s, s, size=shape)
              for name, shape in param_shapes(config, len(vocab)).items()}
    return FusionParams(arrays, dict(vocab), config.hash_buckets)


def zeros_like_params(params: FusionParams) -> dict[str, np.ndarray]:
    return {k: np.zeros_like(v) for k, v in params.arrays.items()}


# ---------------------------------------------------------------------------
# Encoding


@dataclass
class EncodedItem:
    src: np.ndarray
    hyp: np.ndarray
    ref: np.ndarray
    tags: np.ndarray | None = None
    sl_feats: np.ndarray | None = None
    gold: float | None = None


def _tokens(text: str, config: FusionConfig):
    return tokenize(text, scheme=config.tokenizer, max_length=config.max_length)


def encode_item(triplet: SegmentTriplet, tags, sl_feats, params: FusionParams,
                config: FusionConfig, gold: float | None = None) -> EncodedItem:
    hyp_toks = _tokens(triplet.hypothesis, config)
    tag_ids = None
    if tags is not None:
        tags = tuple(tags)
        if len(tags) != len(hyp_toks):
            raise InvalidTagsError(
                f"{len(tags)} tags for a hypothesis of {len(hyp_toks)} tokens")
        try:
            tag_ids = np.array([_TAG_ROW[t] for t in tags], dtype=np.int64)
        except KeyError as e:
            raise InvalidTagsError(f"invalid tag {e.args[0]!r}") from None
    feats = None
    if sl_feats is not None:
        feats = np.asarray(sl_feats, dtype=float).reshape(N_SL_FEATURES)
    return EncodedItem(
        src=params.token_ids(_tokens(triplet.source, config)),
        hyp=params.token_ids(hyp_toks),
        ref=params.token_ids(_tokens(triplet.reference, config)),
        tags=tag_ids,
        sl_feats=feats,
        gold=gold if gold is not None else triplet.score,
    )


def encode(seq: Sequence[str], params: FusionParams) -> np.ndarray:
    """Mean of the token embeddings; the zero vector for an empty sequence."""
    return _mean_rows(params["emb"], params.token_ids(seq))


def encode_tags(tags: Sequence[str], token_vectors: np.ndarray,
                params: FusionParams) -> tuple[np.ndarray, np.ndarray]:
    """Pooled tag vector and pooled (token + tag) vector.

    ``token_vectors`` holds one embedding row per hypothesis token.
    """
    token_vectors = np.asarray(token_vectors, dtype=float)
    d = params["tag_emb"].shape[1]
    token_vectors = token_vectors.reshape(-1, d)
    if len(tags) != token_vectors.shape[0]:
        raise InvalidTagsError(
            f"{len(tags)} tags for {token_vectors.shape[0]} hypothesis tokens")
    if len(tags) == 0:
        return np.zeros(d), np.zeros(d)
    try:
        w = params["tag_emb"][[_TAG_ROW[t] for t in tags]]
    except KeyError as e:
        raise InvalidTagsError(f"invalid tag {e.args[0]!r}") from None
    sigma = token_vectors + w
    return w.mean(axis=0), sigma.mean(axis=0)


def _mean_rows(table: np.ndarray, ids: np.ndarray) -> np.ndarray:
    if len(ids) == 0:
        return np.zeros(table.shape[1], dtype=table.dtype)
    return table[ids].mean(axis=0)


# ---------------------------------------------------------------------------
# Forward / backward


def _check_inputs(item: EncodedItem, config: FusionConfig) -> None:
    if config.variant == "sl_features" and item.sl_feats is None:
        raise MissingFeatureError("sl_features variant needs (bleu, chrf) features")
    if config.variant == "wl_tags":
        if item.tags is None:
            raise MissingFeatureError("wl_tags variant needs OK/BAD tags")
        if len(item.tags) != len(item.hyp):
            raise InvalidTagsError(f"{len(item.tags)} tags for {len(item.hyp)} hypothesis tokens")


def _forward(item: EncodedItem, params: FusionParams, config: FusionConfig,
             train_mode: bool = False, rng: np.random.Generator | None = None):
    _check_inputs(item, config)
    P = params.arrays
    emb = P["emb"]
    h = _mean_rows(emb, item.hyp)
    s = _mean_rows(emb, item.src)
    r = _mean_rows(emb, item.ref)
    blocks = [h, s, r, h * r, np.abs(h - r), h * s, np.abs(h - s)]
    if config.variant == "wl_tags":
        wbar = _mean_rows(P["tag_emb"], item.tags)
        blocks += [wbar, h + wbar]
    x = np.concatenate(blocks)

    keep = 1.0 - config.dropout
    drop = train_mode and config.dropout > 0.0
    if drop and rng is None:
        raise ValueError("train_mode with dropout needs an rng")

    z1 = x @ P["W1"] + P["b1"]
    a1 = np.tanh(z1)
    m1 = (rng.random(a1.shape) < keep) / keep if drop else None
    a1d = a1 * m1 if drop else a1

    cache = {"h": h, "s": s, "r": r, "x": x, "a1": a1, "m1": m1, "a1d": a1d}
    if config.variant == "sl_features":
        u = np.concatenate([a1d, item.sl_feats])
        ab = np.tanh(u @ P["Wb"] + P["bb"])
        if ab.shape != (config.bottleneck_size,):
            raise NumericFailureError(f"bottleneck produced shape {ab.shape}")
        cache.update(u=u, ab=ab)
        mid = ab
    else:
        mid = a1d
    z2 = mid @ P["W2"] + P["b2"]
    a2 = np.tanh(z2)
    m2 = (rng.random(a2.shape) < keep) / keep if drop else None
    a2d = a2 * m2 if drop else a2
    y = a2d @ P["Wo"] + P["bo"][0]
    cache.update(mid=mid, a2=a2, m2=m2, a2d=a2d)
    if not (np.isfinite(y) and np.all(np.isfinite(a1)) and np.all(np.isfinite(a2))):
        raise NumericFailureError("non-finite value in forward pass")
    return y, cache


def _backward(dy: float, item: EncodedItem, params: FusionParams, config: FusionConfig,
              cache: dict, grads: dict[str, np.ndarray]) -> None:
    """Accumulate d(loss)/d(param) into ``grads`` given d(loss)/d(output)."""
    P = params.arrays
    d = config.embed_dim
    grads["bo"][0] += dy
    grads["Wo"] += dy * cache["a2d"]
    da2 = dy * P["Wo"]
    if cache["m2"] is not None:
        da2 = da2 * cache["m2"]
    dz2 = da2 * (1.0 - cache["a2"] ** 2)
    grads["W2"] += np.outer(cache["mid"], dz2)
    grads["b2"] += dz2
    dmid = P["W2"] @ dz2
    if config.variant == "sl_features":
        dzb = dmid * (1.0 - cache["ab"] ** 2)
        grads["Wb"] += np.outer(cache["u"], dzb)
        grads["bb"] += dzb
        da1d = (P["Wb"] @ dzb)[: config.hidden_sizes[0]]
    else:
        da1d = dmid
    da1 = da1d * cache["m1"] if cache["m1"] is not None else da1d
    dz1 = da1 * (1.0 - cache["a1"] ** 2)
    grads["W1"] += np.outer(cache["x"], dz1)
    grads["b1"] += dz1
    dx = P["W1"] @ dz1

    h, s, r = cache["h"], cache["s"], cache["r"]
    b = [dx[k * d:(k + 1) * d] for k in range(len(dx) // d)]
    sg_hr, sg_hs = np.sign(h - r), np.sign(h - s)
    dh = b[0] + b[3] * r + b[4] * sg_hr + b[5] * s + b[6] * sg_hs
    ds = b[1] + b[5] * h - b[6] * sg_hs
    dr = b[2] + b[3] * h - b[4] * sg_hr
    if config.variant == "wl_tags":
        dw = b[7] + b[8]
        dh = dh + b[8]
        if len(item.tags):
            np.add.at(grads["tag_emb"], item.tags, dw / len(item.tags))
    for ids, g in ((item.hyp, dh), (item.src, ds), (item.ref, dr)):
        if len(ids):
            np.add.at(grads["emb"], ids, g / len(ids))


def forward(triplet: SegmentTriplet, tags: Sequence[str] | None,
            sl_feats: Sequence[float] | None, params: FusionParams, config: FusionConfig,
            train_mode: bool = False, rng: np.random.Generator | None = None) -> float:
    """Predicted quality score for one segment.

    Inputs a variant does not use are ignored. Dropout is applied only when
    ``train_mode`` is set, which then requires ``rng``.
    """
    if config.variant != "wl_tags":
        tags = None
    if config.variant != "sl_features":
        sl_feats = None
    item = encode_item(triplet, tags, sl_feats, params, config)
    return float(_forward(item, params, config, train_mode, rng)[0])


def loss_and_grads(items: Sequence[EncodedItem], params: FusionParams, config: FusionConfig,
                   train_mode: bool = False, rng: np.random.Generator | None = None):
    """Mean squared error over ``items`` and its gradient for every array."""
    grads = zeros_like_params(params)
    total = 0.0
    n = len(items)
    for item in items:
        y, cache = _forward(item, params, config, train_mode, rng)
        err = y - item.gold
        total += err * err
        _backward(2.0 * err / n, item, params, config, cache, grads)
    return float(total / n), grads


def mse(items: Sequence[EncodedItem], params: FusionParams, config: FusionConfig) -> float:
    return float(sum((_forward(it, params, config)[0] - it.gold) ** 2 for it in items) / len(items))


# ---------------------------------------------------------------------------
# Training


@dataclass
class Example:
    """One training row: a triplet with optional tags, lexical features and gold."""

    triplet: SegmentTriplet
    tags: Sequence[str] | None = None
    sl_feats: Sequence[float] | None = None
    gold: float | None = None


def make_example(triplet: SegmentTriplet, config: FusionConfig | None = None) -> Example:
    """Derive tags (by alignment) and (bleu, chrf) features for a triplet."""
    config = config or FusionConfig()
    hyp = _tokens(triplet.hypothesis, config)
    ref = _tokens(triplet.reference, config)
    tags = word_tags(hyp, ref)
    bleu = sentence_bleu(hyp, ref).value if len(ref) else 0.0
    chrf = sentence_chrf(triplet.hypothesis, triplet.reference).value if len(ref) else 0.0
    return Example(triplet, tags, (bleu, chrf), triplet.score)


def _as_example(row) -> Example:
    if isinstance(row, Example):
        return row
    triplet, tags, sl_feats, gold = row
    return Example(triplet, tags, sl_feats, gold)


class _Adam:
    def __init__(self, params: FusionParams, lr: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = zeros_like_params(params)
        self.v = zeros_like_params(params)
        self.t = {k: 0 for k in params.arrays}

    def step(self, params: FusionParams, grads: dict[str, np.ndarray], skip=()) -> None:
        for k, g in grads.items():
            if k in skip:
                continue
            self.t[k] += 1
            t = self.t[k]
            m = self.m[k] = self.beta1 * self.m[k] + (1 - self.beta1) * g
            v = self.v[k] = self.beta2 * self.v[k] + (1 - self.beta2) * g * g
            mhat = m / (1 - self.beta1 ** t)
            vhat = v / (1 - self.beta2 ** t)
            params.arrays[k] -= self.lr * mhat / (np.sqrt(vhat) + self.eps)


@dataclass
class TrainLog:
    epoch_losses: list[float] = field(default_factory=list)
    frozen_steps: int = 0
    steps: int = 0


def train(dataset: Sequence, config: FusionConfig, vocab: Mapping[str, int] | None = None,
          log: TrainLog | None = None) -> FusionParams:
    """Fit a regressor by minibatch Adam on mean squared error.

    ``dataset`` rows are :class:`Example` objects or ``(triplet, tags,
    sl_feats, gold)`` tuples. The token embedding table is frozen for the
    first ``frozen_fraction`` of the first epoch's steps. Shuffling, dropout
    and initialization each draw from their own stream derived from
    ``config.seed``.
    """
    rows = [_as_example(r) for r in dataset]
    if not rows:
        raise ValueError("training set is empty")
    golds = [r.gold for r in rows]
    if any(g is None or not math.isfinite(g) for g in golds):
        raise ValueError("every training row needs a finite gold score")

    if vocab is None:
        vocab = build_vocab(
            _tokens(t, config)
            for r in rows
            for t in (r.triplet.source, r.triplet.hypothesis, r.triplet.reference))
    init_ss, shuffle_ss, dropout_ss = np.random.SeedSequence(config.seed).spawn(3)
    params = init_params(config, vocab, np.random.default_rng(init_ss))
    shuffle_rng = np.random.default_rng(shuffle_ss)
    dropout_rng = np.random.default_rng(dropout_ss)

    items = [encode_item(r.triplet, r.tags if config.variant == "wl_tags" else None,
                         r.sl_feats if config.variant == "sl_features" else None,
                         params, config, gold=r.gold) for r in rows]
    for it in items:
        _check_inputs(it, config)

    opt = _Adam(params, config.learning_rate)
    bs = config.batch_size
    steps_per_epoch = math.ceil(len(items) / bs)
    frozen_steps = int(math.floor(config.frozen_fraction * steps_per_epoch))
    log = log if log is not None else TrainLog()
    log.frozen_steps = frozen_steps
    last_good = params.copy()
    step = 0
    for _ in range(config.epochs):
        order = shuffle_rng.permutation(len(items))
        epoch_loss = 0.0
        for start in range(0, len(items), bs):
            batch = [items[i] for i in order[start:start + bs]]
            try:
                with np.errstate(over="ignore", invalid="ignore"):
                    loss, grads = loss_and_grads(batch, params, config, True, dropout_rng)
            except NumericFailureError as e:
                raise TrainingDivergedError(str(e), last_good, step) from e
            if not math.isfinite(loss):
                raise TrainingDivergedError(f"loss became {loss} at step {step}", last_good, step)
            skip = ("emb",) if step < frozen_steps else ()
            opt.step(params, grads, skip)
            if not params.all_finite():
                raise TrainingDivergedError(f"parameters became non-finite at step {step}",
                                            last_good, step)
            last_good = params.copy()
            epoch_loss += loss * len(batch)
            step += 1
        log.epoch_losses.append(epoch_loss / len(items))
    log.steps = step
    return params


# ---------------------------------------------------------------------------
# Gradient check


def grad_check(params: FusionParams, config: FusionConfig, sample,
               epsilon: float = 1e-4) -> float:
    """Largest relative gap between backprop and central finite differences.

    Every scalar parameter is perturbed. Relative error uses the denominator
    max(|analytic|, |numeric|, 1e-8). Dropout is off throughout. Both passes
    run in ``np.longdouble`` so finite-difference roundoff stays well below
    the gradients of weakly connected weights.
    """
    if not 1e-6 <= epsilon <= 1e-3:
        raise ValueError(f"epsilon must lie in [1e-6, 1e-3], got {epsilon}")
    ex = _as_example(sample)
    item = encode_item(ex.triplet, ex.tags if config.variant == "wl_tags" else None,
                       ex.sl_feats if config.variant == "sl_features" else None,
                       params, config, gold=ex.gold if ex.gold is not None else 0.0)
    work = FusionParams({k: v.astype(np.longdouble) for k, v in params.arrays.items()},
                        dict(params.vocab), params.hash_buckets)
    item.gold = np.longdouble(item.gold)
    if item.sl_feats is not None:
        item.sl_feats = item.sl_feats.astype(np.longdouble)
    _, analytic = loss_and_grads([item], work, config)

    def loss():
        y, _ = _forward(item, work, config)
        return (y - item.gold) ** 2

    worst = 0.0
    for name, arr in work.arrays.items():
        flat = arr.reshape(-1)
        g = analytic[name].reshape(-1)
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + epsilon
            up = loss()
            flat[k] = orig - epsilon
            down = loss()
            flat[k] = orig
            num = (up - down) / (2.0 * epsilon)
            denom = max(abs(g[k]), abs(num), 1e-8)
            worst = max(worst, float(abs(g[k] - num) / denom))
    return worst


# ---------------------------------------------------------------------------
# Model wrapper and serialization


@dataclass
class FusionModel:
    config: FusionConfig
    params: FusionParams

    def predict_example(self, ex: Example) -> float:
        return forward(ex.triplet, ex.tags, ex.sl_feats, self.params, self.config)

    def predict(self, triplet: SegmentTriplet) -> float:
        """Score a raw triplet, deriving tags and lexical features as needed."""
        ex = make_example(triplet, self.config)
        return self.predict_example(ex)

    def predict_many(self, triplets: Iterable[SegmentTriplet]) -> list[float]:
        return [self.predict(t) for t in triplets]

    def to_json(self) -> dict:
        vocab = sorted(self.params.vocab, key=self.params.vocab.__getitem__)
        return {
            "version": FORMAT_VERSION,
            "config": self.config.to_json(),
            "vocab": vocab,
            "hash_buckets": self.params.hash_buckets,
            "params": {k: v.tolist() for k, v in self.params.arrays.items()},
        }

    @classmethod
    def from_json(cls, doc: Mapping) -> FusionModel:
        if doc.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported model version {doc.get('version')!r}")
        config = FusionConfig.from_json(doc["config"])
        vocab = {t: i for i, t in enumerate(doc["vocab"])}
        arrays = {k: np.asarray(v, dtype=float) for k, v in doc["params"].items()}
        expected = param_shapes(config, len(vocab))
        if set(arrays) != set(expected):
            raise ValueError(f"parameter names {sorted(arrays)} do not match the config")
        for k, shape in expected.items():
            if arrays[k].shape != shape:
                raise ValueError(f"{k} has shape {arrays[k].shape}, expected {shape}")
        params = FusionParams(arrays, vocab, int(doc["hash_buckets"]))
        if not params.all_finite():
            raise ValueError("model contains non-finite parameters")
        return cls(config, params)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json()) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> FusionModel:
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def fit(dataset: Sequence, config: FusionConfig, log: TrainLog | None = None) -> FusionModel:
    return FusionModel(config, train(dataset, config, log=log))
