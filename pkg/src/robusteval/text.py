"""Deterministic rule-based tokenization and character n-gram extraction.

The default ``"word"`` scheme NFC-normalizes the text, splits on whitespace and
then splits every punctuation or symbol character into its own token. CJK
ideographs and kana are emitted one character per token. The ``"char"``
scheme emits every non-whitespace character as a token.

Tokens never contain whitespace, so ``" ".join(tokens)`` is a detokenized
form that tokenizes back to the same sequence.
"""

from __future__ import annotations

import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

from .errors import InvalidOrderError

DEFAULT_MAX_LENGTH = 512

_CJK_RANGES = (
    (0x3040, 0x30FF),  # hiragana, katakana
    (0x3400, 0x4DBF),  # CJK extension A
    (0x4E00, 0x9FFF),  # CJK unified ideographs
    (0xF900, 0xFAFF),  # compatibility ideographs
    (0x20000, 0x2FA1F),  # supplementary ideographs
)


def _is_cjk(ch: str) -> bool:
    o = ord(ch)
    return any(lo <= o <= hi for lo, hi in _CJK_RANGES)


def _is_word_char(ch: str) -> bool:
    # Combining marks stay attached so that scripts such as Devanagari keep
    # vowel signs inside the word.
    return ch.isalnum() or ch == "_" or unicodedata.category(ch)[0] == "M"


@dataclass(frozen=True)
class TokenSequence(Sequence[str]):
    """Immutable ordered list of non-empty tokens."""

    tokens: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if any(not t for t in self.tokens):
            raise ValueError("tokens must be non-empty strings")

    def __getitem__(self, i):
        return self.tokens[i]

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[str]:
        return iter(self.tokens)

    def __eq__(self, other) -> bool:
        if isinstance(other, TokenSequence):
            return self.tokens == other.tokens
        if isinstance(other, (list, tuple)):
            return self.tokens == tuple(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.tokens)

    def detokenize(self) -> str:
        return " ".join(self.tokens)


def normalize(text: str, lowercase: bool = False) -> str:
    text = unicodedata.normalize("NFC", text)
    return text.lower() if lowercase else text


def _split_word(text: str) -> list[str]:
    tokens: list[str] = []
    start = None
    for i, ch in enumerate(text):
        if _is_word_char(ch) and not _is_cjk(ch):
            if start is None:
                start = i
            continue
        if start is not None:
            tokens.append(text[start:i])
            start = None
        if not ch.isspace():
            tokens.append(ch)
    if start is not None:
        tokens.append(text[start:])
    return tokens


def _split_char(text: str) -> list[str]:
    return [c for c in text if not c.isspace()]


_SCHEMES: dict[str, Callable[[str], list[str]]] = {
    "word": _split_word,
    "char": _split_char,
}


def register_scheme(name: str, splitter: Callable[[str], list[str]]) -> None:
    """Register a custom splitter (for instance a learned subword model).

    The splitter receives normalized text and must return non-empty tokens.
    """
    _SCHEMES[name] = splitter


def available_schemes() -> list[str]:
    return sorted(_SCHEMES)


def tokenize(
    text: str,
    scheme: str = "word",
    max_length: int = DEFAULT_MAX_LENGTH,
    lowercase: bool = False,
) -> TokenSequence:
    """Split ``text`` into tokens, truncating from the right to ``max_length``."""
    try:
        splitter = _SCHEMES[scheme]
    except KeyError:
        raise ValueError(f"unknown tokenizer scheme {scheme!r}") from None
    tokens = splitter(normalize(text, lowercase=lowercase))
    return TokenSequence(tuple(tokens[:max_length]))


def char_ngrams(text: str, n: int, strip_whitespace: bool = True) -> Counter:
    """Multiset of contiguous character n-grams of ``text``."""
    if n < 1:
        raise InvalidOrderError(f"n-gram order must be >= 1, got {n}")
    if strip_whitespace:
        text = "".join(text.split())
    return Counter(text[i : i + n] for i in range(len(text) - n + 1))


def word_ngrams(tokens: Sequence[str], n: int) -> Counter:
    if n < 1:
        raise InvalidOrderError(f"n-gram order must be >= 1, got {n}")
    tokens = tuple(tokens)
    return Counter(tokens[i : i + n] for i in range(len(tokens) - n + 1))
