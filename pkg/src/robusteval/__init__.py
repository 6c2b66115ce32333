"""Lexical/neural MT metric combination toolkit.

Sentence-level BLEU and chrF, Levenshtein OK/BAD tagging, a z-normalized
weighted ensemble, a small fusion regressor with sentence-level features or
word-level tags, and a challenge-set harness.
"""

__version__ = "0.1.0"

from .align import BAD, OK, EditOp, TagSequence, levenshtein_align, tags_from_alignment, word_tags
from .challenge import ChallengeItem, aces_score, contrast_counts, severity_accuracy
from .ensemble import EnsembleModel, EnsembleWeights, ensemble_score, fit_normalizer, tune_weights
from .fusion import FusionConfig, FusionModel, FusionParams
from .lexmetrics import LexicalScore, sentence_bleu, sentence_chrf
from .records import MetricVector, SegmentTriplet
from .stats import (ContrastCounts, PairedScores, fisher_z, kendall_tau_b, kendall_tau_like,
                    pearson, spearman, williams_test)
from .text import TokenSequence, char_ngrams, tokenize

__all__ = [
    "BAD", "OK", "ChallengeItem", "ContrastCounts", "EditOp", "EnsembleModel",
    "EnsembleWeights", "FusionConfig", "FusionModel", "FusionParams", "LexicalScore",
    "MetricVector", "PairedScores", "SegmentTriplet", "TagSequence", "TokenSequence",
    "aces_score", "char_ngrams", "contrast_counts", "ensemble_score", "fisher_z",
    "fit_normalizer", "kendall_tau_b", "kendall_tau_like", "levenshtein_align", "pearson",
    "sentence_bleu", "sentence_chrf", "severity_accuracy", "spearman", "tags_from_alignment",
    "tokenize", "tune_weights", "williams_test", "word_tags",
]
