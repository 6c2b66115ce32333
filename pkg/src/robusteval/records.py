"""Plain record types passed between modules."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SegmentTriplet:
    source: str
    hypothesis: str
    reference: str
    score: float | None = None
    id: str | None = None


@dataclass(frozen=True)
class MetricVector:
    """Per-segment scores; ``neural`` is the regressor's prediction."""

    bleu: float
    chrf: float
    neural: float
    ensemble: float | None = None

    def as_dict(self) -> dict[str, float]:
        d = {"bleu": self.bleu, "chrf": self.chrf, "neural": self.neural}
        if self.ensemble is not None:
            d["ensemble"] = self.ensemble
        return d
