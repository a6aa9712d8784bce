"""Linear scoring of n-best entries and 1-best extraction.

The combined score of an entry is a plain dot product of its feature vector
with a weight vector; feature values are used as-is (log-domain by
convention) and no feature has hard-coded semantics.  Ties are broken by the
smallest original beam rank, which keeps selections deterministic and favors
the decoder's prior — in particular, all-zero weights reproduce the beam's
1-best.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import ConfigError, DataError
from .nbest import NBestEntry

NORMALIZATIONS = ("l1-unit", "none")
_L1_TOLERANCE = 1e-12


@dataclass(frozen=True)
class WeightVector:
    weights: tuple[float, ...]
    normalization: str = "none"

    def __post_init__(self) -> None:
        if self.normalization not in NORMALIZATIONS:
            raise ConfigError(f"unknown normalization {self.normalization!r}")
        if not self.weights:
            raise ConfigError("empty weight vector")
        if self.normalization == "l1-unit":
            l1 = sum(abs(w) for w in self.weights)
            if abs(l1 - 1.0) > _L1_TOLERANCE:
                raise ConfigError(f"l1-unit weights must sum to 1 in absolute value, got {l1!r}")

    @classmethod
    def l1_unit(cls, values: Sequence[float]) -> "WeightVector":
        norm = sum(abs(v) for v in values)
        if norm == 0.0:
            raise ConfigError("cannot l1-normalize an all-zero weight vector")
        return cls(tuple(float(v) / norm for v in values), "l1-unit")

    def __len__(self) -> int:
        return len(self.weights)


def combined_score(entry: NBestEntry, weights: WeightVector) -> float:
    if len(entry.features) != len(weights.weights):
        raise ConfigError(
            f"segment {entry.segment_id}: entry has {len(entry.features)} features, "
            f"weight vector has {len(weights.weights)}"
        )
    return sum(w * f for w, f in zip(weights.weights, entry.features))


def select_index(entries: Sequence[NBestEntry], weights: WeightVector) -> int:
    """Index of the highest-scoring entry; ties go to the smallest beam rank."""
    if not entries:
        raise DataError("empty n-best list for a segment")
    best_idx = 0
    best_score = combined_score(entries[0], weights)
    for idx in range(1, len(entries)):
        score = combined_score(entries[idx], weights)
        if score > best_score:
            best_idx, best_score = idx, score
    return best_idx


def rerank(
    lists: Sequence[Sequence[NBestEntry]], weights: WeightVector
) -> list[NBestEntry]:
    """The selected 1-best entry for every segment."""
    return [entries[select_index(entries, weights)] for entries in lists]
