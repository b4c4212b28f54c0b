"""Shared ranked-hit type and the single tie-breaking rule used everywhere."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence


@dataclass(frozen=True)
class ScoredHit:
    id: int
    score: float
    rank: int
    provenance: tuple[int, ...] = ()


def rank_scores(
    ids: Sequence[int],
    scores: Sequence[float],
    k: int | None = None,
    provenance: Mapping[int, tuple[int, ...]] | None = None,
) -> list[ScoredHit]:
    """Sort by descending score, ties by ascending id, keep the top ``k``."""
    order = sorted(zip(ids, scores), key=lambda p: (-p[1], p[0]))
    if k is not None:
        order = order[:k]
    prov = provenance or {}
    return [
        ScoredHit(int(i), float(s), r, tuple(prov.get(i, ())))
        for r, (i, s) in enumerate(order, 1)
    ]
