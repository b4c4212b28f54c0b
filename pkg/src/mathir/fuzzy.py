"""Fuzzy string search over formula LaTeX strings.

``ratio`` is the normalized indel similarity (insertions and deletions
only), ``partial_ratio`` takes the best ``ratio`` between the shorter string
and every equal-length window of the longer one. Scores are in [0, 1].
LaTeX is compared raw: no case folding, trimming or brace normalization.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

from mathir import kernels
from mathir.errors import EmptyPool
from mathir.ranking import ScoredHit, rank_scores


def _codes(s: str) -> np.ndarray:
    return np.frombuffer(s.encode("utf-32-le"), dtype=np.uint32).astype(np.int32)


def indel_distance(a: str, b: str) -> int:
    return len(a) + len(b) - 2 * kernels.lcs_length(_codes(a), _codes(b))


def ratio(a: str, b: str) -> float:
    total = len(a) + len(b)
    if total == 0:
        return 1.0
    return 2 * kernels.lcs_length(_codes(a), _codes(b)) / total


def partial_ratio(a: str, b: str) -> float:
    best, short = kernels.partial_lcs_batch(_codes(a), _codes(b), np.array([0, len(b)], dtype=np.int64))
    s = int(short[0])
    if s == 0:
        return 1.0
    return int(best[0]) / s


def partial_ratio_many(query: str, candidates: list[str]) -> np.ndarray:
    """Vector of ``partial_ratio(query, c)`` for every candidate."""
    if not candidates:
        return np.zeros(0, dtype=np.float64)
    lengths = np.fromiter((len(c) for c in candidates), dtype=np.int64, count=len(candidates))
    offsets = np.zeros(len(candidates) + 1, dtype=np.int64)
    np.cumsum(lengths, out=offsets[1:])
    joined = _codes("".join(candidates))
    best, short = kernels.partial_lcs_batch(_codes(query), joined, offsets)
    out = np.ones(len(candidates), dtype=np.float64)
    nz = short > 0
    out[nz] = best[nz] / short[nz]
    return out


def fuzzy_query(pool: Iterable, query_latex: str, k: int = 10) -> list[ScoredHit]:
    """Rank pool formulas by partial ratio of their LaTeX against ``query_latex``.

    ``pool`` holds FormulaRecord-like objects with ``formula_id``, ``post_id``
    and ``latex``. Adding formulas needs no refit; each is scored on its own.
    """
    pool = list(pool)
    if not pool:
        raise EmptyPool("fuzzy search needs a nonempty formula pool")
    scores = partial_ratio_many(query_latex, [f.latex for f in pool])
    ids = [f.formula_id for f in pool]
    prov = {f.formula_id: (f.post_id,) for f in pool}
    return rank_scores(ids, scores, k, provenance=prov)
