"""TF-IDF encoding of formula identifier/operator tokens and exact kNN.

Tokens are unigrams taken verbatim. Weights are
``tf * (ln((1 + n) / (1 + df)) + 1)`` followed by L2 normalization (smooth
idf), the same convention as scikit-learn's ``TfidfVectorizer`` defaults.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from mathir.errors import EmptyPool, MathIRError
from mathir.mathml import TokenLists
from mathir.ranking import ScoredHit


@dataclass(frozen=True)
class TfidfModel:
    vocabulary: dict[str, int]
    doc_freq: np.ndarray
    n_fitted: int

    @property
    def idf(self) -> np.ndarray:
        return np.log((1.0 + self.n_fitted) / (1.0 + self.doc_freq)) + 1.0


@dataclass(frozen=True)
class FormulaVector:
    columns: np.ndarray
    weights: np.ndarray

    @property
    def is_zero(self) -> bool:
        return len(self.columns) == 0


def fit_tfidf(pool: Iterable[TokenLists]) -> TfidfModel:
    df: Counter[str] = Counter()
    n = 0
    for tokens in pool:
        n += 1
        df.update(set(tokens.all_tokens()))
    if not df:
        raise EmptyPool("no tokens to fit the TF-IDF model on")
    vocab = {tok: i for i, tok in enumerate(sorted(df))}
    return TfidfModel(vocab, np.array([df[t] for t in vocab], dtype=np.float64), n)


def encode(model: TfidfModel, tokens: TokenLists) -> FormulaVector:
    counts = Counter(t for t in tokens.all_tokens() if t in model.vocabulary)
    if not counts:
        return FormulaVector(np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.float64))
    cols = np.array(sorted(model.vocabulary[t] for t in counts), dtype=np.int64)
    inv = {model.vocabulary[t]: c for t, c in counts.items()}
    tf = np.array([inv[c] for c in cols.tolist()], dtype=np.float64)
    w = tf * model.idf[cols]
    return FormulaVector(cols, w / np.linalg.norm(w))


class PoolVectors:
    """Encoded pool stored column-wise so a sparse query touches only the
    columns it uses."""

    def __init__(self, ids: Sequence[int], vectors: Sequence[FormulaVector], n_columns: int,
                 post_ids: Sequence[int] | None = None):
        self.ids = np.asarray(ids, dtype=np.int64)
        self.post_ids = None if post_ids is None else np.asarray(post_ids, dtype=np.int64)
        rows = np.concatenate([np.full(len(v.columns), i, dtype=np.int64) for i, v in enumerate(vectors)]) \
            if vectors else np.zeros(0, dtype=np.int64)
        cols = np.concatenate([v.columns for v in vectors]) if vectors else np.zeros(0, dtype=np.int64)
        w = np.concatenate([v.weights for v in vectors]) if vectors else np.zeros(0)
        order = np.lexsort((rows, cols))
        self._rows, self._w = rows[order], w[order]
        self._starts = np.searchsorted(cols[order], np.arange(n_columns + 1))

    def __len__(self):
        return len(self.ids)

    def dot(self, q: FormulaVector) -> np.ndarray:
        out = np.zeros(len(self.ids), dtype=np.float64)
        for c, qw in zip(q.columns.tolist(), q.weights.tolist()):
            lo, hi = self._starts[c], self._starts[c + 1]
            out[self._rows[lo:hi]] += qw * self._w[lo:hi]
        return out


def encode_pool(model: TfidfModel, pool) -> PoolVectors:
    """Encode FormulaRecord-like objects (``formula_id``, ``post_id``, ``tokens``)."""
    pool = list(pool)
    vecs = [encode(model, f.tokens) for f in pool]
    return PoolVectors([f.formula_id for f in pool], vecs, len(model.vocabulary),
                       [f.post_id for f in pool])


def cosine_distances(pool_vectors: PoolVectors, query: FormulaVector) -> np.ndarray:
    # rounding can push identical unit vectors a hair past 1
    return np.clip(1.0 - pool_vectors.dot(query), 0.0, 2.0)


def knn(model: TfidfModel, pool_vectors: PoolVectors, query_vector: FormulaVector, k: int) -> list[ScoredHit]:
    """Exact nearest neighbours by cosine distance; ``score`` is ``1 - distance``."""
    if len(pool_vectors) == 0:
        raise EmptyPool("kNN needs a nonempty pool")
    if k < 1:
        raise ValueError("k must be >= 1")
    dist = cosine_distances(pool_vectors, query_vector)
    order = np.lexsort((pool_vectors.ids, dist))[:k]
    hits = []
    for rank, i in enumerate(order.tolist(), 1):
        prov = () if pool_vectors.post_ids is None else (int(pool_vectors.post_ids[i]),)
        hits.append(ScoredHit(int(pool_vectors.ids[i]), float(1.0 - dist[i]), rank, prov))
    return hits


def save_model(model: TfidfModel, path: str | Path) -> None:
    data = {"n_fitted": model.n_fitted,
            "vocabulary": sorted(model.vocabulary, key=model.vocabulary.get),
            "doc_freq": [int(x) for x in model.doc_freq]}
    Path(path).write_text(json.dumps(data, ensure_ascii=False, separators=(",", ":")), encoding="utf-8")


def load_model(path: str | Path) -> TfidfModel:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        vocab = {t: i for i, t in enumerate(data["vocabulary"])}
        return TfidfModel(vocab, np.array(data["doc_freq"], dtype=np.float64), int(data["n_fitted"]))
    except (OSError, ValueError, KeyError) as exc:
        raise MathIRError(f"cannot load encoder {path}: {exc}") from None
