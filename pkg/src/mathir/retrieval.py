"""Two-stage MOI retrieval.

Stage 1 ranks posts with classic BM25 on the text field plus a boosted BM25
on the math field. Stage 2 scores every MOI found in the retrieved posts
with the modified BM25 ``mBM25(t, D) = max_{d in D} s(t, d)``, then gives
each formula id the mean score of the MOI occurrences attached to it.

``s(t, d)`` follows the printed form::

    (k + 1) * IDF(t) * ITF(t, d) * TF(t, d)
    ---------------------------------------------------------------
    max_{t' in d, c(t') = c(t)} TF(t', d) + k * (1 - b + b * AVG_DL / (|d| * AVG_C))

with ``IDF(t) = ln(1 + (N - df + 0.5) / (df + 0.5))`` and ``ITF`` the same
expression on one document: ``ln(1 + (|d| - TF + 0.5) / (TF + 0.5))``.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Iterable, Sequence

import numpy as np

from mathir import kernels
from mathir.analysis import analyze_text
from mathir.errors import EmptyDocSet, EmptyQuery, UnknownPost
from mathir.index import MoiIndex, ScoringParams
from mathir.ingest import FormulaRecord, Post
from mathir.mathml import enumerate_mois
from mathir.ranking import ScoredHit, rank_scores

__all__ = [
    "ScoringParams",
    "idf",
    "retrieve_documents",
    "s_score",
    "score_mois",
    "rank_formula_ids",
    "query_task2",
    "query_post_terms",
    "answer_search",
]


def idf(n_docs, df):
    return np.log(1.0 + (n_docs - df + 0.5) / (df + 0.5))


def _field_scores(postings: dict, terms: Iterable[str], doc_len: np.ndarray, avg_len: float,
                  n_docs: int, params: ScoringParams) -> np.ndarray:
    rows, tfs, idfs = [], [], []
    for t in sorted(set(terms)):
        hit = postings.get(t)
        if hit is None:
            continue
        r, tf = hit
        rows.append(r)
        tfs.append(tf)
        idfs.append(np.full(len(r), idf(n_docs, len(r)), dtype=np.float64))
    if not rows or avg_len <= 0:
        return np.zeros(n_docs, dtype=np.float64)
    return kernels.bm25_accumulate(
        np.concatenate(rows), np.concatenate(tfs), np.concatenate(idfs),
        doc_len, float(avg_len), float(params.k), float(params.b), n_docs,
    )


def _stage1_scores(index: MoiIndex, text_tokens, math_keys, params: ScoringParams) -> np.ndarray:
    n = len(index.doc_list)
    text = _field_scores(index.text_postings, text_tokens, index.text_length,
                         index.avg_text_length, n, params)
    math = _field_scores(_MoiPostingView(index), math_keys, index.math_length, index.stats.avg_doc_length, n, params)
    return text + params.math_boost * math


class _MoiPostingView:
    # mapping adapter: MOI key -> (rows, tf) without copying the postings
    def __init__(self, index: MoiIndex):
        self._p = index.moi_postings

    def get(self, key):
        p = self._p.get(key)
        return None if p is None else (p.doc_rows, p.doc_tf)


def _top(index: MoiIndex, scores: np.ndarray, depth: int, mask=None) -> list[tuple[int, float]]:
    keep = scores > 0
    if mask is not None:
        keep &= mask
    rows = np.flatnonzero(keep)
    # descending score, then ascending post id (rows are ordered by post id)
    order = rows[np.lexsort((rows, -scores[rows]))][:depth]
    return [(int(index.post_ids[r]), float(scores[r])) for r in order]


def retrieve_documents(index: MoiIndex, text_tokens: Sequence[str], math_keys: Sequence[str],
                       params: ScoringParams | None = None) -> list[tuple[int, float]]:
    """Top ``params.stage1_depth`` posts for a text + math query.

    Each distinct query term counts once. Posts with zero score are dropped.
    """
    params = params or index.params
    if not text_tokens and not math_keys:
        raise EmptyQuery("query has neither text tokens nor math keys")
    return _top(index, _stage1_scores(index, text_tokens, math_keys, params), params.stage1_depth)


def s_score(moi_key: str, post_id: int, index: MoiIndex, params: ScoringParams | None = None) -> float:
    params = params or index.params
    doc = index.docs.get(post_id)
    if doc is None:
        raise UnknownPost(f"post {post_id} is not indexed")
    vid = index.moi_vocab.get(moi_key)
    if vid is None:
        return 0.0
    hit = np.flatnonzero(doc.moi_ids == vid)
    if not len(hit):
        return 0.0
    return float(_doc_s_scores(index, doc, params)[hit[0]])


def _doc_s_scores(index: MoiIndex, doc, params: ScoringParams) -> np.ndarray:
    n = len(doc.moi_ids)
    st = index.stats
    return kernels.moi_s_scores(
        doc.moi_tf,
        idf(st.n_documents, index.df[doc.moi_ids]),
        np.full(n, float(doc.doc_length_subexpr)),
        doc.class_max_tf,
        float(st.avg_doc_length), float(st.avg_complexity),
        float(params.k), float(params.b),
    )


def score_mois(index: MoiIndex, doc_set: Iterable[int], params: ScoringParams | None = None) -> dict[str, float]:
    """mBM25 of every MOI occurring in ``doc_set``: the max of s(t, d) over it."""
    params = params or index.params
    doc_ids = sorted(set(doc_set))
    if not doc_ids:
        raise EmptyDocSet("doc_set is empty")
    ids, scores = [], []
    for pid in doc_ids:
        doc = index.docs.get(pid)
        if doc is None:
            raise UnknownPost(f"post {pid} is not indexed")
        if len(doc.moi_ids):
            ids.append(doc.moi_ids)
            scores.append(_doc_s_scores(index, doc, params))
    if not ids:
        return {}
    ids = np.concatenate(ids)
    scores = np.concatenate(scores)
    uniq, inv = np.unique(ids, return_inverse=True)
    best = np.full(len(uniq), -np.inf)
    np.maximum.at(best, inv, scores)
    return {index.moi_keys[v]: float(s) for v, s in zip(uniq.tolist(), best.tolist())}


def rank_formula_ids(index: MoiIndex, moi_scores: dict[str, float], doc_set: Iterable[int],
                     k: int | None = None) -> list[ScoredHit]:
    """Average, per formula id, the mBM25 of every MOI occurrence attached to it."""
    total: dict[int, float] = defaultdict(float)
    count: dict[int, int] = defaultdict(int)
    owner: dict[int, int] = {}
    for pid in sorted(set(doc_set)):
        doc = index.docs[pid]
        for occ in doc.moi_occurrences:
            s = moi_scores.get(occ.key)
            if s is None:
                continue
            for fid in occ.formula_ids:
                total[fid] += s
                count[fid] += 1
                owner[fid] = pid
    fids = sorted(total)
    means = [total[f] / count[f] for f in fids]
    return rank_scores(fids, means, k, provenance={f: (owner[f],) for f in fids})


def query_post_terms(index: MoiIndex, body_html: str, formulas: Iterable[FormulaRecord]) -> tuple[list[str], list[str]]:
    """Analyzed text tokens and MOI keys of a whole query post."""
    text = analyze_text(body_html).tokens
    keys = []
    for f in formulas:
        if f.tree is not None:
            keys.extend(m.key for m in enumerate_mois(f.tree, index.moi_config))
    return text, keys


def _run_stage2(index, text, keys, params, k):
    docs = retrieve_documents(index, text, keys, params)
    if not docs:
        return []
    doc_set = [pid for pid, _ in docs]
    return rank_formula_ids(index, score_mois(index, doc_set, params), doc_set, k)


def query_task2(index: MoiIndex, post: Post, formulas: Iterable[FormulaRecord],
                params: ScoringParams | None = None, k: int | None = 1000) -> list[ScoredHit]:
    """Formula ids relevant to a query post (its text and all its formulas)."""
    params = params or index.params
    text, keys = query_post_terms(index, post.body_html, formulas)
    return _run_stage2(index, text, keys, params, k)


def query_indexed_post(index: MoiIndex, post_id: int, params: ScoringParams | None = None,
                       k: int | None = 1000) -> list[ScoredHit]:
    """Same as ``query_task2`` for a post already in the index."""
    params = params or index.params
    doc = index.docs.get(post_id)
    if doc is None:
        raise UnknownPost(f"post {post_id} is not indexed")
    text = list(doc.text_tokens)
    keys = [o.key for o in doc.moi_occurrences]
    return _run_stage2(index, text, keys, params, k)


def answer_search(index: MoiIndex, question_text: str, question_math: Sequence[str],
                  params: ScoringParams | None = None, k: int | None = None) -> list[ScoredHit]:
    """Rank answer posts for a question. ``question_text`` is raw HTML/text,
    ``question_math`` a list of MOI keys."""
    params = params or index.params
    text = analyze_text(question_text).tokens
    if not text and not question_math:
        raise EmptyQuery("query has neither text tokens nor math keys")
    scores = _stage1_scores(index, text, question_math, params)
    top = _top(index, scores, k or params.stage1_depth, mask=index.is_answer)
    return [ScoredHit(pid, s, r, (pid,)) for r, (pid, s) in enumerate(top, 1)]
