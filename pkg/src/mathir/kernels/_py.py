"""Fallback kernels: numpy vectorization and bit-parallel LCS on Python ints."""

import numpy as np


def _char_masks(codes):
    masks = {}
    for i, ch in enumerate(codes.tolist()):
        masks[ch] = masks.get(ch, 0) | (1 << i)
    return masks


def _lcs_masked(masks, n, seq):
    # Allison-Dix / Hyyrö bit-vector LCS; zero bits of v count matched columns
    full = (1 << n) - 1
    v = full
    for ch in seq:
        u = v & masks.get(ch, 0)
        v = ((v + u) | (v - u)) & full
    return n - v.bit_count()


def lcs_length(a, b):
    """Length of the longest common subsequence of two code-point arrays."""
    if len(a) == 0 or len(b) == 0:
        return 0
    return _lcs_masked(_char_masks(a), len(a), b.tolist())


def partial_lcs_batch(query, pool, offsets):
    """For every pool string, best LCS between the shorter string and each
    equal-length window of the longer one.

    Returns ``(best_lcs, short_len)`` int64 arrays; ``pool[offsets[i]:offsets[i+1]]``
    is entry ``i``.
    """
    n = len(offsets) - 1
    best = np.zeros(n, dtype=np.int64)
    short_len = np.zeros(n, dtype=np.int64)
    q_list = query.tolist()
    q_masks = _char_masks(query) if len(query) else {}
    for i in range(n):
        cand = pool[offsets[i]:offsets[i + 1]]
        if len(query) <= len(cand):
            s_len, masks, long_seq = len(query), q_masks, cand.tolist()
        else:
            s_len, masks, long_seq = len(cand), _char_masks(cand), q_list
        short_len[i] = s_len
        if s_len == 0:
            continue
        top = 0
        for start in range(len(long_seq) - s_len + 1):
            m = _lcs_masked(masks, s_len, long_seq[start:start + s_len])
            if m > top:
                top = m
                if top == s_len:
                    break
        best[i] = top
    return best, short_len


def bm25_accumulate(doc_idx, tf, idf, doc_len, avg_len, k, b, n_docs):
    """Sum classic BM25 contributions of postings into a per-document array."""
    dl = doc_len[doc_idx]
    contrib = idf * tf * (k + 1.0) / (tf + k * (1.0 - b + b * dl / avg_len))
    return np.bincount(doc_idx, weights=contrib, minlength=n_docs).astype(np.float64)


def moi_s_scores(tf, idf, doc_len, class_max_tf, avg_dl, avg_c, k, b):
    """Modified BM25 score s(t, d) for aligned arrays of (MOI, document) pairs."""
    out = np.zeros(len(tf), dtype=np.float64)
    hit = tf > 0
    tf_h = tf[hit]
    dl_h = doc_len[hit]
    itf = np.log(1.0 + (dl_h - tf_h + 0.5) / (tf_h + 0.5))
    num = (k + 1.0) * idf[hit] * itf * tf_h
    den = class_max_tf[hit] + k * (1.0 - b + b * avg_dl / (dl_h * avg_c))
    out[hit] = num / den
    return out
