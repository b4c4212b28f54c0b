"""numba ``@njit`` kernels; same signatures as the fallbacks in ``_py``."""

import numpy as np
from numba import njit

_opts = {"cache": True, "nogil": True}


@njit(**_opts)
def _lcs(a, a_lo, a_hi, b, b_lo, b_hi, row):
    m = b_hi - b_lo
    for j in range(m + 1):
        row[j] = 0
    for i in range(a_lo, a_hi):
        diag = 0
        ai = a[i]
        for j in range(1, m + 1):
            up = row[j]
            if ai == b[b_lo + j - 1]:
                row[j] = diag + 1
            elif row[j - 1] > up:
                row[j] = row[j - 1]
            diag = up
    return row[m]


@njit(**_opts)
def lcs_length(a, b):
    if len(a) == 0 or len(b) == 0:
        return 0
    row = np.zeros(len(b) + 1, dtype=np.int64)
    return _lcs(a, 0, len(a), b, 0, len(b), row)


@njit(**_opts)
def partial_lcs_batch(query, pool, offsets):
    n = len(offsets) - 1
    best = np.zeros(n, dtype=np.int64)
    short_len = np.zeros(n, dtype=np.int64)
    max_len = len(query)
    for i in range(n):
        if offsets[i + 1] - offsets[i] > max_len:
            max_len = offsets[i + 1] - offsets[i]
    row = np.zeros(max_len + 1, dtype=np.int64)
    qn = len(query)
    for i in range(n):
        lo = offsets[i]
        cn = offsets[i + 1] - lo
        if qn <= cn:
            s_len = qn
        else:
            s_len = cn
        short_len[i] = s_len
        if s_len == 0:
            continue
        top = 0
        if qn <= cn:
            for start in range(cn - qn + 1):
                v = _lcs(query, 0, qn, pool, lo + start, lo + start + qn, row)
                if v > top:
                    top = v
                    if top == s_len:
                        break
        else:
            for start in range(qn - cn + 1):
                v = _lcs(pool, lo, lo + cn, query, start, start + cn, row)
                if v > top:
                    top = v
                    if top == s_len:
                        break
        best[i] = top
    return best, short_len


@njit(**_opts)
def bm25_accumulate(doc_idx, tf, idf, doc_len, avg_len, k, b, n_docs):
    scores = np.zeros(n_docs, dtype=np.float64)
    for p in range(len(doc_idx)):
        d = doc_idx[p]
        t = tf[p]
        scores[d] += idf[p] * t * (k + 1.0) / (t + k * (1.0 - b + b * doc_len[d] / avg_len))
    return scores


@njit(**_opts)
def moi_s_scores(tf, idf, doc_len, class_max_tf, avg_dl, avg_c, k, b):
    out = np.zeros(len(tf), dtype=np.float64)
    for p in range(len(tf)):
        t = tf[p]
        if t <= 0:
            continue
        dl = doc_len[p]
        itf = np.log(1.0 + (dl - t + 0.5) / (t + 0.5))
        num = (k + 1.0) * idf[p] * itf * t
        den = class_max_tf[p] + k * (1.0 - b + b * avg_dl / (dl * avg_c))
        out[p] = num / den
    return out
