"""The numba and numpy backends must agree on every kernel."""

import os
import subprocess
import sys

import numpy as np
import pytest

from mathir.kernels import _jit, _py


def codes(rng, n, hi=5):
    return rng.integers(0, hi, size=n).astype(np.int32)


@pytest.mark.parametrize("seed", range(30))
def test_lcs_parity(seed):
    rng = np.random.default_rng(seed)
    a, b = codes(rng, rng.integers(0, 80)), codes(rng, rng.integers(0, 80))
    assert _jit.lcs_length(a, b) == _py.lcs_length(a, b)


@pytest.mark.parametrize("seed", range(20))
def test_partial_batch_parity(seed):
    rng = np.random.default_rng(seed)
    q = codes(rng, rng.integers(0, 15))
    lengths = rng.integers(0, 25, size=12)
    offsets = np.concatenate([[0], np.cumsum(lengths)]).astype(np.int64)
    pool = codes(rng, int(offsets[-1]))
    a, b = _jit.partial_lcs_batch(q, pool, offsets), _py.partial_lcs_batch(q, pool, offsets)
    assert a[0].tolist() == b[0].tolist() and a[1].tolist() == b[1].tolist()


def test_wide_codepoints():
    a = np.array([0x1D400, 65, 0x10FFFF], dtype=np.int32)
    b = np.array([65, 0x10FFFF, 0x1D400], dtype=np.int32)
    assert _jit.lcs_length(a, b) == _py.lcs_length(a, b) == 2


@pytest.mark.parametrize("seed", range(10))
def test_bm25_parity(seed):
    rng = np.random.default_rng(seed)
    n_docs, n = 40, 120
    doc_idx = rng.integers(0, n_docs, size=n).astype(np.int64)
    tf = rng.integers(1, 6, size=n).astype(np.float64)
    idf = rng.random(n) * 3
    doc_len = rng.integers(1, 50, size=n_docs).astype(np.float64)
    args = (doc_idx, tf, idf, doc_len, float(doc_len.mean()), 1.2, 0.75, n_docs)
    np.testing.assert_allclose(_jit.bm25_accumulate(*args), _py.bm25_accumulate(*args), rtol=1e-12, atol=1e-15)


@pytest.mark.parametrize("seed", range(10))
def test_s_score_parity(seed):
    rng = np.random.default_rng(seed)
    n = 200
    tf = rng.integers(0, 8, size=n).astype(np.float64)
    dl = tf + rng.integers(0, 30, size=n)
    args = (tf, rng.random(n) * 2, dl, np.maximum(tf, rng.integers(1, 8, size=n)), 6.0, 2.3, 1.2, 0.75)
    a, b = _jit.moi_s_scores(*args), _py.moi_s_scores(*args)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-15)
    assert np.all(a[tf == 0] == 0)


def test_env_flag_selects_fallback():
    code = "import mathir.kernels as k; print(k.BACKEND)"
    env = dict(os.environ, MATHIR_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
