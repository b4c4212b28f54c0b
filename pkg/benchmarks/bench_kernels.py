"""Time the numba kernels against the numpy fallback on realistic inputs.

    python3 benchmarks/bench_kernels.py [--repeat N]

Compilation is excluded: each kernel is called once before timing. Both
backends are checked for equal output on the same inputs.
"""

import argparse
import random
import timeit

import numpy as np

from mathir.fuzzy import _codes
from mathir.kernels import _jit, _py
from mathir.synthetic import synthetic_corpus


def fuzzy_inputs(n_pool=20_000, seed=0):
    rng = random.Random(seed)
    symbols = list("xyzabn+-=^_{}()") + ["\\frac", "\\sqrt", "\\pi", "\\sum"]
    pool = ["".join(rng.choice(symbols) for _ in range(rng.randint(3, 40))) for _ in range(n_pool)]
    lengths = np.array([len(s) for s in pool], dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(lengths)]).astype(np.int64)
    return _codes(r"\frac{x^2}{y}"), _codes("".join(pool)), offsets


def moi_inputs(n=500_000, seed=0):
    rng = np.random.default_rng(seed)
    tf = rng.integers(1, 6, size=n).astype(np.float64)
    dl = tf + rng.integers(0, 60, size=n)
    return (tf, rng.random(n) * 4, dl, tf + rng.integers(0, 3, size=n), 25.0, 3.0, 1.2, 0.75)


def bm25_inputs(n_docs=50_000, n_post=400_000, seed=0):
    rng = np.random.default_rng(seed)
    doc_len = rng.integers(5, 200, size=n_docs).astype(np.float64)
    return (rng.integers(0, n_docs, size=n_post).astype(np.int64), rng.integers(1, 5, size=n_post).astype(np.float64),
            rng.random(n_post) * 5, doc_len, float(doc_len.mean()), 1.2, 0.75, n_docs)


def lcs_inputs(seed=0):
    rng = np.random.default_rng(seed)
    return rng.integers(0, 30, size=300).astype(np.int32), rng.integers(0, 30, size=300).astype(np.int32)


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.allclose(a, b, rtol=1e-12, atol=1e-15)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    # one end-to-end shaped workload too, so the numbers relate to real queries
    posts, formulas = synthetic_corpus(500, seed=1)
    latex_pool = [f.latex for f in formulas]
    offsets = np.concatenate([[0], np.cumsum([len(s) for s in latex_pool])]).astype(np.int64)
    corpus_fuzzy = (_codes(latex_pool[7]), _codes("".join(latex_pool)), offsets)

    cases = {
        "partial_lcs_batch (20k strings)": ("partial_lcs_batch", fuzzy_inputs()),
        "partial_lcs_batch (2.5k latex)": ("partial_lcs_batch", corpus_fuzzy),
        "lcs_length (300 x 300)": ("lcs_length", lcs_inputs()),
        "moi_s_scores (500k)": ("moi_s_scores", moi_inputs()),
        "bm25_accumulate (400k postings)": ("bm25_accumulate", bm25_inputs()),
    }
    print(f"{'kernel':34} {'numba ms':>10} {'numpy ms':>10} {'speedup':>8}")
    for label, (name, inputs) in cases.items():
        fj, fp = getattr(_jit, name), getattr(_py, name)
        assert same(fj(*inputs), fp(*inputs)), label
        tj = min(timeit.repeat(lambda: fj(*inputs), number=1, repeat=args.repeat))
        tp = min(timeit.repeat(lambda: fp(*inputs), number=1, repeat=args.repeat))
        print(f"{label:34} {tj * 1e3:10.2f} {tp * 1e3:10.2f} {tp / tj:7.1f}x")


if __name__ == "__main__":
    main()
