import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mathir.ingest import FormulaRecord, Post, PostType, formula_from_mathml  # noqa: E402
from mathir.mathml import ElementNode, FormulaTree, extract_tokens  # noqa: E402
from mathir.synthetic import random_tree  # noqa: E402

DATA = Path(__file__).parent / "data"

EX6 = "<math><mfrac><mi>e</mi><msup><mi>x</mi><mn>6</mn></msup></mfrac></math>"


def mi(t):
    return ElementNode("mi", t)


def mo(t):
    return ElementNode("mo", t)


def mn(t):
    return ElementNode("mn", t)


def el(tag, *children):
    return ElementNode(tag, "", tuple(children))


def record(fid, pid, mathml, thread=None, kind="answer"):
    rec, ok = formula_from_mathml(fid, pid, thread if thread is not None else pid, kind, mathml)
    assert ok, mathml
    return rec


def tree_record(fid, pid, node, latex=""):
    tree = FormulaTree(node, latex)
    return FormulaRecord(fid, pid, pid, "answer", "", latex, extract_tokens(tree), tree)


def post(pid, body="", ptype=PostType.ANSWER, thread=None):
    return Post(pid, ptype, body, thread if thread is not None else pid)


def random_moi_corpus(rng: random.Random, max_docs=10, max_unique=20):
    """Random corpus of <= max_docs posts with <= max_unique distinct MOIs.

    Returns (posts, formula records, {post_id: [(formula_id, tree)]}).
    """
    from oracles import all_subtrees, ident

    while True:
        n_docs = rng.randint(2, max_docs)
        posts, recs, corpus = [], [], {}
        fid = 1
        for pid in range(1, n_docs + 1):
            posts.append(post(pid, " ".join(rng.choice("abcdefg") for _ in range(rng.randint(0, 6)))))
            corpus[pid] = []
            for _ in range(rng.randint(0, 3)):
                node = random_tree(rng, rng.randint(1, 3))
                rec = tree_record(fid, pid, node)
                recs.append(rec)
                corpus[pid].append((fid, rec.tree))
                fid += 1
        uniq = {ident(n) for items in corpus.values() for _, t in items for n, _ in all_subtrees(t.root)}
        if recs and len(uniq) <= max_unique:
            return posts, recs, corpus


def duplicate_post_corpus():
    """Query post plus an index where post 1 duplicates it verbatim.

    Distractors share text words and common MOIs (x, y, x^2) with the query
    but not its rare subexpressions.
    """
    body = "<p>evaluate the gaussian integral over the real line</p>"
    gauss = ("<math><mrow><mo>∫</mo><msup><mi>e</mi><mrow><mo>-</mo><msup><mi>x</mi><mn>2</mn></msup>"
             "</mrow></msup><mi>d</mi><mi>x</mi></mrow></math>")
    common = ["<math><mrow><mi>x</mi><mo>+</mo><mi>y</mi></mrow></math>",
              "<math><msup><mi>x</mi><mn>2</mn></msup></math>",
              "<math><mrow><mi>y</mi><mo>=</mo><mi>x</mi></mrow></math>"]
    texts = ["integral of a polynomial", "real line topology", "gaussian elimination steps",
             "evaluate the limit", "line integral in the plane", "a real function", "counting argument"]
    posts = [post(1, body)]
    recs = [record(100, 1, gauss)]
    fid = 200
    for i, text in enumerate(texts, start=2):
        posts.append(post(i, f"<p>{text}</p>"))
        for j in range(1 + i % 3):
            recs.append(record(fid, i, common[(i + j) % 3]))
            fid += 1
    query_post = post(0, body, PostType.QUESTION)
    query_formula = record(1, 0, gauss)
    return posts, recs, query_post, query_formula


@pytest.fixture
def ex6_corpus():
    """One post holding e/x^6."""
    return [post(1, "<p>tail of e over x</p>")], [record(10, 1, EX6)]
