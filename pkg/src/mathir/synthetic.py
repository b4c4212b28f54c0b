"""Seeded synthetic Q&A corpora in the same shape as the real inputs."""

from __future__ import annotations

import random
from pathlib import Path
from xml.sax.saxutils import quoteattr

from mathir.ingest import FormulaRecord, Post, PostType, formula_from_mathml
from mathir.mathml import ElementNode, FormulaTree, to_mathml

_IDENTS = list("abcdefghijklmnpqrstuvwxyz") + ["\\alpha", "\\beta", "\\pi", "\\theta", "sin", "log"]
_OPS = ["+", "-", "=", "<", ">", "/", "\\times", "\\leq", "!"]
_NUMS = [str(i) for i in range(10)] + ["10", "64", "25"]
_WRAPPERS = {"msup": 2, "msub": 2, "mfrac": 2, "msqrt": 1, "mrow": 3}


def random_tree(rng: random.Random, depth: int = 3) -> ElementNode:
    if depth <= 1 or rng.random() < 0.3:
        kind = rng.random()
        if kind < 0.55:
            return ElementNode("mi", rng.choice(_IDENTS))
        if kind < 0.8:
            return ElementNode("mn", rng.choice(_NUMS))
        return ElementNode("mo", rng.choice(_OPS))
    tag = rng.choice(list(_WRAPPERS))
    n = _WRAPPERS[tag] if tag != "mrow" else rng.randint(2, 4)
    return ElementNode(tag, "", tuple(random_tree(rng, depth - 1) for _ in range(n)))


def _latex(node: ElementNode) -> str:
    if node.is_leaf:
        return node.text
    parts = [_latex(c) for c in node.children]
    if node.tag == "msup":
        return f"{{{parts[0]}}}^{{{parts[1]}}}"
    if node.tag == "msub":
        return f"{{{parts[0]}}}_{{{parts[1]}}}"
    if node.tag == "mfrac":
        return f"\\frac{{{parts[0]}}}{{{parts[1]}}}"
    if node.tag == "msqrt":
        return f"\\sqrt{{{parts[0]}}}"
    return " ".join(parts)


def synthetic_corpus(n_posts: int, formulas_per_post: int = 5, seed: int = 0,
                     vocab_size: int = 2000, words_per_post: int = 40) -> tuple[list[Post], list[FormulaRecord]]:
    """Posts alternate question / answers within threads of up to four posts."""
    rng = random.Random(seed)
    vocab = [f"w{i}" for i in range(vocab_size)]
    posts, formulas = [], []
    thread = 0
    fid = 1
    for pid in range(1, n_posts + 1):
        if (pid - 1) % 4 == 0:
            thread = pid
            ptype = PostType.QUESTION
        else:
            ptype = PostType.ANSWER
        words = " ".join(rng.choice(vocab) for _ in range(words_per_post))
        posts.append(Post(pid, ptype, f"<p>{words}</p>", thread))
        for _ in range(formulas_per_post):
            tree = FormulaTree(random_tree(rng, rng.randint(1, 4)))
            tree = FormulaTree(tree.root, _latex(tree.root))
            rec, _ = formula_from_mathml(fid, pid, thread, ptype.value, to_mathml(tree))
            formulas.append(rec)
            fid += 1
    return posts, formulas


def write_corpus(posts, formulas, directory: str | Path) -> tuple[Path, Path]:
    """Write ``posts.xml`` and ``formulas.tsv`` into ``directory``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    post_path = d / "posts.xml"
    type_ids = {PostType.QUESTION: "1", PostType.ANSWER: "2", PostType.COMMENT: "3"}
    with open(post_path, "w", encoding="utf-8") as fh:
        fh.write('<?xml version="1.0" encoding="utf-8"?>\n<posts>\n')
        for p in posts:
            parent = f' ParentId="{p.thread_id}"' if p.post_type is PostType.ANSWER else ""
            fh.write(f'  <row Id="{p.post_id}" PostTypeId="{type_ids[p.post_type]}"{parent} '
                     f'Body={quoteattr(p.body_html)} />\n')
        fh.write("</posts>\n")
    formula_path = d / "formulas.tsv"
    with open(formula_path, "w", encoding="utf-8") as fh:
        fh.write("id\tpost_id\tthread_id\ttype\tformula\n")
        for f in formulas:
            fh.write(f"{f.formula_id}\t{f.post_id}\t{f.thread_id}\t{f.kind}\t{f.mathml}\n")
    return post_path, formula_path
