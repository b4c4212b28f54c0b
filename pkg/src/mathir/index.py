"""Embedded two-field inverted index over posts.

Each post is a document with a text field (analyzed body tokens) and a math
field (the MOIs of all its formulas). Formula ids are attached to the MOI
occurrences of each post rather than stored in the global MOI dictionary,
so the dictionary stays proportional to the number of unique MOIs.

On-disk format (single file)::

    8 bytes   magic  b"MATHIRIX"
    1 byte    format version
    8 bytes   payload length, big-endian
    32 bytes  SHA-256 of the payload
    n bytes   payload: zlib-compressed canonical JSON

The JSON carries params, MOI config, posts, per-post MOI occurrences and
the formula table; postings and statistics are rebuilt on open.
"""

from __future__ import annotations

import hashlib
import json
import struct
import zlib
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from mathir.analysis import analyze_text
from mathir.errors import EmptyCorpus, IndexIoError, SchemaError, VersionMismatch
from mathir.ingest import FormulaRecord, Post, PostType
from mathir.mathml import MoiConfig, TokenLists, enumerate_mois

MAGIC = b"MATHIRIX"
FORMAT_VERSION = 1
_HEADER = struct.Struct(">8sBQ32s")


@dataclass(frozen=True)
class ScoringParams:
    k: float = 1.2
    b: float = 0.75
    math_boost: float = 2.0
    stage1_depth: int = 50

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError("k must be > 0")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError("b must lie in [0, 1]")
        if self.math_boost < 0:
            raise ValueError("math_boost must be >= 0")
        if self.stage1_depth < 1:
            raise ValueError("stage1_depth must be >= 1")


@dataclass(frozen=True)
class MoiOccurrence:
    key: str
    local_tf: int
    formula_ids: tuple[int, ...]  # one entry per occurrence, ascending


@dataclass
class DocEntry:
    post_id: int
    post_type: PostType
    thread_id: int
    text_tokens: dict[str, int]
    moi_occurrences: list[MoiOccurrence]
    doc_length_subexpr: int
    text_length: int = 0
    # aligned numpy views filled by MoiIndex: MOI vocabulary ids, tf, and the
    # max tf among this doc's MOIs of the same complexity
    moi_ids: np.ndarray = field(default=None, repr=False, compare=False)
    moi_tf: np.ndarray = field(default=None, repr=False, compare=False)
    class_max_tf: np.ndarray = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class CorpusStats:
    n_documents: int
    n_formulae: int
    n_subexpressions: int
    n_unique_subexpressions: int
    avg_doc_length: float
    avg_complexity: float
    max_complexity: int
    avg_complexity_unique: float = 0.0

    TABLE_ROWS = (
        ("Documents", "n_documents"),
        ("Formulae", "n_formulae"),
        ("Subexpressions", "n_subexpressions"),
        ("Unique Subexpressions", "n_unique_subexpressions"),
        ("Avg. Doc. Length", "avg_doc_length"),
        ("Avg. Complexity", "avg_complexity"),
        ("Max. Complexity", "max_complexity"),
        ("Avg. Complexity (unique)", "avg_complexity_unique"),
    )

    def to_tsv(self) -> str:
        lines = []
        for label, attr in self.TABLE_ROWS:
            v = getattr(self, attr)
            lines.append(f"{label}\t{v:.4f}" if isinstance(v, float) else f"{label}\t{v}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class MoiPosting:
    complexity: int
    global_tf: int
    global_df: int
    doc_rows: np.ndarray
    doc_tf: np.ndarray


class MoiIndex:
    """Immutable after construction; share freely between readers."""

    def __init__(self, docs: list[DocEntry], formulas: dict[int, FormulaRecord],
                 moi_complexity: dict[str, int], params: ScoringParams, moi_config: MoiConfig):
        self.params = params
        self.moi_config = moi_config
        self.doc_list = sorted(docs, key=lambda d: d.post_id)
        self.docs = {d.post_id: d for d in self.doc_list}
        self.row_of = {d.post_id: i for i, d in enumerate(self.doc_list)}
        self.post_ids = np.array([d.post_id for d in self.doc_list], dtype=np.int64)
        self.formulas = dict(sorted(formulas.items()))
        self.moi_complexity = dict(sorted(moi_complexity.items()))
        self._finalize()

    def _finalize(self):
        n = len(self.doc_list)
        self.moi_vocab = {key: i for i, key in enumerate(self.moi_complexity)}
        self.moi_keys = list(self.moi_complexity)
        self.moi_cplx = np.array(list(self.moi_complexity.values()), dtype=np.int64)
        moi_rows, moi_tfs = defaultdict(list), defaultdict(list)
        text_rows, text_tfs = defaultdict(list), defaultdict(list)
        for row, d in enumerate(self.doc_list):
            for tok, tf in d.text_tokens.items():
                text_rows[tok].append(row)
                text_tfs[tok].append(tf)
            ids = [self.moi_vocab[o.key] for o in d.moi_occurrences]
            d.moi_ids = np.array(ids, dtype=np.int64)
            d.moi_tf = np.array([o.local_tf for o in d.moi_occurrences], dtype=np.float64)
            cplx = self.moi_cplx[d.moi_ids] if ids else np.zeros(0, dtype=np.int64)
            class_max: dict[int, float] = {}
            for c, tf in zip(cplx.tolist(), d.moi_tf.tolist()):
                if tf > class_max.get(c, 0.0):
                    class_max[c] = tf
            d.class_max_tf = np.array([class_max[c] for c in cplx.tolist()], dtype=np.float64)
            for o in d.moi_occurrences:
                moi_rows[o.key].append(row)
                moi_tfs[o.key].append(o.local_tf)

        self.text_postings = {
            tok: (np.array(text_rows[tok], dtype=np.int64), np.array(text_tfs[tok], dtype=np.float64))
            for tok in sorted(text_rows)
        }
        self.moi_postings = {}
        for key, c in self.moi_complexity.items():
            rows = np.array(moi_rows[key], dtype=np.int64)
            tfs = np.array(moi_tfs[key], dtype=np.float64)
            self.moi_postings[key] = MoiPosting(c, int(tfs.sum()), len(rows), rows, tfs)

        self.text_length = np.array([d.text_length for d in self.doc_list], dtype=np.float64)
        self.math_length = np.array([d.doc_length_subexpr for d in self.doc_list], dtype=np.float64)
        self.avg_text_length = float(self.text_length.mean()) if n else 0.0
        self.df = np.array([self.moi_postings[k].global_df for k in self.moi_keys], dtype=np.float64)
        self.is_answer = np.array([d.post_type is PostType.ANSWER for d in self.doc_list], dtype=bool)
        self.stats = self._compute_stats()

    def _compute_stats(self) -> CorpusStats:
        n_docs = len(self.doc_list)
        n_sub = sum(p.global_tf for p in self.moi_postings.values())
        cplx_sum = sum(p.global_tf * p.complexity for p in self.moi_postings.values())
        n_unique = len(self.moi_postings)
        # every parsed formula contributes at least one MOI
        n_formulae = len({fid for d in self.doc_list for o in d.moi_occurrences for fid in o.formula_ids})
        return CorpusStats(
            n_documents=n_docs,
            n_formulae=n_formulae,
            n_subexpressions=n_sub,
            n_unique_subexpressions=n_unique,
            avg_doc_length=n_sub / n_docs if n_docs else 0.0,
            avg_complexity=cplx_sum / n_sub if n_sub else 0.0,
            max_complexity=int(self.moi_cplx.max()) if n_unique else 0,
            avg_complexity_unique=float(self.moi_cplx.mean()) if n_unique else 0.0,
        )

    def formula_ids_of(self, post_id: int) -> list[int]:
        return sorted({fid for o in self.docs[post_id].moi_occurrences for fid in o.formula_ids})

    def pool(self) -> list[FormulaRecord]:
        """Formula records whose posts are indexed, by ascending formula id."""
        return [f for f in self.formulas.values() if f.post_id in self.docs]


def _doc_entry(post: Post, formulas: list[FormulaRecord], moi_config: MoiConfig,
               moi_complexity: dict[str, int]) -> DocEntry:
    text = analyze_text(post.body_html).tokens
    attached: dict[str, list[int]] = defaultdict(list)
    for f in formulas:
        if f.tree is None:
            continue
        for moi in enumerate_mois(f.tree, moi_config):
            attached[moi.key].append(f.formula_id)
            moi_complexity.setdefault(moi.key, moi.complexity)
    occurrences = [
        MoiOccurrence(key, len(fids), tuple(sorted(fids))) for key, fids in sorted(attached.items())
    ]
    return DocEntry(
        post_id=post.post_id,
        post_type=post.post_type,
        thread_id=post.thread_id,
        text_tokens=dict(sorted(Counter(text).items())),
        moi_occurrences=occurrences,
        doc_length_subexpr=sum(o.local_tf for o in occurrences),
        text_length=len(text),
    )


def build_index(
    posts: Iterable[Post],
    formulas: Iterable[FormulaRecord],
    moi_config: MoiConfig = MoiConfig(),
    params: ScoringParams = ScoringParams(),
    counters=None,
) -> MoiIndex:
    """Index posts and attach the MOIs of their formulas.

    Formulas pointing at unknown posts are kept out of the index and counted
    in ``counters.dangling`` when counters are given.
    """
    post_list = list(posts)
    if not post_list:
        raise EmptyCorpus("no posts to index")
    by_post: dict[int, list[FormulaRecord]] = defaultdict(list)
    table: dict[int, FormulaRecord] = {}
    for f in formulas:
        if f.formula_id in table:
            raise SchemaError(f"duplicate formula id {f.formula_id}")
        table[f.formula_id] = f
        by_post[f.post_id].append(f)
    seen: set[int] = set()
    docs = []
    moi_complexity: dict[str, int] = {}
    for post in sorted(post_list, key=lambda p: p.post_id):
        if post.post_id in seen:
            raise SchemaError(f"duplicate post id {post.post_id}")
        seen.add(post.post_id)
        fs = sorted(by_post.get(post.post_id, ()), key=lambda f: f.formula_id)
        docs.append(_doc_entry(post, fs, moi_config, moi_complexity))
    if counters is not None:
        counters.posts = len(post_list)
        counters.dangling = sum(1 for f in table.values() if f.post_id not in seen)
    return MoiIndex(docs, table, moi_complexity, params, moi_config)


def corpus_stats(index: MoiIndex) -> CorpusStats:
    return index.stats


def _payload(index: MoiIndex) -> dict:
    return {
        "params": asdict(index.params),
        "moi_config": asdict(index.moi_config),
        "moi_complexity": index.moi_complexity,
        "docs": [
            {
                "post_id": d.post_id,
                "post_type": d.post_type.value,
                "thread_id": d.thread_id,
                "text_length": d.text_length,
                "text": [[t, n] for t, n in d.text_tokens.items()],
                "mois": [[o.key, o.local_tf, list(o.formula_ids)] for o in d.moi_occurrences],
            }
            for d in index.doc_list
        ],
        "formulas": [
            {
                "id": f.formula_id,
                "post_id": f.post_id,
                "thread_id": f.thread_id,
                "kind": f.kind,
                "latex": f.latex,
                "mathml": f.mathml,
                "identifiers": f.tokens.identifiers,
                "operators": f.tokens.operators,
            }
            for f in index.formulas.values()
        ],
    }


def serialize_index(index: MoiIndex) -> bytes:
    raw = json.dumps(_payload(index), sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    body = zlib.compress(raw.encode("utf-8"), 1)
    return _HEADER.pack(MAGIC, FORMAT_VERSION, len(body), hashlib.sha256(body).digest()) + body


def persist_index(index: MoiIndex, path: str | Path) -> None:
    data = serialize_index(index)
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise IndexIoError(f"cannot write index {path}: {exc.strerror or exc}") from None


def deserialize_index(data: bytes) -> MoiIndex:
    if len(data) < _HEADER.size:
        raise IndexIoError("index file truncated (header)")
    magic, version, length, digest = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise IndexIoError("not an index file (bad magic)")
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"index format version {version}, this build reads {FORMAT_VERSION}")
    body = data[_HEADER.size:]
    if len(body) != length or hashlib.sha256(body).digest() != digest:
        raise IndexIoError("index file truncated or corrupt")
    try:
        payload = json.loads(zlib.decompress(body).decode("utf-8"))
    except (zlib.error, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise IndexIoError(f"index payload unreadable: {exc}") from None

    docs = [
        DocEntry(
            post_id=d["post_id"],
            post_type=PostType(d["post_type"]),
            thread_id=d["thread_id"],
            text_tokens={t: n for t, n in d["text"]},
            moi_occurrences=[MoiOccurrence(k, tf, tuple(fids)) for k, tf, fids in d["mois"]],
            doc_length_subexpr=sum(tf for _, tf, _ in d["mois"]),
            text_length=d["text_length"],
        )
        for d in payload["docs"]
    ]
    formulas = {
        f["id"]: FormulaRecord(
            f["id"], f["post_id"], f["thread_id"], f["kind"], f["mathml"], f["latex"],
            TokenLists(f["identifiers"], f["operators"]),
        )
        for f in payload["formulas"]
    }
    return MoiIndex(
        docs, formulas, payload["moi_complexity"],
        ScoringParams(**payload["params"]), MoiConfig(**payload["moi_config"]),
    )


def open_index(path: str | Path) -> MoiIndex:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise IndexIoError(f"cannot read index {path}: {exc.strerror or exc}") from None
    return deserialize_index(data)
