"""Prime-family IR metrics: unjudged run entries are removed before scoring.

nDCG'_p uses gain ``2**rel - 1`` and discount ``log2(i + 1)``. The ideal
DCG sorts the query's full set of judged relevances. Queries whose run is
empty after filtering have no returned answers and are left out of the mean
unless the ``"zero"`` empty-query policy is chosen.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from mathir.errors import MissingJudgments, SchemaError, UnreadableFile

EMPTY_POLICIES = ("exclude", "zero")
RELEVANT_THRESHOLD = 2


@dataclass(frozen=True)
class Judgment:
    query_id: str
    candidate_id: str
    relevance: int


@dataclass(frozen=True)
class RunEntry:
    query_id: str
    candidate_id: str
    rank: int
    score: float
    run_tag: str = "run"
    post_id: str | None = None


@dataclass
class QueryEval:
    dcg: float
    idcg: float
    ndcg: float
    used: bool
    ap: float = 0.0
    p_at_k: float = 0.0
    top_candidate: str | None = None
    top_relevance: int | None = None
    best_relevance: int | None = None


@dataclass
class EvalReport:
    per_query: dict[str, QueryEval] = field(default_factory=dict)
    mean_ndcg: float = 0.0
    map: float = 0.0
    p_at_10: float = 0.0
    n_queries_used: int = 0
    p: int = 10
    k: int = 10


Qrels = Mapping[str, Mapping[str, int]]


def qrels_from_judgments(judgments: Iterable[Judgment]) -> dict[str, dict[str, int]]:
    out: dict[str, dict[str, int]] = defaultdict(dict)
    for j in judgments:
        if j.candidate_id in out[j.query_id]:
            raise SchemaError(f"duplicate judgment for ({j.query_id}, {j.candidate_id})")
        out[j.query_id][j.candidate_id] = j.relevance
    return dict(out)


def group_run(run: Iterable[RunEntry]) -> dict[str, list[RunEntry]]:
    by_q: dict[str, list[RunEntry]] = defaultdict(list)
    for e in run:
        by_q[e.query_id].append(e)
    return {q: sorted(es, key=lambda e: e.rank) for q, es in sorted(by_q.items())}


def prime_filter(entries: Sequence[RunEntry], judged: Mapping[str, int]) -> list[RunEntry]:
    """Drop unjudged entries and re-rank the survivors 1..n in order."""
    kept = [e for e in entries if e.candidate_id in judged]
    return [
        RunEntry(e.query_id, e.candidate_id, r, e.score, e.run_tag, e.post_id)
        for r, e in enumerate(kept, 1)
    ]


def dcg_prime(rels: Sequence[int], p: int) -> float:
    return sum((2 ** rel - 1) / math.log2(i + 1) for i, rel in enumerate(rels[:p], 1))


def idcg_prime(all_judged_rels: Iterable[int], p: int) -> float:
    return dcg_prime(sorted(all_judged_rels, reverse=True), p)


def average_precision(rels: Sequence[int], n_relevant: int, threshold: int = RELEVANT_THRESHOLD) -> float:
    if n_relevant == 0:
        return 0.0
    hits, total = 0, 0.0
    for i, rel in enumerate(rels, 1):
        if rel >= threshold:
            hits += 1
            total += hits / i
    return total / n_relevant


def precision_at(rels: Sequence[int], k: int, threshold: int = RELEVANT_THRESHOLD) -> float:
    # denominator stays k even when fewer entries survive filtering
    return sum(1 for rel in rels[:k] if rel >= threshold) / k


def evaluate(run: Iterable[RunEntry], qrels: Qrels, p: int = 10, k: int = 10,
             empty_policy: str = "exclude", threshold: int = RELEVANT_THRESHOLD) -> EvalReport:
    """Compute nDCG'_p, MAP' and P@k for every query of the run."""
    if empty_policy not in EMPTY_POLICIES:
        raise ValueError(f"empty_policy must be one of {EMPTY_POLICIES}")
    if p < 1 or k < 1:
        raise ValueError("p and k must be >= 1")
    by_q = group_run(run)
    if not set(by_q) & set(qrels):
        raise MissingJudgments("run and qrels share no query ids")
    queries = sorted(set(by_q) | set(qrels)) if empty_policy == "zero" else list(by_q)
    report = EvalReport(p=p, k=k)
    for q in queries:
        judged = qrels.get(q, {})
        kept = prime_filter(by_q.get(q, []), judged)
        rels = [judged[e.candidate_id] for e in kept]
        idcg = idcg_prime(judged.values(), p)
        dcg = dcg_prime(rels, p)
        n_rel = sum(1 for r in judged.values() if r >= threshold)
        report.per_query[q] = QueryEval(
            dcg=dcg,
            idcg=idcg,
            ndcg=dcg / idcg if idcg > 0 else 0.0,
            used=bool(kept) or empty_policy == "zero",
            ap=average_precision(rels, n_rel, threshold),
            p_at_k=precision_at(rels, k, threshold),
            top_candidate=kept[0].candidate_id if kept else None,
            top_relevance=rels[0] if rels else None,
            best_relevance=max(judged.values()) if judged else None,
        )
    used = [e for e in report.per_query.values() if e.used]
    report.n_queries_used = len(used)
    if used:
        report.mean_ndcg = sum(e.ndcg for e in used) / len(used)
        report.map = sum(e.ap for e in used) / len(used)
        report.p_at_10 = sum(e.p_at_k for e in used) / len(used)
    return report


def ndcg_prime(run, qrels, p: int = 10, empty_policy: str = "exclude") -> EvalReport:
    return evaluate(run, qrels, p=p, empty_policy=empty_policy)


def map_prime(run, qrels, empty_policy: str = "exclude", threshold: int = RELEVANT_THRESHOLD) -> float:
    return evaluate(run, qrels, empty_policy=empty_policy, threshold=threshold).map


def p_at_k(run, qrels, k: int = 10, empty_policy: str = "exclude", threshold: int = RELEVANT_THRESHOLD) -> float:
    return evaluate(run, qrels, k=k, empty_policy=empty_policy, threshold=threshold).p_at_10


# ---------------------------------------------------------------------------
# file formats


def _rows(path):
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise UnreadableFile(f"cannot read {path}: {exc.strerror or exc}") from None
    with fh:
        for lineno, row in enumerate(csv.reader(fh, delimiter="\t", quoting=csv.QUOTE_NONE), 1):
            if row and row[0].strip() and not row[0].startswith("#"):
                yield lineno, [c.strip() for c in row]


def read_qrels(path: str | Path) -> dict[str, dict[str, int]]:
    """``query_id <TAB> 0 <TAB> candidate_id <TAB> relevance`` lines."""
    judgments = []
    for line, row in _rows(path):
        if len(row) != 4:
            raise SchemaError(f"qrels line needs 4 fields, got {len(row)}", line)
        try:
            rel = int(row[3])
        except ValueError:
            raise SchemaError(f"relevance is not an integer: {row[3]!r}", line) from None
        if not 0 <= rel <= 3:
            raise SchemaError(f"relevance {rel} outside 0..3", line)
        judgments.append(Judgment(row[0], row[2], rel))
    return qrels_from_judgments(judgments)


def read_run(path: str | Path) -> list[RunEntry]:
    """Five columns ``query_id candidate_id rank score run_tag``; Task 2 runs
    carry ``post_id`` as an extra column after ``candidate_id``."""
    out = []
    for line, row in _rows(path):
        if len(row) == 5:
            q, c, rank, score, tag = row
            post = None
        elif len(row) == 6:
            q, c, post, rank, score, tag = row
        else:
            raise SchemaError(f"run line needs 5 or 6 fields, got {len(row)}", line)
        try:
            out.append(RunEntry(q, c, int(rank), float(score), tag, post))
        except ValueError:
            raise SchemaError("rank or score is not numeric", line) from None
    return out


def format_run(entries: Iterable[RunEntry]) -> str:
    lines = []
    for e in entries:
        cols = [e.query_id, e.candidate_id]
        if e.post_id is not None:
            cols.append(e.post_id)
        cols += [str(e.rank), repr(float(e.score)), e.run_tag]
        lines.append("\t".join(cols))
    return "".join(line + "\n" for line in lines)


def _fmt(x) -> str:
    return "-" if x is None else f"{x:.3f}" if isinstance(x, float) else str(x)


def format_report(report: EvalReport, metric: str = "all") -> str:
    """Per-query TSV (query, top candidate, relevance, best relevance, metric columns) followed by mean lines."""
    show_ndcg = metric in ("ndcg-prime", "all")
    show_ap = metric in ("map-prime", "all")
    show_p = metric in ("p@10", "all")
    header = ["query_id", "candidate_id", "relevance", "best_relevance"]
    if show_ndcg:
        header += [f"dcg_prime@{report.p}", f"idcg_prime@{report.p}", f"ndcg_prime@{report.p}"]
    if show_ap:
        header.append("ap_prime")
    if show_p:
        header.append(f"p@{report.k}")
    header.append("used")
    lines = ["\t".join(header)]
    for q, e in report.per_query.items():
        cols = [q, e.top_candidate or "-", _fmt(e.top_relevance), _fmt(e.best_relevance)]
        if show_ndcg:
            cols += [_fmt(e.dcg), _fmt(e.idcg), _fmt(e.ndcg)]
        if show_ap:
            cols.append(_fmt(e.ap))
        if show_p:
            cols.append(_fmt(e.p_at_k))
        cols.append("1" if e.used else "0")
        lines.append("\t".join(cols))
    if show_ndcg:
        lines.append(f"mean_ndcg_prime\t{report.mean_ndcg:.3f}")
    if show_ap:
        lines.append(f"map_prime\t{report.map:.3f}")
    if show_p:
        lines.append(f"p@{report.k}\t{report.p_at_10:.3f}")
    lines.append(f"queries_used\t{report.n_queries_used}")
    return "\n".join(lines) + "\n"
