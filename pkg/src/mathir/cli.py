"""Command line entry point: ``mathir {ingest,index,stats,query,eval}``.

Machine-readable output goes to stdout as TSV, diagnostics to stderr.
Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from mathir.config import Config
from mathir.errors import MathIRError, SchemaError, UnreadableFile
from mathir.fuzzy import fuzzy_query
from mathir.index import build_index, open_index, persist_index
from mathir.ingest import IngestCounters, Post, PostType, formula_from_mathml, load_formulas, load_posts
from mathir.metrics import EMPTY_POLICIES, RunEntry, evaluate, format_report, format_run, read_qrels, read_run
from mathir.ranking import ScoredHit
from mathir.retrieval import query_indexed_post, query_task2
from mathir.vectors import encode, encode_pool, fit_tfidf, knn, load_model, save_model

DEFAULTS = Config()


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _d(name: str) -> str:
    v = getattr(DEFAULTS, name)
    return f"(default: {str(v).lower() if isinstance(v, bool) else v})"


def _add_config(p):
    p.add_argument("--config", type=Path, help="key = value config file; flags override it")


def _add_moi_flags(p):
    p.add_argument("--include-root", dest="include_root", action="store_const", const=True,
                   help=f"index the whole formula as an MOI {_d('include_root')}")
    p.add_argument("--include-numerals", dest="include_numerals", action="store_const", const=True,
                   help=f"index standalone numbers as MOIs {_d('include_numerals')}")


def _add_scoring_flags(p):
    p.add_argument("--bm25-k", dest="k", type=float, help=f"BM25 k {_d('k')}")
    p.add_argument("--bm25-b", dest="b", type=float, help=f"BM25 b {_d('b')}")
    p.add_argument("--math-boost", type=float, help=f"stage-1 math field boost {_d('math_boost')}")
    p.add_argument("--stage1-depth", type=int, help=f"posts kept by stage 1 {_d('stage1_depth')}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mathir", description="Math-aware formula retrieval and prime-metric evaluation.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("ingest", help="load posts/formulas and report counts")
    p.add_argument("--posts", type=Path, required=True, help="posts XML dump or TSV")
    p.add_argument("--formulas", type=Path, help="formula TSV (id, post_id, thread_id, type, formula)")

    p = sub.add_parser("index", help="build and persist an index")
    p.add_argument("--posts", type=Path, required=True, help="posts XML dump or TSV")
    p.add_argument("--formulas", type=Path, required=True, help="formula TSV")
    p.add_argument("--out", type=Path, required=True, help="index file to write")
    p.add_argument("--encoder", action="store_true",
                   help="also write the fitted TF-IDF encoder next to the index (<out>.tfidf.json)")
    _add_config(p)
    _add_moi_flags(p)
    _add_scoring_flags(p)

    p = sub.add_parser("stats", help="print corpus statistics as TSV")
    p.add_argument("--index", type=Path, required=True)

    p = sub.add_parser("query", help="retrieve formulas; writes a run file to stdout")
    p.add_argument("--index", type=Path, required=True)
    p.add_argument("--mode", choices=("moi", "knn", "fuzzy"), required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--topic-file", type=Path,
                     help="TSV with header query_id and any of formula_id, text, latex, mathml")
    src.add_argument("--formula-id", type=int, help="query with an indexed formula (and its post)")
    src.add_argument("--latex", help="ad-hoc LaTeX query (fuzzy mode)")
    src.add_argument("--mathml", help="ad-hoc MathML query")
    src.add_argument("--text", help="ad-hoc text query (moi mode)")
    p.add_argument("--query-id", default="q1", help="query id for ad-hoc queries (default: q1)")
    p.add_argument("--k", type=int,
                   help=f"hits per query; defaults to moi_k {DEFAULTS.moi_k}, knn_k {DEFAULTS.knn_k}, "
                        f"fuzzy_k {DEFAULTS.fuzzy_k} by mode")
    p.add_argument("--run-tag", help=f"run tag column {_d('run_tag')}")
    _add_config(p)
    _add_scoring_flags(p)

    p = sub.add_parser("eval", help="score a run against qrels")
    p.add_argument("--run", type=Path, required=True)
    p.add_argument("--qrels", type=Path, required=True)
    p.add_argument("--metric", choices=("ndcg-prime", "map-prime", "p@10", "all"), default="all",
                   help="metric(s) to report (default: all)")
    p.add_argument("--p", dest="eval_p", type=int, help=f"nDCG' cutoff {_d('eval_p')}")
    p.add_argument("--k", dest="eval_k", type=int, help=f"precision cutoff {_d('eval_k')}")
    p.add_argument("--empty-policy", choices=EMPTY_POLICIES,
                   help=f"queries with no judged results: exclude from or count as zero in the mean "
                        f"{_d('empty_policy')}")
    _add_config(p)
    return parser


def _load_config(args) -> Config:
    cfg = DEFAULTS
    if getattr(args, "config", None):
        try:
            cfg = Config.loads(args.config.read_text(encoding="utf-8"))
        except OSError as exc:
            raise UnreadableFile(f"cannot read {args.config}: {exc.strerror or exc}") from None
    names = ("include_root", "include_numerals", "k", "b", "math_boost", "stage1_depth",
             "eval_p", "eval_k", "empty_policy", "run_tag")
    return cfg.override(**{n: getattr(args, n, None) for n in names})


def _cmd_ingest(args, out):
    counters = IngestCounters()
    posts = list(load_posts(args.posts))
    counters.posts = len(posts)
    if args.formulas:
        known = {p.post_id for p in posts}
        for f in load_formulas(args.formulas, counters):
            if f.post_id not in known:
                counters.dangling += 1
    out.write(counters.summary_line() + "\n")


def _cmd_index(args, out):
    cfg = _load_config(args)
    counters = IngestCounters()
    posts = list(load_posts(args.posts))
    index = build_index(posts, load_formulas(args.formulas, counters), cfg.moi_config, cfg.scoring, counters)
    persist_index(index, args.out)
    if args.encoder:
        save_model(fit_tfidf([f.tokens for f in index.pool()]), _encoder_path(args.out))
    out.write(counters.summary_line() + "\n")


def _encoder_path(index_path: Path) -> Path:
    return index_path.with_name(index_path.name + ".tfidf.json")


def _cmd_stats(args, out):
    out.write(open_index(args.index).stats.to_tsv())


def _read_topics(path: Path) -> list[dict]:
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise UnreadableFile(f"cannot read {path}: {exc.strerror or exc}") from None
    with fh:
        rows = list(csv.DictReader(fh, delimiter="\t", quoting=csv.QUOTE_NONE))
    if rows and "query_id" not in rows[0]:
        raise SchemaError("topic file lacks a query_id column", 1)
    return [{k: v for k, v in r.items() if k and v not in (None, "")} for r in rows]


def _topics(args) -> list[dict]:
    if args.topic_file:
        return _read_topics(args.topic_file)
    t = {"query_id": args.query_id}
    for name in ("formula_id", "latex", "mathml", "text"):
        v = getattr(args, name)
        if v is not None:
            t[name] = str(v)
    return [t]


def _formula(index, topic):
    fid = int(topic["formula_id"])
    f = index.formulas.get(fid)
    if f is None:
        raise SchemaError(f"formula id {fid} is not in the index")
    return f


def _adhoc_formula(mathml: str):
    rec, ok = formula_from_mathml(0, 0, 0, "query", mathml)
    if not ok:
        raise SchemaError("query MathML could not be parsed")
    return rec


def _query_moi(index, topic, cfg, k):
    if "formula_id" in topic:
        post_id = _formula(index, topic).post_id
        if post_id not in index.docs:
            raise SchemaError(f"post {post_id} of formula {topic['formula_id']} is not indexed")
        return query_indexed_post(index, post_id, cfg.scoring, k)
    if "text" not in topic and "mathml" not in topic:
        raise UsageError("moi mode needs formula_id, text or mathml")
    formulas = [_adhoc_formula(topic["mathml"])] if "mathml" in topic else []
    post = Post(0, PostType.QUESTION, topic.get("text", ""), 0)
    return query_task2(index, post, formulas, cfg.scoring, k)


class _KnnBackend:
    def __init__(self, index, index_path: Path):
        self.index = index
        pool = index.pool()
        sidecar = _encoder_path(index_path)
        self.model = load_model(sidecar) if sidecar.exists() else fit_tfidf([f.tokens for f in pool])
        self.vectors = encode_pool(self.model, pool)

    def __call__(self, topic, k):
        if "formula_id" in topic:
            tokens = _formula(self.index, topic).tokens
        elif "mathml" in topic:
            tokens = _adhoc_formula(topic["mathml"]).tokens
        else:
            raise UsageError("knn mode needs formula_id or mathml")
        return knn(self.model, self.vectors, encode(self.model, tokens), k)


def _query_fuzzy(index, topic, pool, k):
    if "latex" in topic:
        latex = topic["latex"]
    elif "formula_id" in topic:
        latex = _formula(index, topic).latex
    elif "mathml" in topic:
        latex = _adhoc_formula(topic["mathml"]).latex
    else:
        raise UsageError("fuzzy mode needs latex, formula_id or mathml")
    return fuzzy_query(pool, latex, k)


def _cmd_query(args, out):
    cfg = _load_config(args)
    index = open_index(args.index)
    k = args.k if args.k is not None else {"moi": cfg.moi_k, "knn": cfg.knn_k, "fuzzy": cfg.fuzzy_k}[args.mode]
    if k < 1:
        raise UsageError("--k must be >= 1")
    topics = _topics(args)
    if args.mode == "knn":
        backend = _KnnBackend(index, args.index)
        run = lambda t: backend(t, k)  # noqa: E731
    elif args.mode == "fuzzy":
        # formulas without LaTeX would match everything as an empty substring
        pool = [f for f in index.pool() if f.latex]
        run = lambda t: _query_fuzzy(index, t, pool, k)  # noqa: E731
    else:
        run = lambda t: _query_moi(index, t, cfg, k)  # noqa: E731
    for topic in topics:
        hits: list[ScoredHit] = run(topic)
        entries = [
            RunEntry(topic["query_id"], str(h.id), h.rank, h.score, cfg.run_tag,
                     str(h.provenance[0]) if h.provenance else "-")
            for h in hits
        ]
        out.write(format_run(entries))


def _cmd_eval(args, out):
    cfg = _load_config(args)
    report = evaluate(read_run(args.run), read_qrels(args.qrels), p=cfg.eval_p, k=cfg.eval_k,
                      empty_policy=cfg.empty_policy)
    out.write(format_report(report, args.metric))


COMMANDS = {
    "ingest": _cmd_ingest,
    "index": _cmd_index,
    "stats": _cmd_stats,
    "query": _cmd_query,
    "eval": _cmd_eval,
}


def run_cli(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        COMMANDS[args.command](args, out)
    except (UsageError, ValueError) as exc:
        err.write(f"mathir {args.command}: error: {exc}\n")
        return 1
    except MathIRError as exc:
        err.write(f"mathir {args.command}: {type(exc).__name__}: {exc}\n")
        return 2
    return 0


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
