import random

import pytest

from conftest import EX6, post, random_moi_corpus, record
from oracles import all_subtrees, ident
from mathir.errors import EmptyCorpus, IndexIoError, VersionMismatch
from mathir.index import (
    FORMAT_VERSION,
    CorpusStats,
    build_index,
    corpus_stats,
    open_index,
    persist_index,
    serialize_index,
)
from mathir.ingest import IngestCounters
from mathir.mathml import MoiConfig

X = "<math><mi>x</mi></math>"


def brute_force_stats(posts, recs, **opts):
    occ = []
    formulas = 0
    known = {p.post_id for p in posts}
    for r in recs:
        if r.tree is None or r.post_id not in known:
            continue
        formulas += 1
        occ.extend((ident(n), c) for n, c in all_subtrees(r.tree.root, **opts))
    n_docs = len(posts)
    return CorpusStats(
        n_documents=n_docs,
        n_formulae=formulas,
        n_subexpressions=len(occ),
        n_unique_subexpressions=len({k for k, _ in occ}),
        avg_doc_length=len(occ) / n_docs,
        avg_complexity=sum(c for _, c in occ) / len(occ) if occ else 0.0,
        max_complexity=max((c for _, c in occ), default=0),
    )


def seven(stats):
    return (stats.n_documents, stats.n_formulae, stats.n_subexpressions, stats.n_unique_subexpressions,
            stats.avg_doc_length, stats.avg_complexity, stats.max_complexity)


class TestBuild:
    def test_single_formula(self, ex6_corpus):
        idx = build_index(*ex6_corpus)
        doc = idx.docs[1]
        assert [o.key for o in doc.moi_occurrences] == sorted(["mi:e", "msup(mi:x,mn:6)", "mi:x"])
        assert doc.doc_length_subexpr == 3
        assert all(o.formula_ids == (10,) for o in doc.moi_occurrences)

    def test_global_counts(self):
        idx = build_index([post(1), post(2)], [record(1, 1, X), record(2, 2, X)])
        p = idx.moi_postings["mi:x"]
        assert (p.global_tf, p.global_df) == (2, 2)

    def test_duplicate_formula_in_post(self):
        idx = build_index([post(1)], [record(5, 1, X), record(3, 1, X)])
        (occ,) = idx.docs[1].moi_occurrences
        assert occ.key == "mi:x" and occ.local_tf == 2 and occ.formula_ids == (3, 5)

    def test_empty_corpus(self):
        with pytest.raises(EmptyCorpus):
            build_index([], [])

    def test_dangling_counted(self):
        counters = IngestCounters()
        idx = build_index([post(1)], [record(1, 1, X), record(2, 99, X)], counters=counters)
        assert counters.dangling == 1
        assert 2 not in {o for d in idx.doc_list for occ in d.moi_occurrences for o in occ.formula_ids}

    def test_doc_invariants(self):
        posts, recs, _ = random_moi_corpus(random.Random(3))
        idx = build_index(posts, recs)
        for d in idx.doc_list:
            assert d.doc_length_subexpr == sum(o.local_tf for o in d.moi_occurrences)
            for o in d.moi_occurrences:
                assert o.formula_ids and list(o.formula_ids) == sorted(o.formula_ids)
                assert o.key in idx.moi_postings
        assert all(p.global_df <= idx.stats.n_documents for p in idx.moi_postings.values())


class TestStats:
    def test_ex6(self, ex6_corpus):
        s = corpus_stats(build_index(*ex6_corpus))
        assert seven(s) == (1, 1, 3, 3, 3.0, pytest.approx(4 / 3), 2)

    def test_no_formulas(self):
        s = corpus_stats(build_index([post(1, "text"), post(2, "more")], []))
        assert s.n_subexpressions == 0 and s.avg_complexity == 0.0 and s.avg_doc_length == 0.0

    def test_table_shape(self, ex6_corpus):
        tsv = corpus_stats(build_index(*ex6_corpus)).to_tsv()
        labels = [line.split("\t")[0] for line in tsv.splitlines()]
        assert labels[:7] == ["Documents", "Formulae", "Subexpressions", "Unique Subexpressions",
                              "Avg. Doc. Length", "Avg. Complexity", "Max. Complexity"]
        assert "Subexpressions\t3" in tsv.splitlines()

    @pytest.mark.parametrize("seed", range(15))
    def test_brute_force(self, seed):
        rng = random.Random(seed)
        posts, recs, _ = random_moi_corpus(rng, max_docs=50, max_unique=10_000)
        opts = {"include_root": seed % 2 == 1, "include_numerals": seed % 3 == 0}
        idx = build_index(posts, recs, MoiConfig(**opts))
        assert seven(idx.stats) == seven(brute_force_stats(posts, recs, **opts))
        assert sum(p.global_tf for p in idx.moi_postings.values()) == idx.stats.n_subexpressions


class TestPersist:
    def test_round_trip(self, tmp_path, ex6_corpus):
        idx = build_index(*ex6_corpus)
        persist_index(idx, tmp_path / "i")
        again = open_index(tmp_path / "i")
        assert again.stats == idx.stats
        assert again.params == idx.params and again.moi_config == idx.moi_config
        assert again.docs[1].moi_occurrences == idx.docs[1].moi_occurrences
        assert again.docs[1].text_tokens == idx.docs[1].text_tokens
        for key, p in idx.moi_postings.items():
            q = again.moi_postings[key]
            assert (q.global_tf, q.global_df, q.complexity) == (p.global_tf, p.global_df, p.complexity)
            assert q.doc_rows.tolist() == p.doc_rows.tolist()
        assert again.formulas == idx.formulas
        assert serialize_index(again) == serialize_index(idx)

    def test_truncated(self, tmp_path, ex6_corpus):
        data = serialize_index(build_index(*ex6_corpus))
        for cut in (5, len(data) - 1):
            (tmp_path / "t").write_bytes(data[:cut])
            with pytest.raises(IndexIoError):
                open_index(tmp_path / "t")

    def test_version_bump(self, tmp_path, ex6_corpus):
        data = bytearray(serialize_index(build_index(*ex6_corpus)))
        data[8] = FORMAT_VERSION + 1
        (tmp_path / "v").write_bytes(bytes(data))
        with pytest.raises(VersionMismatch):
            open_index(tmp_path / "v")

    def test_missing_file(self, tmp_path):
        with pytest.raises(IndexIoError):
            open_index(tmp_path / "none")

    def test_build_deterministic(self):
        posts, recs, _ = random_moi_corpus(random.Random(11), max_docs=30, max_unique=10_000)
        a = serialize_index(build_index(posts, recs))
        b = serialize_index(build_index(list(reversed(posts)), list(reversed(recs))))
        assert a == b

    def test_ex6_formula(self):
        idx = build_index([post(1)], [record(1, 1, EX6)])
        assert idx.formula_ids_of(1) == [1]
