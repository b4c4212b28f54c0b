"""Loading posts and formula records from Stack Exchange XML dumps and TSV."""

from __future__ import annotations

import csv
import enum
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator
from xml.parsers import expat

from mathir.errors import EmptyFormula, MalformedXml, SchemaError, UnreadableFile
from mathir.mathml import FormulaTree, TokenLists, extract_latex, extract_tokens, parse_formula

csv.field_size_limit(sys.maxsize)


class PostType(str, enum.Enum):
    QUESTION = "question"
    ANSWER = "answer"
    COMMENT = "comment"


# Stack Exchange PostTypeId; anything else (tag wikis, moderator nominations, ...)
# is carried as COMMENT.
_SE_POST_TYPES = {"1": PostType.QUESTION, "2": PostType.ANSWER}


@dataclass(frozen=True)
class Post:
    post_id: int
    post_type: PostType
    body_html: str
    thread_id: int


@dataclass(frozen=True)
class FormulaRecord:
    formula_id: int
    post_id: int
    thread_id: int
    kind: str
    mathml: str
    latex: str
    tokens: TokenLists = field(default_factory=TokenLists)
    tree: FormulaTree | None = field(default=None, compare=False, repr=False)


@dataclass
class IngestCounters:
    posts: int = 0
    formulas: int = 0
    parse_failures: int = 0
    dangling: int = 0

    def summary_line(self) -> str:
        return f"ingest-summary\t{self.posts}\t{self.formulas}\t{self.parse_failures}\t{self.dangling}"


def _open_text(path):
    try:
        return open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise UnreadableFile(f"cannot read {path}: {exc.strerror or exc}") from None


def _to_int(value, what, line):
    try:
        return int(str(value).strip())
    except (TypeError, ValueError):
        raise SchemaError(f"{what} is not an integer: {value!r}", line) from None


def _parse_post_type(value: str, line) -> PostType:
    v = value.strip().lower()
    if v in _SE_POST_TYPES:
        return _SE_POST_TYPES[v]
    try:
        return PostType(v)
    except ValueError:
        raise SchemaError(f"unknown post type {value!r}", line) from None


def _sniff_xml(path) -> bool:
    if str(path).lower().endswith(".xml"):
        return True
    with _open_text(path) as fh:
        head = fh.read(256).lstrip("﻿ \t\r\n")
    return head.startswith("<")


def _iter_xml_posts(path) -> Iterator[Post]:
    rows: list[tuple[dict, int]] = []
    parser = expat.ParserCreate()

    def start(name, attrs):
        if name == "row":
            rows.append((attrs, parser.CurrentLineNumber))

    parser.StartElementHandler = start
    with _open_text(path) as fh:
        while True:
            chunk = fh.read(1 << 16)
            try:
                parser.Parse(chunk, not chunk)
            except expat.ExpatError as exc:
                raise SchemaError(f"malformed XML: {expat.ErrorString(exc.code)}", exc.lineno) from None
            for attrs, line in rows:
                yield _xml_row_to_post(attrs, line)
            rows.clear()
            if not chunk:
                break


def _xml_row_to_post(attrs: dict, line: int) -> Post:
    for name in ("Id", "PostTypeId"):
        if name not in attrs:
            raise SchemaError(f"row lacks required attribute {name}", line)
    post_id = _to_int(attrs["Id"], "Id", line)
    post_type = _parse_post_type(attrs["PostTypeId"], line)
    parent = attrs.get("ParentId")
    thread_id = _to_int(parent, "ParentId", line) if parent else post_id
    return Post(post_id, post_type, attrs.get("Body", ""), thread_id)


def _iter_tsv(path, required: tuple[str, ...]) -> Iterator[tuple[dict, int]]:
    with _open_text(path) as fh:
        reader = csv.reader(fh, delimiter="\t", quoting=csv.QUOTE_NONE)
        header = next(reader, None)
        if header is None:
            return
        header = [h.strip().lower() for h in header]
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(f"header lacks column(s) {', '.join(missing)}", 1)
        cols = {c: header.index(c) for c in required}
        width = max(cols.values()) + 1
        for row in reader:
            line = reader.line_num
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < width:
                raise SchemaError(f"expected at least {width} fields, got {len(row)}", line)
            yield {c: row[i] for c, i in cols.items()}, line


def load_posts(path: str | Path) -> Iterator[Post]:
    """Stream posts from an XML dump (``<posts><row .../></posts>``) or a TSV
    with columns ``post_id, post_type, thread_id, body``."""
    if _sniff_xml(path):
        yield from _iter_xml_posts(path)
        return
    for row, line in _iter_tsv(path, ("post_id", "post_type", "thread_id", "body")):
        yield Post(
            _to_int(row["post_id"], "post_id", line),
            _parse_post_type(row["post_type"], line),
            row["body"],
            _to_int(row["thread_id"], "thread_id", line),
        )


def formula_from_mathml(
    formula_id: int, post_id: int, thread_id: int, kind: str, mathml: str
) -> tuple[FormulaRecord, bool]:
    """Build a record from raw MathML. Returns ``(record, parsed_ok)``."""
    try:
        tree = parse_formula(mathml)
    except EmptyFormula:
        return FormulaRecord(formula_id, post_id, thread_id, kind, mathml, extract_latex(mathml)), False
    except MalformedXml:
        return FormulaRecord(formula_id, post_id, thread_id, kind, mathml, ""), False
    rec = FormulaRecord(
        formula_id, post_id, thread_id, kind, mathml, tree.source_latex, extract_tokens(tree), tree
    )
    return rec, True


def load_formulas(path: str | Path, counters: IngestCounters | None = None) -> Iterator[FormulaRecord]:
    """Stream formula records from a TSV with columns
    ``id, post_id, thread_id, type, formula``; extra columns are ignored.

    Unparseable MathML yields a record without tree or tokens and bumps
    ``counters.parse_failures``.
    """
    for row, line in _iter_tsv(path, ("id", "post_id", "thread_id", "type", "formula")):
        rec, ok = formula_from_mathml(
            _to_int(row["id"], "id", line),
            _to_int(row["post_id"], "post_id", line),
            _to_int(row["thread_id"], "thread_id", line),
            row["type"],
            row["formula"],
        )
        if counters is not None:
            counters.formulas += 1
            if not ok:
                counters.parse_failures += 1
        yield rec


def count_dangling(posts: Iterable[Post], formulas: Iterable[FormulaRecord]) -> int:
    known = {p.post_id for p in posts}
    return sum(1 for f in formulas if f.post_id not in known)
