"""MathML parsing, token extraction and subexpression (MOI) enumeration.

Presentation and Content token elements are mapped onto one token space
(``ci -> mi``, ``co -> mo``, ``cn -> mn``) so that query formulas written in
Presentation MathML can be matched against pool formulas written in Content
MathML.
"""

from __future__ import annotations

import html.entities
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import NamedTuple
from xml.sax.saxutils import escape, quoteattr

from mathir.errors import EmptyFormula, MalformedXml

TOKEN_TAGS = frozenset({"mi", "mo", "mn"})
CONTENT_TO_PRESENTATION = {"ci": "mi", "co": "mo", "cn": "mn"}
_ANNOTATION_TAGS = frozenset({"annotation", "annotation-xml"})
_XML_ENTITIES = frozenset({"amp", "lt", "gt", "quot", "apos"})

_XML_DECL = re.compile(r"^\s*<\?xml[^>]*>", re.IGNORECASE)
_NAMED_ENTITY = re.compile(r"&([A-Za-z][A-Za-z0-9]*);")


@dataclass(frozen=True, slots=True)
class ElementNode:
    tag: str
    text: str = ""
    children: tuple[ElementNode, ...] = ()

    @property
    def is_leaf(self) -> bool:
        return not self.children


@dataclass(frozen=True, slots=True)
class FormulaTree:
    root: ElementNode
    source_latex: str = ""


@dataclass(frozen=True, slots=True)
class TokenLists:
    identifiers: list[str] = field(default_factory=list)
    operators: list[str] = field(default_factory=list)

    def all_tokens(self) -> list[str]:
        return self.identifiers + self.operators

    def __bool__(self) -> bool:
        return bool(self.identifiers or self.operators)


@dataclass(frozen=True, slots=True)
class MoiConfig:
    include_root: bool = False
    include_numerals: bool = False


class Moi(NamedTuple):
    key: str
    complexity: int


def _local(tag: str) -> str:
    if "}" in tag:
        tag = tag.rsplit("}", 1)[1]
    if ":" in tag:
        tag = tag.rsplit(":", 1)[1]
    return tag


def _replace_entity(match: re.Match) -> str:
    name = match.group(1)
    if name in _XML_ENTITIES:
        return match.group(0)
    char = html.entities.html5.get(name + ";")
    if char is None:
        return match.group(0)
    return escape(char)


def _parse_math_element(xml: str) -> ET.Element:
    text = _XML_DECL.sub("", xml, count=1)
    text = _NAMED_ENTITY.sub(_replace_entity, text)
    try:
        elem = ET.fromstring(text)
    except ET.ParseError as exc:
        raise MalformedXml(f"cannot parse MathML: {exc}") from None
    if _local(elem.tag) != "math":
        raise MalformedXml(f"outermost element is <{_local(elem.tag)}>, expected <math>")
    return elem


def _convert(elem: ET.Element) -> ElementNode | None:
    tag = _local(elem.tag)
    tag = CONTENT_TO_PRESENTATION.get(tag, tag)
    kids = list(elem)
    if tag == "semantics":
        branches = [k for k in kids if _local(k.tag) not in _ANNOTATION_TAGS]
        return _convert(branches[0]) if branches else None
    if not kids:
        text = (elem.text or "").strip()
        return ElementNode(tag, text) if text else None
    children = tuple(
        node for node in (_convert(k) for k in kids if _local(k.tag) not in _ANNOTATION_TAGS)
        if node is not None
    )
    if not children:
        return None
    return ElementNode(tag, "", children)


def parse_formula(xml: str) -> FormulaTree:
    """Parse a ``<math>`` fragment into a FormulaTree.

    A single child of ``math`` becomes the root; several children are
    grouped under a synthetic ``mrow``.
    """
    elem = _parse_math_element(xml)
    children = [
        node for node in (_convert(k) for k in elem if _local(k.tag) not in _ANNOTATION_TAGS)
        if node is not None
    ]
    if not children:
        raise EmptyFormula("math element has no token content")
    root = children[0] if len(children) == 1 else ElementNode("mrow", "", tuple(children))
    return FormulaTree(root, elem.get("alttext", ""))


def extract_latex(xml: str) -> str:
    return _parse_math_element(xml).get("alttext", "")


def _iter_leaves(node: ElementNode):
    stack = [node]
    while stack:
        cur = stack.pop()
        if cur.is_leaf:
            yield cur
        else:
            stack.extend(reversed(cur.children))


def extract_tokens(tree: FormulaTree) -> TokenLists:
    identifiers: list[str] = []
    operators: list[str] = []
    for leaf in _iter_leaves(tree.root):
        if leaf.tag == "mi":
            identifiers.append(leaf.text)
        elif leaf.tag == "mo":
            operators.append(leaf.text)
    return TokenLists(identifiers, operators)


def complexity(node: ElementNode) -> int:
    """Nesting depth of ``node``: 1 for a token leaf."""
    if node.is_leaf:
        return 1
    return 1 + max(complexity(c) for c in node.children)


_KEY_ESCAPES = str.maketrans({"%": "%25", ",": "%2C", "(": "%28", ")": "%29"})


def _leaf_key(node: ElementNode) -> str:
    # percent-escape the key delimiters so distinct trees never share a key
    return f"{node.tag}:{node.text.strip().translate(_KEY_ESCAPES)}"


def moi_key(node: ElementNode) -> str:
    if node.is_leaf:
        return _leaf_key(node)
    return f"{node.tag}({','.join(moi_key(c) for c in node.children)})"


def enumerate_mois(tree: FormulaTree, config: MoiConfig = MoiConfig()) -> list[Moi]:
    """List every subtree of ``tree`` as a (key, complexity) pair in pre-order.

    The root and standalone ``mn`` leaves are skipped unless enabled in
    ``config``. If nothing survives the filter the root is returned alone.
    Duplicates are kept.
    """
    slots: list[Moi | None] = []
    keep: list[bool] = []

    def visit(node: ElementNode, is_root: bool) -> Moi:
        pos = len(slots)
        slots.append(None)
        keep.append(
            (config.include_root or not is_root)
            and (config.include_numerals or not (node.is_leaf and node.tag == "mn"))
        )
        if node.is_leaf:
            moi = Moi(_leaf_key(node), 1)
        else:
            subs = [visit(c, False) for c in node.children]
            moi = Moi(
                f"{node.tag}({','.join(s.key for s in subs)})",
                1 + max(s.complexity for s in subs),
            )
        slots[pos] = moi
        return moi

    root = visit(tree.root, True)
    out = [m for m, k in zip(slots, keep) if k]
    return out if out else [root]


def to_mathml(tree: FormulaTree) -> str:
    """Serialize back to a ``<math>`` string that parses to an equal tree."""

    def emit(node: ElementNode) -> str:
        if node.is_leaf:
            return f"<{node.tag}>{escape(node.text)}</{node.tag}>"
        return f"<{node.tag}>{''.join(emit(c) for c in node.children)}</{node.tag}>"

    attr = f" alttext={quoteattr(tree.source_latex)}" if tree.source_latex else ""
    return f'<math xmlns="http://www.w3.org/1998/Math/MathML"{attr}>{emit(tree.root)}</math>'
