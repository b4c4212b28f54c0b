import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import EX6, el, mi, mn, mo
from oracles import all_subtrees, count_nodes, ident
from mathir.errors import EmptyFormula, MalformedXml
from mathir.mathml import (
    ElementNode,
    FormulaTree,
    MoiConfig,
    complexity,
    enumerate_mois,
    extract_latex,
    extract_tokens,
    moi_key,
    parse_formula,
    to_mathml,
)


class TestParse:
    def test_content_token_with_alttext(self):
        t = parse_formula(r'<math alttext="\pi"><ci>\pi</ci></math>')
        assert t.root == mi(r"\pi")
        assert t.source_latex == r"\pi"

    def test_single_leaf(self):
        t = parse_formula("<math><mi>x</mi></math>")
        assert t.root == mi("x")
        assert t.source_latex == ""

    def test_fraction(self):
        t = parse_formula(EX6)
        assert t.root == el("mfrac", mi("e"), el("msup", mi("x"), mn("6")))

    def test_pool_formula_with_declaration_and_namespace(self):
        # declaration as it appears in the pool files (no closing '?')
        xml = ('<?xml version="1.0" encoding="UTF-8"><math xmlns="http://www.w3.org/1998/Math/MathML" '
               'alttext="\\pi" display="block"> <ci>\\pi</ci></math>')
        t = parse_formula(xml)
        assert t.root == mi(r"\pi")
        assert t.source_latex == r"\pi"

    def test_content_operator_and_number_normalized(self):
        t = parse_formula("<math><apply><co>+</co><cn>1</cn><ci>y</ci></apply></math>")
        assert t.root == el("apply", mo("+"), mn("1"), mi("y"))

    def test_semantics_takes_presentation_branch(self):
        xml = ('<math><semantics><mrow><mi>a</mi><mo>+</mo><mi>b</mi></mrow>'
               '<annotation encoding="application/x-tex">a+b</annotation>'
               '<annotation-xml encoding="MathML-Content"><apply><plus/><ci>a</ci><ci>b</ci></apply>'
               '</annotation-xml></semantics></math>')
        assert parse_formula(xml).root == el("mrow", mi("a"), mo("+"), mi("b"))

    def test_several_children_grouped(self):
        xml = "<math><mi>c</mi><mo>&gt;</mo><mfrac><mn>25</mn><mn>64</mn></mfrac></math>"
        assert parse_formula(xml).root == el("mrow", mi("c"), mo(">"), el("mfrac", mn("25"), mn("64")))

    def test_named_html_entity(self):
        assert parse_formula("<math><mo>&InvisibleTimes;</mo></math>").root == mo("⁢")

    def test_whitespace_trimmed(self):
        assert parse_formula("<math><mi>  x \n</mi></math>").root == mi("x")

    @pytest.mark.parametrize("xml", ["<math><mi>x</mi>", "not xml", "<mrow><mi>x</mi></mrow>"])
    def test_malformed(self, xml):
        with pytest.raises(MalformedXml):
            parse_formula(xml)

    @pytest.mark.parametrize("xml", ["<math></math>", "<math><mi> </mi><mspace/></math>"])
    def test_empty(self, xml):
        with pytest.raises(EmptyFormula):
            parse_formula(xml)


class TestLatex:
    def test_query_example(self):
        xml = ('<math xmlns="http://www.w3.org/1998/Math/MathML" display="block" '
               'alttext="{\\displaystyle c>{\\frac {25}{64}}}"><mi>c</mi></math>')
        assert extract_latex(xml) == r"{\displaystyle c>{\frac {25}{64}}}"

    def test_absent(self):
        assert extract_latex("<math><mi>x</mi></math>") == ""

    def test_pool_example(self):
        assert extract_latex(r'<math alttext="\pi"><ci>\pi</ci></math>') == r"\pi"

    def test_malformed(self):
        with pytest.raises(MalformedXml):
            extract_latex("<math")


class TestTokens:
    def test_inequality(self):
        xml = "<math><mi>c</mi><mo>&gt;</mo><mfrac><mn>25</mn><mn>64</mn></mfrac></math>"
        tok = extract_tokens(parse_formula(xml))
        assert tok.identifiers == ["c"]
        assert tok.operators == [">"]

    def test_single(self):
        tok = extract_tokens(FormulaTree(mi("x")))
        assert (tok.identifiers, tok.operators) == (["x"], [])

    def test_duplicates_kept_in_order(self):
        tok = extract_tokens(FormulaTree(el("mrow", mi("x"), mo("+"), mi("x"))))
        assert (tok.identifiers, tok.operators) == (["x", "x"], ["+"])


class TestComplexityAndKeys:
    def test_complexity(self):
        assert complexity(mi("x")) == 1
        assert complexity(el("msup", mi("x"), mn("6"))) == 2
        assert complexity(el("mfrac", mi("e"), el("msup", mi("x"), mn("6")))) == 3

    def test_keys(self):
        assert moi_key(mi("x")) == "mi:x"
        assert moi_key(el("msup", mi("x"), mn("6"))) == "msup(mi:x,mn:6)"
        assert moi_key(el("mfrac", mi("e"), el("msup", mi("x"), mn("6")))) == "mfrac(mi:e,msup(mi:x,mn:6))"

    def test_delimiters_in_text_do_not_collide(self):
        a = el("mrow", mi("a,mi:b"))
        b = el("mrow", mi("a"), mi("b"))
        assert moi_key(a) != moi_key(b)


class TestEnumerate:
    def test_disassembly_defaults(self):
        mois = enumerate_mois(parse_formula(EX6))
        assert mois == [("mi:e", 1), ("msup(mi:x,mn:6)", 2), ("mi:x", 1)]

    def test_single_token_falls_back_to_root(self):
        assert enumerate_mois(FormulaTree(mi("x"))) == [("mi:x", 1)]

    def test_lone_number_falls_back_to_root(self):
        assert enumerate_mois(FormulaTree(mn("6"))) == [("mn:6", 1)]

    def test_everything_included(self):
        mois = enumerate_mois(parse_formula(EX6), MoiConfig(include_root=True, include_numerals=True))
        assert [k for k, _ in mois] == [
            "mfrac(mi:e,msup(mi:x,mn:6))", "mi:e", "msup(mi:x,mn:6)", "mi:x", "mn:6"]

    def test_duplicates_retained(self):
        mois = enumerate_mois(FormulaTree(el("mrow", mi("x"), mo("+"), mi("x"))))
        assert [k for k, _ in mois] == ["mi:x", "mo:+", "mi:x"]


# --- property tests over random trees -------------------------------------------------

_leaf = st.builds(ElementNode, st.sampled_from(["mi", "mo", "mn"]),
                  st.sampled_from(["x", "y", "1", "+", "(", ",", "%", r"\pi"]))


def _trees(max_leaves=10):
    return st.recursive(
        _leaf,
        lambda kids: st.builds(
            lambda tag, cs: ElementNode(tag, "", tuple(cs)),
            st.sampled_from(["mrow", "msup", "mfrac"]),
            st.lists(kids, min_size=1, max_size=3),
        ),
        max_leaves=max_leaves,
    )


@given(_trees())
def test_full_enumeration_counts_every_node(node):
    mois = enumerate_mois(FormulaTree(node), MoiConfig(include_root=True, include_numerals=True))
    assert len(mois) == count_nodes(node)


@given(_trees())
def test_root_complexity_is_max(node):
    mois = enumerate_mois(FormulaTree(node), MoiConfig(include_root=True, include_numerals=True))
    assert complexity(node) == max(c for _, c in mois)


@given(_trees())
def test_default_enumeration_matches_brute_force(node):
    got = enumerate_mois(FormulaTree(node))
    want = [(moi_key(n), c) for n, c in all_subtrees(node)]
    assert got == want


@settings(max_examples=300)
@given(_trees(6), _trees(6))
def test_key_injective(a, b):
    assert (moi_key(a) == moi_key(b)) == (ident(a) == ident(b))


@given(_trees(), st.sampled_from(["", r"\frac{a}{b}", 'x<"y"&z']))
def test_round_trip(node, latex):
    tree = FormulaTree(node, latex)
    again = parse_formula(to_mathml(tree))
    assert again == tree
