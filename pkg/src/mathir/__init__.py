"""Math-aware retrieval over Q&A posts containing MathML formulas.

The package indexes posts and their formulas, retrieves formulas through
subexpression (MOI) scoring with a modified BM25, offers TF-IDF kNN and
fuzzy string backends, and evaluates runs with prime-family IR metrics.
"""

from mathir.errors import MathIRError
from mathir.mathml import (
    ElementNode,
    FormulaTree,
    MoiConfig,
    TokenLists,
    complexity,
    enumerate_mois,
    extract_latex,
    extract_tokens,
    moi_key,
    parse_formula,
)

__version__ = "0.1.0"

__all__ = [
    "MathIRError",
    "ElementNode",
    "FormulaTree",
    "MoiConfig",
    "TokenLists",
    "complexity",
    "enumerate_mois",
    "extract_latex",
    "extract_tokens",
    "moi_key",
    "parse_formula",
]
