"""English text analyzer for post bodies.

Order of steps: strip HTML tags (keeping their text), lowercase, fold to
ASCII, split on non-alphanumerics, drop stopwords, Porter-stem.

Stemming is iterated to a fixed point and stopwords are filtered again after
stemming, so running the analyzer over its own joined output is a no-op.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from functools import lru_cache
from html.parser import HTMLParser

from nltk.stem.porter import PorterStemmer

# Frozen list; changing it changes every index built with it. Single letters are
# left out on purpose: in math posts they are variable names.
STOPWORDS = frozenset("""
about above after again against all am an and any are as at be because been
before being below between both but by can could did do does doing down during
each few for from further had has have having he her here hers herself him
himself his how if in into is it its itself just me more most my myself no nor
not now of off on once only or other our ours ourselves out over own same she
should so some such than that the their theirs them themselves then there these
they this those through to too under until up very was we were what when where
which while who whom why will with would you your yours yourself yourselves
""".split())

# Letters NFKD leaves intact.
_FOLD_EXTRA = str.maketrans({
    "ß": "ss", "æ": "ae", "œ": "oe", "ø": "o", "đ": "d", "ð": "d",
    "ł": "l", "þ": "th", "ı": "i", "ħ": "h",
})
_SPLIT = re.compile(r"[^a-z0-9]+")
_stemmer = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)


@dataclass(frozen=True)
class AnalyzedText:
    tokens: list[str]


class _TextExtractor(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.parts: list[str] = []

    def handle_data(self, data):
        self.parts.append(data)

    def handle_starttag(self, tag, attrs):
        self.parts.append(" ")

    def handle_endtag(self, tag):
        self.parts.append(" ")


def strip_html(html: str) -> str:
    """Remove tags, keep their text content; each tag becomes a space."""
    parser = _TextExtractor()
    parser.feed(html)
    parser.close()
    return "".join(parser.parts)


def ascii_fold(text: str) -> str:
    text = text.translate(_FOLD_EXTRA)
    decomposed = unicodedata.normalize("NFKD", text)
    return "".join(ch for ch in decomposed if ord(ch) < 128)


@lru_cache(maxsize=65536)
def stem(token: str) -> str:
    prev = token
    while True:
        cur = _stemmer.stem(prev)
        if cur == prev:
            return cur
        prev = cur


def analyze_text(html: str) -> AnalyzedText:
    text = ascii_fold(strip_html(html).lower())
    out = []
    for tok in _SPLIT.split(text):
        if not tok or tok in STOPWORDS:
            continue
        s = stem(tok)
        if s and s not in STOPWORDS:
            out.append(s)
    return AnalyzedText(out)
