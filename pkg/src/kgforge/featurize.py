"""Bag-of-words features per graph: tokenization, tf-idf, cosine distance.

Each knowledge graph becomes one document built from its string-valued
literals. Tokens are lowercased, stopword-filtered, and Porter-stemmed;
splitting also breaks underscores and lower-to-upper camel-case boundaries
to cope with wiki naming conventions.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .model import KnowledgeGraph, Literal
from .porter import stem
from .vocab import XSD_STRING

TokenStream = Counter

# Common English function words. Overridable per pipeline run via a stopword
# file (one word per line).
DEFAULT_STOPWORDS = frozenset("""
a about above after again against all am an and any are as at be because been
before being below between both but by can cannot could did do does doing down
during each few for from further had has have having he her here hers herself
him himself his how i if in into is it its itself just me more most my myself
no nor not now of off on once only or other our ours ourselves out over own
same she should so some such than that the their theirs them themselves then
there these they this those through to too under until up very was we were
what when where which while who whom why will with would you your yours
yourself yourselves
""".split())

_CAMEL_RE = re.compile(r"(?<=[a-z])(?=[A-Z])")
_SPLIT_RE = re.compile(r"[\W_]+", re.UNICODE)


def tokenize(text: str, stopwords: frozenset[str] = DEFAULT_STOPWORDS) -> TokenStream:
    """Split, lowercase, drop stopwords, stem. Returns a token multiset."""
    pieces = _SPLIT_RE.split(_CAMEL_RE.sub(" ", text))
    stream: TokenStream = Counter()
    for piece in pieces:
        if not piece:
            continue
        lowered = piece.lower()
        if lowered in stopwords:
            continue
        stream[stem(lowered)] += 1
    return stream


def load_stopwords(path: Union[str, Path]) -> frozenset[str]:
    words = Path(path).read_text(encoding="utf-8").split()
    return frozenset(w.lower() for w in words)


def kg_document(kg: KnowledgeGraph, stopwords: frozenset[str] = DEFAULT_STOPWORDS) -> TokenStream:
    """Token multiset over every string-valued literal of the graph.

    Literals with a non-string datatype and IRI objects contribute nothing.
    """
    stream: TokenStream = Counter()
    for triple in kg.triples:
        obj = triple.object
        if isinstance(obj, Literal) and (obj.datatype is None or obj.datatype == XSD_STRING):
            stream.update(tokenize(obj.lexical, stopwords))
    return stream


class SparseVector:
    """Non-negative sparse weights keyed by dense term id, with a cached
    L2 norm. Treat as immutable."""

    __slots__ = ("entries", "norm")

    def __init__(self, entries: dict[int, float]):
        self.entries = {t: w for t, w in entries.items() if w != 0.0}
        self.norm = math.sqrt(sum(w * w for w in self.entries.values()))

    def __len__(self) -> int:
        return len(self.entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseVector):
            return NotImplemented
        return self.entries == other.entries

    def __repr__(self) -> str:
        return f"SparseVector({len(self.entries)} terms, norm={self.norm:.4g})"

    def dot(self, other: "SparseVector") -> float:
        if len(other.entries) < len(self.entries):
            self, other = other, self
        # fixed ascending-id order keeps the summation reproducible
        return sum(
            w * other.entries[t]
            for t, w in sorted(self.entries.items())
            if t in other.entries
        )


def build_vocabulary(docs: Sequence[TokenStream]) -> dict[str, int]:
    """Dense term ids in first-seen order across the corpus."""
    vocabulary: dict[str, int] = {}
    for doc in docs:
        for token in doc:
            if token not in vocabulary:
                vocabulary[token] = len(vocabulary)
    return vocabulary


def tfidf_vectors(
    docs: Sequence[TokenStream], vocabulary: Optional[dict[str, int]] = None
) -> list[SparseVector]:
    """weight(t, d) = tf(t, d) * ln(N / df(t)), raw counts, no smoothing.

    Terms present in every document get weight ln(1) = 0 and vanish, which
    is exactly the intended damping of corpus-wide terms.
    """
    if not docs:
        raise ValueError("tfidf_vectors requires a non-empty corpus")
    if vocabulary is None:
        vocabulary = build_vocabulary(docs)
    n_docs = len(docs)
    df: Counter = Counter()
    for doc in docs:
        df.update(set(doc))
    idf = {t: math.log(n_docs / df[t]) for t in df if df[t] < n_docs}
    vectors = []
    for doc in docs:
        entries = {
            vocabulary[t]: count * idf[t] for t, count in doc.items() if t in idf
        }
        vectors.append(SparseVector(entries))
    return vectors


def cosine_distance(u: SparseVector, v: SparseVector) -> float:
    """1 - cos(u, v), in [0, 1]; by convention 1 when either vector is zero."""
    if u.norm == 0.0 or v.norm == 0.0:
        return 1.0
    if u.entries == v.entries:
        return 0.0
    d = 1.0 - u.dot(v) / (u.norm * v.norm)
    return min(1.0, max(0.0, d))


# --- vector cache files -----------------------------------------------------
#
# terms.dict:    "<termId> <token>" per line
# <wikiId>.vec:  "<termId> <weight>" per line (repr floats, lossless)

def save_dictionary(vocabulary: dict[str, int], path: Union[str, Path]) -> None:
    rows = sorted(vocabulary.items(), key=lambda kv: kv[1])
    Path(path).write_text(
        "".join(f"{tid} {token}\n" for token, tid in rows), encoding="utf-8"
    )


def load_dictionary(path: Union[str, Path]) -> dict[str, int]:
    vocabulary: dict[str, int] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        tid, _, token = line.partition(" ")
        vocabulary[token] = int(tid)
    return vocabulary


def save_vector(vector: SparseVector, path: Union[str, Path]) -> None:
    rows = sorted(vector.entries.items())
    Path(path).write_text(
        "".join(f"{tid} {weight!r}\n" for tid, weight in rows), encoding="utf-8"
    )


def load_vector(path: Union[str, Path]) -> SparseVector:
    entries: dict[int, float] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        tid, _, weight = line.partition(" ")
        entries[int(tid)] = float(weight)
    return SparseVector(entries)
