"""Line-oriented N-Triples reading and writing.

Covers the subset this pipeline emits: IRIs and plain/typed/language-tagged
literals. No blank nodes. Serialization is deterministic (sorted), so equal
graphs always produce byte-identical files.
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import Iterable, Union

from .model import Iri, KnowledgeGraph, Literal, Triple


class NTriplesParseError(ValueError):
    """Raised on a malformed statement; carries the 1-based line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


_IRI = r"<([^<>\"{}|^`\\\x00-\x20]*)>"
_STRING = r'"((?:[^"\\\n\r]|\\.)*)"'
_LANG = r"@([A-Za-z]+(?:-[A-Za-z0-9]+)*)"

_TRIPLE_RE = re.compile(
    rf"^\s*{_IRI}\s+{_IRI}\s+"
    rf"(?:{_IRI}|{_STRING}(?:\^\^{_IRI}|{_LANG})?)"
    rf"\s*\.\s*(?:#.*)?$"
)

_ESCAPE_RE = re.compile(r"\\(?:u([0-9A-Fa-f]{4})|U([0-9A-Fa-f]{8})|(.))")
_SHORT_ESCAPES = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f",
                  '"': '"', "'": "'", "\\": "\\"}


def _unescape(raw: str, line_number: int) -> str:
    def repl(m: re.Match) -> str:
        if m.group(1):
            return chr(int(m.group(1), 16))
        if m.group(2):
            return chr(int(m.group(2), 16))
        ch = m.group(3)
        if ch not in _SHORT_ESCAPES:
            raise NTriplesParseError(line_number, f"bad escape \\{ch}")
        return _SHORT_ESCAPES[ch]

    return _ESCAPE_RE.sub(repl, raw)


def parse_ntriples(source: Union[str, Iterable[str]], kg_id: str = "") -> KnowledgeGraph:
    """Parse N-Triples text (a string or an iterable of lines) into a graph.

    Duplicate statements collapse. Blank lines and comment lines are skipped.
    Raises NTriplesParseError on the first malformed statement.
    """
    lines = source.splitlines() if isinstance(source, str) else source
    triples = set()
    for number, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        m = _TRIPLE_RE.match(line)
        if m is None:
            raise NTriplesParseError(number, f"malformed statement: {stripped[:80]}")
        subj, pred, obj_iri, lex, dt, lang = m.groups()
        subject = Iri(_unescape(subj, number))
        predicate = Iri(_unescape(pred, number))
        if obj_iri is not None:
            obj: Union[Iri, Literal] = Iri(_unescape(obj_iri, number))
        else:
            obj = Literal(
                _unescape(lex, number),
                datatype=Iri(_unescape(dt, number)) if dt is not None else None,
                language=lang,
            )
        triples.add(Triple(subject, predicate, obj))
    return KnowledgeGraph(kg_id, triples)


def load_ntriples(path: Union[str, Path], kg_id: str | None = None) -> KnowledgeGraph:
    path = Path(path)
    if kg_id is None:
        kg_id = path.stem
    with open(path, encoding="utf-8") as handle:
        return parse_ntriples(handle, kg_id)


def _escape_string(text: str) -> str:
    out = []
    for ch in text:
        if ch == "\\":
            out.append("\\\\")
        elif ch == '"':
            out.append('\\"')
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\r":
            out.append("\\r")
        elif ch == "\t":
            out.append("\\t")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


def _object_term(obj) -> str:
    if isinstance(obj, Iri):
        return f"<{obj.value}>"
    term = f'"{_escape_string(obj.lexical)}"'
    if obj.datatype is not None:
        term += f"^^<{obj.datatype.value}>"
    elif obj.language is not None:
        term += f"@{obj.language}"
    return term


def statement(triple: Triple) -> str:
    return f"<{triple.subject.value}> <{triple.predicate.value}> {_object_term(triple.object)} ."


def serialize_ntriples(kg: KnowledgeGraph) -> str:
    """Deterministic serialization: one statement per line, sorted by
    (subject, predicate, object term). Round-trips through parse_ntriples."""
    lines = sorted(
        (t.subject.value, t.predicate.value, _object_term(t.object)) for t in kg.triples
    )
    return "".join(f"<{s}> <{p}> {o} .\n" for s, p, o in lines)


def save_ntriples(kg: KnowledgeGraph, path: Union[str, Path]) -> None:
    Path(path).write_text(serialize_ntriples(kg), encoding="utf-8")
