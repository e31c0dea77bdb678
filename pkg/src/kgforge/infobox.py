"""Wikitext template scanning, infobox capture, and value conversion.

The scanner tracks {{ }} nesting only as far as needed to find top-level
template invocations and to split their parameters; full MediaWiki
transclusion semantics are out of scope. Unbalanced braces are recovered
by closing the template at end of text and flagging a warning.
"""

from __future__ import annotations

import html
import re
from dataclasses import dataclass
from typing import Optional, Union

from .model import Iri, Literal
from .vocab import DEFAULT_BASE, resource_iri


@dataclass(frozen=True)
class InfoboxInstance:
    template_name: str
    pairs: tuple[tuple[str, str], ...]


def _template_spans(text: str) -> tuple[list[tuple[int, int]], list[str]]:
    """(start, end) spans of top-level {{...}} plus warnings for unbalanced ones."""
    spans = []
    warnings = []
    i = 0
    n = len(text)
    while i < n - 1:
        if text[i] == "{" and text[i + 1] == "{":
            depth = 1
            j = i + 2
            while j < n - 1 and depth:
                pair = text[j] + text[j + 1]
                if pair == "{{":
                    depth += 1
                    j += 2
                elif pair == "}}":
                    depth -= 1
                    j += 2
                else:
                    j += 1
            if depth:
                warnings.append(f"unbalanced template braces at offset {i}")
                spans.append((i, n))
                i = n
            else:
                spans.append((i, j))
                i = j
        else:
            i += 1
    return spans, warnings


def _split_top_level(content: str, separator: str) -> list[str]:
    """Split on `separator` outside {{ }} and [[ ]] nesting."""
    parts = []
    depth = 0
    current = []
    i = 0
    n = len(content)
    while i < n:
        two = content[i:i + 2]
        if two in ("{{", "[["):
            depth += 1
            current.append(two)
            i += 2
        elif two in ("}}", "]]"):
            depth = max(depth - 1, 0)
            current.append(two)
            i += 2
        elif depth == 0 and content[i] == separator:
            parts.append("".join(current))
            current = []
            i += 1
        else:
            current.append(content[i])
            i += 1
    parts.append("".join(current))
    return parts


def _template_body(span_text: str) -> str:
    body = span_text[2:]
    if body.endswith("}}"):
        body = body[:-2]
    return body


def flatten_templates(text: str) -> str:
    """Replace every template invocation with the plain text of its
    parameter values (names dropped), recursively."""
    spans, _ = _template_spans(text)
    if not spans:
        return text
    out = []
    cursor = 0
    for start, end in spans:
        out.append(text[cursor:start])
        parts = _split_top_level(_template_body(text[start:end]), "|")
        values = []
        for part in parts[1:]:
            key, sep, value = _partition_parameter(part)
            values.append(flatten_templates(value if sep else part).strip())
        out.append(" ".join(v for v in values if v))
        cursor = end
    out.append(text[cursor:])
    return "".join(out)


def _partition_parameter(part: str) -> tuple[str, str, str]:
    """Split a template parameter at its first top-level '='."""
    pieces = _split_top_level(part, "=")
    if len(pieces) == 1:
        return "", "", part
    return pieces[0], "=", part[len(pieces[0]) + 1:]


def extract_infoboxes(wikitext: str) -> tuple[list[InfoboxInstance], list[str]]:
    """Every top-level template whose name contains "infobox"
    (case-insensitively), with its named parameters in source order.
    Positional parameters are dropped; nested templates inside values are
    flattened to their text. Returns (instances, warnings)."""
    spans, warnings = _template_spans(wikitext)
    instances = []
    for start, end in spans:
        parts = _split_top_level(_template_body(wikitext[start:end]), "|")
        name = parts[0].strip()
        if "infobox" not in name.lower():
            continue
        pairs = []
        for part in parts[1:]:
            key, sep, value = _partition_parameter(part)
            if not sep:
                continue
            key = key.strip()
            if not key:
                continue
            pairs.append((key, flatten_templates(value).strip()))
        instances.append(InfoboxInstance(name, tuple(pairs)))
    return instances, warnings


# --- markup stripping and value conversion ---------------------------------------

_REF_RE = re.compile(r"<ref[^>/]*>.*?</ref>|<ref[^>]*/>", re.DOTALL | re.IGNORECASE)
_LINK_RE = re.compile(r"\[\[([^\[\]|]+)(?:\|([^\[\]]*))?\]\]")
_EXTERNAL_LINK_RE = re.compile(r"\[(?:https?|ftp)://\S*(?:\s+([^\]]*))?\]")
_TAG_RE = re.compile(r"</?[A-Za-z][^>]*>")
_WHOLE_LINK_RE = re.compile(r"^\[\[([^\[\]|]+)(?:\|([^\[\]]*))?\]\]$")


def strip_markup(text: str) -> str:
    """Reduce wikitext to plain text: links to their labels, quotes and
    tags dropped, entities unescaped, whitespace collapsed."""
    text = _REF_RE.sub(" ", text)
    text = flatten_templates(text)
    text = _LINK_RE.sub(lambda m: m.group(2) if m.group(2) is not None else m.group(1), text)
    text = _EXTERNAL_LINK_RE.sub(lambda m: m.group(1) or " ", text)
    text = text.replace("'''", "").replace("''", "")
    text = _TAG_RE.sub(" ", text)
    text = html.unescape(text)
    return re.sub(r"\s+", " ", text).strip()


def value_to_object(
    raw_value: str, wiki_id: str, base: str = DEFAULT_BASE
) -> Optional[Union[Iri, Literal]]:
    """A value that is exactly one wiki link becomes a resource IRI (label
    part ignored); anything else becomes a plain literal of the stripped
    text. None means: skip this pair."""
    value = raw_value.strip()
    match = _WHOLE_LINK_RE.match(value)
    if match:
        target = match.group(1).strip()
        if target:
            return resource_iri(wiki_id, target, base)
        return None
    text = strip_markup(value)
    return Literal(text) if text else None


# --- property key homogenization ---------------------------------------------------

# the shipped map covers only the birth-date family; extend via config file
DEFAULT_SYNONYMS = {
    "birthdate": "birthDate",
    "dateofbirth": "birthDate",
}

_KEY_CAMEL_RE = re.compile(r"(?<=[a-z])(?=[A-Z])")
_KEY_SPLIT_RE = re.compile(r"[\W_]+")


def _lookup_key(key: str) -> str:
    return re.sub(r"[\s_]+", "", key).lower()


def normalize_property_key(key: str, synonyms: Optional[dict[str, str]] = None) -> str:
    """Map through the synonym table (whitespace/underscore-insensitive,
    lowercased); otherwise lowerCamelCase the key's tokens. Empty result
    means the key is unusable."""
    if synonyms is None:
        synonyms = DEFAULT_SYNONYMS
    canonical = synonyms.get(_lookup_key(key))
    if canonical is not None:
        return canonical
    tokens = [t for t in _KEY_SPLIT_RE.split(_KEY_CAMEL_RE.sub(" ", key)) if t]
    if not tokens:
        return ""
    head = tokens[0].lower()
    tail = (t[:1].upper() + t[1:].lower() for t in tokens[1:])
    return head + "".join(tail)


def load_synonyms(path) -> dict[str, str]:
    """Synonym file: one `variant=canonical` per line; variants are
    normalized like lookup keys."""
    from pathlib import Path as _Path

    table = dict(DEFAULT_SYNONYMS)
    for number, line in enumerate(_Path(path).read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        variant, sep, canonical = stripped.partition("=")
        if not sep or not variant.strip() or not canonical.strip():
            raise ValueError(f"{path}:{number}: expected variant=canonical, got {stripped!r}")
        table[_lookup_key(variant)] = canonical.strip()
    return table
