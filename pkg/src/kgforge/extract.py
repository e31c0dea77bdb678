"""Turn one parsed wiki dump into one knowledge graph.

Per non-redirect page: a resource IRI and a label triple; per infobox on
the page: a type triple to a class named after the template (the class is
marked as infobox-derived once) and one property triple per key=value
pair. Optionally the first paragraph before the first heading becomes a
comment literal. No class-hierarchy triples exist, mirroring the fact
that infobox templates have no hierarchy.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .infobox import (
    DEFAULT_SYNONYMS,
    _template_spans,
    extract_infoboxes,
    normalize_property_key,
    strip_markup,
    value_to_object,
)
from .model import KnowledgeGraph, Literal, Triple
from .vocab import (
    DEFAULT_BASE,
    RDF_TYPE,
    RDFS_COMMENT,
    RDFS_LABEL,
    class_iri,
    derived_from_predicate,
    property_iri,
    resource_iri,
)
from .wikidump import WikiDump

_INFOBOX_WORD_RE = re.compile(r"(?i)infobox")
_SEPARATOR_EDGE_RE = re.compile(r"^[\s_\-:]+|[\s_\-:]+$")
_HEADING_RE = re.compile(r"^=+[^=\n].*$", re.MULTILINE)


@dataclass(frozen=True)
class ExtractionConfig:
    base: str = DEFAULT_BASE
    synonyms: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_SYNONYMS))
    extract_abstracts: bool = True


def class_name_from_template(template_name: str) -> str:
    """"Infobox character" -> "Character": drop the infobox word, trim
    separators, capitalize the first letter. Falls back to the whole
    template name when nothing else remains."""
    remainder = _SEPARATOR_EDGE_RE.sub("", _INFOBOX_WORD_RE.sub("", template_name))
    if not remainder:
        remainder = template_name.strip()
    return remainder[:1].upper() + remainder[1:]


def first_paragraph(wikitext: str) -> str:
    """Plain text of the first non-empty paragraph before the first
    heading, after removing top-level templates."""
    spans, _ = _template_spans(wikitext)
    out = []
    cursor = 0
    for start, end in spans:
        out.append(wikitext[cursor:start])
        cursor = end
    out.append(wikitext[cursor:])
    text = "".join(out)
    heading = _HEADING_RE.search(text)
    if heading:
        text = text[: heading.start()]
    for paragraph in re.split(r"\n\s*\n", text):
        stripped = strip_markup(paragraph)
        if stripped:
            return stripped
    return ""


@dataclass(frozen=True)
class ExtractionResult:
    kg: KnowledgeGraph
    warnings: tuple[str, ...]


def extract_wiki(dump: WikiDump, config: Optional[ExtractionConfig] = None) -> ExtractionResult:
    if config is None:
        config = ExtractionConfig()
    base = config.base
    wiki = dump.wiki_id
    derived_from = derived_from_predicate(base)
    triples: set[Triple] = set()
    warnings: list[str] = []
    for page in dump.pages:
        if page.is_redirect:
            continue
        subject = resource_iri(wiki, page.title, base)
        triples.add(Triple(subject, RDFS_LABEL, Literal(page.title)))
        if config.extract_abstracts:
            abstract = first_paragraph(page.text)
            if abstract:
                triples.add(Triple(subject, RDFS_COMMENT, Literal(abstract)))
        infoboxes, page_warnings = extract_infoboxes(page.text)
        warnings.extend(f"{page.title}: {w}" for w in page_warnings)
        for box in infoboxes:
            cls = class_iri(wiki, class_name_from_template(box.template_name), base)
            triples.add(Triple(subject, RDF_TYPE, cls))
            triples.add(Triple(cls, derived_from, Literal("infobox")))
            for key, raw_value in box.pairs:
                name = normalize_property_key(key, config.synonyms)
                if not name:
                    warnings.append(f"{page.title}: unusable infobox key {key!r} skipped")
                    continue
                obj = value_to_object(raw_value, wiki, base)
                if obj is None:
                    continue
                triples.add(Triple(subject, property_iri(wiki, name, base), obj))
    return ExtractionResult(KnowledgeGraph(wiki, triples), tuple(warnings))
