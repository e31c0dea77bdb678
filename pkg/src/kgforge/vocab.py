"""Namespace conventions, reserved vocabulary, and IRI helpers.

Per-wiki entities live under ``<base><wikiId>/{resource|class|property}/``.
Pipeline-owned vocabulary (provenance, wiki metadata) lives under
``<base>meta/``.
"""

from __future__ import annotations

from .model import EntityKind, Iri

DEFAULT_BASE = "http://kgforge.local/"

RDF_TYPE = Iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type")
RDFS_LABEL = Iri("http://www.w3.org/2000/01/rdf-schema#label")
RDFS_COMMENT = Iri("http://www.w3.org/2000/01/rdf-schema#comment")
XSD_STRING = Iri("http://www.w3.org/2001/XMLSchema#string")
XSD_INTEGER = Iri("http://www.w3.org/2001/XMLSchema#integer")
XSD_DOUBLE = Iri("http://www.w3.org/2001/XMLSchema#double")

_KIND_SEGMENT = {
    EntityKind.INSTANCE: "resource",
    EntityKind.CLASS: "class",
    EntityKind.PROPERTY: "property",
}
_SEGMENT_KIND = {v: k for k, v in _KIND_SEGMENT.items()}

# Characters N-Triples forbids unescaped inside <...>, plus '%' so that
# percent-encoding stays unambiguous.
_IRI_UNSAFE = set('<>"{}|^`\\%')


def meta_iri(name: str, base: str = DEFAULT_BASE) -> Iri:
    return Iri(f"{base}meta/{name}")


def derived_from_predicate(base: str = DEFAULT_BASE) -> Iri:
    return meta_iri("derivedFrom", base)


def used_in_predicate(base: str = DEFAULT_BASE) -> Iri:
    return meta_iri("usedIn", base)


def wiki_resource(wiki_id: str, base: str = DEFAULT_BASE) -> Iri:
    return meta_iri(f"wiki/{encode_fragment(wiki_id)}", base)


def encode_fragment(name: str) -> str:
    """Spaces become underscores; characters illegal in N-Triples IRIs are
    percent-encoded. Case is preserved."""
    out = []
    for ch in name.replace(" ", "_"):
        if ord(ch) <= 0x20 or ch in _IRI_UNSAFE:
            out.extend(f"%{b:02X}" for b in ch.encode("utf-8"))
        else:
            out.append(ch)
    return "".join(out)


def resource_iri(wiki_id: str, name: str, base: str = DEFAULT_BASE) -> Iri:
    return Iri(f"{base}{wiki_id}/resource/{encode_fragment(name)}")


def class_iri(wiki_id: str, name: str, base: str = DEFAULT_BASE) -> Iri:
    return Iri(f"{base}{wiki_id}/class/{encode_fragment(name)}")


def property_iri(wiki_id: str, name: str, base: str = DEFAULT_BASE) -> Iri:
    return Iri(f"{base}{wiki_id}/property/{encode_fragment(name)}")


def fragment(iri: Iri) -> str:
    """The substring after the last '/'."""
    return iri.value.rpartition("/")[2]


def entity_kind(iri: Iri, base: str = DEFAULT_BASE) -> EntityKind:
    """Classify an IRI by its namespace: ``<base><wiki>/resource/...`` is an
    instance, ``.../class/...`` a class, ``.../property/...`` a property, and
    everything else (external vocabulary included) is OTHER."""
    value = iri.value
    if not value.startswith(base):
        return EntityKind.OTHER
    rest = value[len(base):]
    parts = rest.split("/", 2)
    if len(parts) != 3 or not parts[0] or not parts[2]:
        return EntityKind.OTHER
    kind = _SEGMENT_KIND.get(parts[1])
    return kind if kind is not None else EntityKind.OTHER


def kind_segment(kind: EntityKind) -> str:
    return _KIND_SEGMENT[kind]
