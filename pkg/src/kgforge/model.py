"""Core data model: IRIs, literals, triples, graphs, and alignments.

Everything here is an immutable value object. Graphs build their lookup
indices once at construction time and are safe to share between workers.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union


@dataclass(frozen=True, order=True)
class Iri:
    """An absolute IRI."""

    value: str

    def __post_init__(self):
        if not self.value:
            raise ValueError("IRI must be non-empty")
        if "://" not in self.value:
            raise ValueError(f"not an absolute IRI: {self.value!r}")

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, order=True)
class Literal:
    """An RDF literal. `datatype` and `language` are mutually exclusive."""

    lexical: str
    datatype: Optional[Iri] = None
    language: Optional[str] = None

    def __post_init__(self):
        if self.datatype is not None and self.language is not None:
            raise ValueError("literal cannot carry both a datatype and a language tag")


Object = Union[Iri, Literal]


@dataclass(frozen=True)
class Triple:
    subject: Iri
    predicate: Iri
    object: Object

    def iris(self) -> Iterator[Iri]:
        yield self.subject
        yield self.predicate
        if isinstance(self.object, Iri):
            yield self.object


class EntityKind(enum.Enum):
    INSTANCE = "instance"
    CLASS = "class"
    PROPERTY = "property"
    OTHER = "other"


class KnowledgeGraph:
    """An identified, duplicate-free set of triples with subject/predicate indices.

    Immutable after construction; every pipeline stage produces new graphs.
    """

    __slots__ = ("id", "triples", "_by_subject", "_by_predicate")

    def __init__(self, kg_id: str, triples):
        self.id = kg_id
        self.triples = frozenset(triples)
        by_subject: dict[Iri, list[Triple]] = {}
        by_predicate: dict[Iri, list[Triple]] = {}
        for t in self.triples:
            by_subject.setdefault(t.subject, []).append(t)
            by_predicate.setdefault(t.predicate, []).append(t)
        self._by_subject = {k: tuple(v) for k, v in by_subject.items()}
        self._by_predicate = {k: tuple(v) for k, v in by_predicate.items()}

    def __len__(self) -> int:
        return len(self.triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(self.triples)

    def __eq__(self, other) -> bool:
        if not isinstance(other, KnowledgeGraph):
            return NotImplemented
        return self.id == other.id and self.triples == other.triples

    def __hash__(self) -> int:
        return hash((self.id, self.triples))

    def __repr__(self) -> str:
        return f"KnowledgeGraph({self.id!r}, {len(self.triples)} triples)"

    def by_subject(self, subject: Iri) -> tuple[Triple, ...]:
        return self._by_subject.get(subject, ())

    def by_predicate(self, predicate: Iri) -> tuple[Triple, ...]:
        return self._by_predicate.get(predicate, ())

    def subjects(self) -> Iterator[Iri]:
        return iter(self._by_subject)

    def iris(self) -> set[Iri]:
        """All IRIs occurring in subject, predicate, or object position."""
        out: set[Iri] = set()
        for t in self.triples:
            out.update(t.iris())
        return out

    def labels(self, iri: Iri) -> tuple[str, ...]:
        """rdfs:label lexical values attached to `iri`, sorted."""
        from .vocab import RDFS_LABEL

        found = [
            t.object.lexical
            for t in self.by_subject(iri)
            if t.predicate == RDFS_LABEL and isinstance(t.object, Literal)
        ]
        return tuple(sorted(found))


@dataclass(frozen=True, order=True)
class Correspondence:
    """A scored equivalence link between an entity of a source graph and one
    of a target graph."""

    source: Iri
    target: Iri
    relation: str = "="
    confidence: float = 1.0

    def __post_init__(self):
        if self.source == self.target:
            raise ValueError(f"self-correspondence: {self.source}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence out of [0,1]: {self.confidence}")

    def flipped(self) -> "Correspondence":
        return Correspondence(self.target, self.source, self.relation, self.confidence)


@dataclass(frozen=True)
class Alignment:
    """An ordered collection of correspondences."""

    correspondences: tuple[Correspondence, ...] = field(default_factory=tuple)

    def __init__(self, correspondences=()):
        object.__setattr__(self, "correspondences", tuple(correspondences))

    def __len__(self) -> int:
        return len(self.correspondences)

    def __iter__(self) -> Iterator[Correspondence]:
        return iter(self.correspondences)

    def __getitem__(self, i):
        return self.correspondences[i]

    def flipped(self) -> "Alignment":
        return Alignment(c.flipped() for c in self.correspondences)

    def is_one_to_one(self) -> bool:
        sources = [c.source for c in self.correspondences]
        targets = [c.target for c in self.correspondences]
        return len(set(sources)) == len(sources) and len(set(targets)) == len(targets)
