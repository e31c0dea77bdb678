"""Transitive closure over task alignments, canonical IRIs, and graph fusion.

Correspondences are treated as symmetric identity statements; union-find
with path compression and union by rank turns them into identity sets.
Each set gets one canonical IRI named after its most common fragment, with
numeric postfixes resolving collisions, and every source triple is
rewritten through the resulting map. Conflicting values are all retained.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .model import Alignment, EntityKind, Iri, KnowledgeGraph, Literal, Triple
from .vocab import (
    DEFAULT_BASE,
    RDFS_LABEL,
    XSD_DOUBLE,
    XSD_INTEGER,
    entity_kind,
    fragment,
    kind_segment,
    meta_iri,
    used_in_predicate,
    wiki_resource,
)
from .wikidump import WikiMetadata

log = logging.getLogger(__name__)


class UnionFind:
    """Disjoint sets over IRIs with path compression and union by rank."""

    def __init__(self):
        self.parent: dict[Iri, Iri] = {}
        self.rank: dict[Iri, int] = {}

    def find(self, x: Iri) -> Iri:
        if x not in self.parent:
            self.parent[x] = x
            self.rank[x] = 0
            return x
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: Iri, b: Iri) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1

    def components(self) -> list[frozenset[Iri]]:
        grouped: dict[Iri, set[Iri]] = {}
        for member in self.parent:
            grouped.setdefault(self.find(member), set()).add(member)
        return [frozenset(members) for members in grouped.values()]


@dataclass(frozen=True)
class IdentitySet:
    members: frozenset[Iri]
    kind: EntityKind
    canonical: Optional[Iri] = None

    def __post_init__(self):
        if len(self.members) < 2:
            raise ValueError("an identity set needs at least 2 members")

    @property
    def size(self) -> int:
        return len(self.members)


def _majority_kind(members: Iterable[Iri], base: str) -> tuple[EntityKind, bool]:
    counts = Counter(entity_kind(m, base) for m in members)
    # ties resolve in declaration order: instance, class, property, other
    kind = max(counts, key=lambda k: (counts[k], -list(EntityKind).index(k)))
    return kind, len(counts) > 1


def transitive_closure(
    alignments: Sequence[Alignment], base: str = DEFAULT_BASE
) -> list[IdentitySet]:
    """Connected components of the undirected correspondence graph;
    singletons are dropped. Sorted by (size desc, smallest member)."""
    uf = UnionFind()
    for alignment in alignments:
        for corr in alignment:
            uf.union(corr.source, corr.target)
    sets = []
    for members in uf.components():
        if len(members) < 2:
            continue
        kind, mixed = _majority_kind(members, base)
        if mixed:
            log.warning(
                "identity set mixes entity kinds (keeping majority %s): %s",
                kind.value,
                ", ".join(sorted(m.value for m in members)[:5]),
            )
        sets.append(IdentitySet(members, kind))
    sets.sort(key=lambda s: (-s.size, min(m.value for m in s.members)))
    return sets


class _FragmentPool:
    """Hands out free fragments per namespace segment, adding _1, _2, ...
    postfixes on collision."""

    def __init__(self):
        self.taken: dict[str, set[str]] = {}

    def claim(self, segment: str, wanted: str) -> str:
        pool = self.taken.setdefault(segment, set())
        candidate = wanted
        postfix = 0
        while candidate in pool:
            postfix += 1
            candidate = f"{wanted}_{postfix}"
        pool.add(candidate)
        return candidate


def _canonical_segment(kind: EntityKind) -> str:
    if kind is EntityKind.OTHER:
        return kind_segment(EntityKind.INSTANCE)
    return kind_segment(kind)


def canonical_uris(
    sets: Sequence[IdentitySet],
    namespace: str,
    unmatched: Iterable[Iri] = (),
    base: str = DEFAULT_BASE,
) -> dict[Iri, Iri]:
    """Map every member IRI to its set's canonical IRI, processing sets in
    descending size; unmatched entity IRIs are re-namespaced with the same
    collision rule, and non-entity IRIs (external vocabulary) map to
    themselves."""
    pool = _FragmentPool()
    mapping: dict[Iri, Iri] = {}
    for identity_set in sorted(
        sets, key=lambda s: (-s.size, min(m.value for m in s.members))
    ):
        fragments = Counter(fragment(m) for m in identity_set.members)
        wanted = min(fragments, key=lambda f: (-fragments[f], f))
        segment = _canonical_segment(identity_set.kind)
        chosen = pool.claim(segment, wanted)
        canonical = Iri(f"{namespace}{segment}/{chosen}")
        for member in identity_set.members:
            mapping[member] = canonical
    for iri in sorted(set(unmatched) - mapping.keys()):
        kind = entity_kind(iri, base)
        if kind is EntityKind.OTHER:
            mapping[iri] = iri
            continue
        segment = kind_segment(kind)
        chosen = pool.claim(segment, fragment(iri))
        mapping[iri] = Iri(f"{namespace}{segment}/{chosen}")
    return mapping


def fuse_kgs(
    kgs: Sequence[KnowledgeGraph],
    canon: dict[Iri, Iri],
    metadata: Sequence[WikiMetadata] = (),
    base: str = DEFAULT_BASE,
    fused_id: str = "fused",
) -> KnowledgeGraph:
    """Union of all graphs rewritten through `canon`, plus per-wiki
    provenance resources, usedIn links for every instance, and wiki
    metadata as typed literals."""
    meta_by_id = {m.wiki_id: m for m in metadata}
    used_in = used_in_predicate(base)
    triples: set[Triple] = set()

    def canonical(iri: Iri) -> Iri:
        try:
            return canon[iri]
        except KeyError:
            raise ValueError(f"canonical map does not cover {iri}") from None

    for kg in kgs:
        wiki = wiki_resource(kg.id, base)
        triples.add(Triple(wiki, RDFS_LABEL, Literal(kg.id)))
        meta = meta_by_id.get(kg.id)
        if meta is None:
            log.warning("no metadata for wiki %s; provenance resource carries only the id", kg.id)
        else:
            for name, value in (
                ("numPages", meta.pages),
                ("numUsers", meta.users),
                ("numActiveUsers", meta.active_users),
            ):
                if value is not None:
                    triples.add(
                        Triple(wiki, meta_iri(name, base), Literal(str(value), datatype=XSD_INTEGER))
                    )
            if meta.wam_score is not None:
                triples.add(
                    Triple(
                        wiki,
                        meta_iri("wamScore", base),
                        Literal(repr(meta.wam_score), datatype=XSD_DOUBLE),
                    )
                )
        for t in kg.triples:
            obj = canonical(t.object) if isinstance(t.object, Iri) else t.object
            triples.add(Triple(canonical(t.subject), canonical(t.predicate), obj))
        for iri in kg.iris():
            if entity_kind(iri, base) is EntityKind.INSTANCE:
                triples.add(Triple(canonical(iri), used_in, wiki))
    return KnowledgeGraph(fused_id, triples)


# --- closure dump: canonicalIri<TAB>memberIri ---------------------------------

def save_closure(
    sets: Sequence[IdentitySet], canon: dict[Iri, Iri], path: Union[str, Path]
) -> None:
    rows = sorted(
        (canon[member].value, member.value)
        for identity_set in sets
        for member in identity_set.members
    )
    Path(path).write_text(
        "".join(f"{canonical}\t{member}\n" for canonical, member in rows),
        encoding="utf-8",
    )


def load_closure(path: Union[str, Path], base: str = DEFAULT_BASE) -> list[IdentitySet]:
    """Rebuild identity sets (with canonicals) from a closure dump."""
    grouped: dict[Iri, set[Iri]] = {}
    for number, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            canonical, member = line.split("\t")
        except ValueError:
            raise ValueError(f"{path}:{number}: expected 2 tab-separated fields") from None
        grouped.setdefault(Iri(canonical), set()).add(Iri(member))
    sets = []
    for canonical, members in grouped.items():
        kind, _ = _majority_kind(members, base)
        sets.append(IdentitySet(frozenset(members), kind, canonical))
    sets.sort(key=lambda s: (-s.size, min(m.value for m in s.members)))
    return sets
