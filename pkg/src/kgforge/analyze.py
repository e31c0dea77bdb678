"""Reports over the alignment and the fused graph: identity-set statistics,
label agreement, top matched entities, precision/recall evaluation, graph
profiling, and the class/wiki distribution document."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .fuse import IdentitySet
from .match import normalize_label
from .model import Alignment, EntityKind, Iri, KnowledgeGraph, Literal
from .vocab import (
    DEFAULT_BASE,
    RDF_TYPE,
    RDFS_COMMENT,
    RDFS_LABEL,
    entity_kind,
    fragment,
)

DEFAULT_SERVICE_PAGES = frozenset({"main page", "discussion", "community portal"})

_KIND_ORDER = (EntityKind.INSTANCE, EntityKind.CLASS, EntityKind.PROPERTY, EntityKind.OTHER)


# --- identity set statistics ---------------------------------------------------

@dataclass(frozen=True)
class KindStats:
    set_count: int
    min_size: int
    max_size: int
    total_size: int
    mean_size: float
    std_dev_size: float  # population


def closure_stats(sets: Sequence[IdentitySet]) -> dict[EntityKind, KindStats]:
    grouped: dict[EntityKind, list[int]] = {}
    for identity_set in sets:
        grouped.setdefault(identity_set.kind, []).append(identity_set.size)
    stats = {}
    for kind, sizes in grouped.items():
        count = len(sizes)
        total = sum(sizes)
        mean = total / count
        variance = sum((s - mean) ** 2 for s in sizes) / count
        stats[kind] = KindStats(count, min(sizes), max(sizes), total, mean, math.sqrt(variance))
    return stats


# --- label agreement over an alignment ------------------------------------------

def _label_map(kgs: Iterable[KnowledgeGraph]) -> dict[Iri, set[str]]:
    labels: dict[Iri, set[str]] = {}
    for kg in kgs:
        for triple in kg.by_predicate(RDFS_LABEL):
            if isinstance(triple.object, Literal):
                labels.setdefault(triple.subject, set()).add(
                    normalize_label(triple.object.lexical)
                )
    return labels


def _labels_of(iri: Iri, label_map: dict[Iri, set[str]]) -> set[str]:
    found = label_map.get(iri)
    return found if found else {normalize_label(fragment(iri))}


def same_label_fraction(
    alignments: Sequence[Alignment], kgs: Iterable[KnowledgeGraph]
) -> float:
    """Fraction of correspondences whose entities share no normalized label."""
    label_map = _label_map(kgs)
    total = 0
    disjoint = 0
    for alignment in alignments:
        for corr in alignment:
            total += 1
            if _labels_of(corr.source, label_map).isdisjoint(
                _labels_of(corr.target, label_map)
            ):
                disjoint += 1
    return disjoint / total if total else 0.0


# --- most frequently matched entities --------------------------------------------

def top_matched(
    sets: Sequence[IdentitySet],
    k: int,
    kind: EntityKind,
    labels: Optional[dict[Iri, tuple[str, ...]]] = None,
    blocklist: frozenset[str] = DEFAULT_SERVICE_PAGES,
) -> list[tuple[str, int]]:
    """Largest identity sets of one kind as (most common label, size) rows;
    members labelled like wiki service pages are dropped first."""
    if k < 1:
        raise ValueError("k must be >= 1")
    rows = []
    for identity_set in sets:
        if identity_set.kind is not kind:
            continue
        votes: Counter = Counter()
        size = 0
        for member in identity_set.members:
            member_labels = (labels or {}).get(member) or (fragment(member).replace("_", " "),)
            if any(normalize_label(l) in blocklist for l in member_labels):
                continue
            size += 1
            votes.update(member_labels)
        if size == 0:
            continue
        display = min(votes, key=lambda l: (-votes[l], l))
        rows.append((display, size))
    rows.sort(key=lambda row: (-row[1], row[0]))
    return rows[:k]


# --- alignment evaluation ----------------------------------------------------------

@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float


def _pairs_by_kind(alignment: Alignment, base: str) -> dict[EntityKind, set[frozenset[str]]]:
    grouped: dict[EntityKind, set[frozenset[str]]] = {}
    for corr in alignment:
        kind = entity_kind(corr.source, base)
        if kind is EntityKind.OTHER:
            kind = entity_kind(corr.target, base)
        grouped.setdefault(kind, set()).add(
            frozenset((corr.source.value, corr.target.value))
        )
    return grouped


def evaluate_alignment(
    system: Alignment, reference: Alignment, base: str = DEFAULT_BASE
) -> dict[EntityKind, PRF]:
    """Per-kind precision/recall/F1; correspondence identity is the
    unordered IRI pair, confidence ignored."""
    system_pairs = _pairs_by_kind(system, base)
    reference_pairs = _pairs_by_kind(reference, base)
    result = {}
    for kind in set(system_pairs) | set(reference_pairs):
        sys_k = system_pairs.get(kind, set())
        ref_k = reference_pairs.get(kind, set())
        hits = len(sys_k & ref_k)
        precision = hits / len(sys_k) if sys_k else 0.0
        recall = hits / len(ref_k) if ref_k else 0.0
        f1 = (
            2.0 * precision * recall / (precision + recall)
            if precision > 0.0 and recall > 0.0
            else 0.0
        )
        result[kind] = PRF(precision, recall, f1)
    return result


# --- graph profile -------------------------------------------------------------------

@dataclass(frozen=True)
class KgProfile:
    instances: int
    classes: int
    infobox_classes: int
    properties: int
    assertions: int


def _is_annotation_predicate(predicate: Iri, base: str) -> bool:
    return (
        predicate == RDFS_LABEL
        or predicate == RDFS_COMMENT
        or predicate.value.startswith(f"{base}meta/")
    )


def kg_profile(kg: KnowledgeGraph, base: str = DEFAULT_BASE) -> KgProfile:
    kinds: Counter = Counter()
    for iri in kg.iris():
        kinds[entity_kind(iri, base)] += 1
    derived_from = Iri(f"{base}meta/derivedFrom")
    infobox_classes = {
        t.subject
        for t in kg.by_predicate(derived_from)
        if entity_kind(t.subject, base) is EntityKind.CLASS
    }
    assertions = sum(
        1 for t in kg.triples if not _is_annotation_predicate(t.predicate, base)
    )
    return KgProfile(
        instances=kinds[EntityKind.INSTANCE],
        classes=kinds[EntityKind.CLASS],
        infobox_classes=len(infobox_classes),
        properties=kinds[EntityKind.PROPERTY],
        assertions=assertions,
    )


# --- class distribution (sunburst-style nested document) ------------------------------

def class_distribution(
    kg: KnowledgeGraph, min_share: float = 0.0, base: str = DEFAULT_BASE
) -> dict:
    """Instances per class with a per-source-wiki breakdown via usedIn.
    Classes (and wikis within a class) whose share falls below min_share
    are folded into an "other" bucket."""
    if not 0.0 <= min_share < 1.0:
        raise ValueError(f"min_share must be within [0,1), got {min_share}")
    instances_of: dict[Iri, set[Iri]] = {}
    for t in kg.by_predicate(RDF_TYPE):
        if not isinstance(t.object, Iri):
            continue
        if (
            entity_kind(t.subject, base) is EntityKind.INSTANCE
            and entity_kind(t.object, base) is EntityKind.CLASS
        ):
            instances_of.setdefault(t.object, set()).add(t.subject)
    total = sum(len(v) for v in instances_of.values())
    if total == 0:
        return {"name": "classes", "value": 0, "children": []}
    used_in = Iri(f"{base}meta/usedIn")
    wikis_of: dict[Iri, set[str]] = {}
    for t in kg.by_predicate(used_in):
        if isinstance(t.object, Iri):
            wikis_of.setdefault(t.subject, set()).add(fragment(t.object))

    children = []
    folded_value = 0
    ordered = sorted(
        instances_of.items(), key=lambda kv: (-len(kv[1]), fragment(kv[0]), kv[0].value)
    )
    for cls, members in ordered:
        value = len(members)
        share = value / total
        if share < min_share:
            folded_value += value
            continue
        wiki_counts: Counter = Counter()
        for instance in members:
            wiki_counts.update(wikis_of.get(instance, ()))
        wiki_total = sum(wiki_counts.values())
        wiki_children = []
        wiki_folded = 0
        for wiki, count in sorted(wiki_counts.items(), key=lambda kv: (-kv[1], kv[0])):
            wiki_share = count / wiki_total if wiki_total else 0.0
            if wiki_share < min_share:
                wiki_folded += count
                continue
            wiki_children.append({"name": wiki, "value": count, "share": wiki_share})
        if wiki_folded:
            wiki_children.append(
                {"name": "other", "value": wiki_folded, "share": wiki_folded / wiki_total}
            )
        children.append(
            {
                "name": fragment(cls),
                "iri": cls.value,
                "value": value,
                "share": share,
                "children": wiki_children,
            }
        )
    if folded_value:
        children.append(
            {
                "name": "other",
                "value": folded_value,
                "share": folded_value / total,
                "children": [],
            }
        )
    return {"name": "classes", "value": total, "children": children}


# --- report rendering ---------------------------------------------------------------

def render_closure_stats(stats: dict[EntityKind, KindStats]) -> str:
    lines = ["kind\tsets\tmin\tmax\tmean\tstddev\n"]
    for kind in _KIND_ORDER:
        if kind in stats:
            s = stats[kind]
            lines.append(
                f"{kind.value}\t{s.set_count}\t{s.min_size}\t{s.max_size}"
                f"\t{s.mean_size!r}\t{s.std_dev_size!r}\n"
            )
        elif kind is not EntityKind.OTHER:
            lines.append(f"# no identity sets of kind {kind.value}\n")
    return "".join(lines)


def render_top_matched(rows: Sequence[tuple[str, int]]) -> str:
    return "label\tsize\n" + "".join(f"{label}\t{size}\n" for label, size in rows)


def render_eval(result: dict[EntityKind, PRF]) -> str:
    lines = ["kind\tprecision\trecall\tf1\n"]
    for kind in _KIND_ORDER:
        if kind in result:
            r = result[kind]
            lines.append(f"{kind.value}\t{r.precision!r}\t{r.recall!r}\t{r.f1!r}\n")
    return "".join(lines)


def render_profile(profile: KgProfile) -> str:
    return (
        "metric\tvalue\n"
        f"instances\t{profile.instances}\n"
        f"classes\t{profile.classes}\n"
        f"infoboxClasses\t{profile.infobox_classes}\n"
        f"properties\t{profile.properties}\n"
        f"assertions\t{profile.assertions}\n"
    )


def render_alignment_stats(total: int, without_shared_label: int, fraction: float) -> str:
    return (
        "metric\tvalue\n"
        f"correspondences\t{total}\n"
        f"withoutSharedLabel\t{without_shared_label}\n"
        f"withoutSharedLabelFraction\t{fraction!r}\n"
    )


def render_class_distribution(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"
