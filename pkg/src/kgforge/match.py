"""Pairwise graph matching: a label-based builtin matcher, an adapter for
external one-to-one matcher processes, and 1:1 extraction.

The builtin matcher is element-level only: exact normalized-label equality
scores 1.0, otherwise the token-set Jaccard of the labels counts when it
reaches the configured threshold. Candidates are blocked by shared label
tokens, which is lossless for any positive threshold.
"""

from __future__ import annotations

import logging
import shlex
import subprocess
import tempfile
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from .featurize import tokenize
from .model import Alignment, Correspondence, EntityKind, Iri, KnowledgeGraph
from .vocab import DEFAULT_BASE, entity_kind, fragment

log = logging.getLogger(__name__)

MATCHABLE_KINDS = frozenset(
    {EntityKind.INSTANCE, EntityKind.CLASS, EntityKind.PROPERTY}
)


@dataclass(frozen=True)
class MatcherConfig:
    jaccard_threshold: float = 0.8
    match_kinds: frozenset[EntityKind] = MATCHABLE_KINDS
    base: str = DEFAULT_BASE

    def __post_init__(self):
        if not 0.0 <= self.jaccard_threshold <= 1.0:
            raise ValueError(f"jaccard_threshold out of [0,1]: {self.jaccard_threshold}")


def normalize_label(label: str) -> str:
    return label.replace("_", " ").lower()


def entity_labels(kg: KnowledgeGraph, iri: Iri) -> tuple[str, ...]:
    """rdfs:label values, or the IRI fragment when no label exists."""
    labels = kg.labels(iri)
    return labels if labels else (fragment(iri),)


def _entities_by_kind(kg: KnowledgeGraph, cfg: MatcherConfig):
    grouped: dict[EntityKind, list[Iri]] = {}
    for iri in kg.iris():
        kind = entity_kind(iri, cfg.base)
        if kind in cfg.match_kinds:
            grouped.setdefault(kind, []).append(iri)
    return grouped


def match_pair(
    a: KnowledgeGraph, b: KnowledgeGraph, cfg: MatcherConfig = MatcherConfig()
) -> Alignment:
    """Candidate correspondences between entities of equal kind; not yet 1:1."""
    found: dict[tuple[Iri, Iri], float] = {}
    b_by_kind = _entities_by_kind(b, cfg)
    for kind, a_entities in _entities_by_kind(a, cfg).items():
        b_entities = b_by_kind.get(kind, [])
        if not b_entities:
            continue
        exact_index: dict[str, list[Iri]] = {}
        token_index: dict[str, set[Iri]] = {}
        b_tokens: dict[Iri, list[frozenset[str]]] = {}
        for b_iri in b_entities:
            label_sets = []
            for label in entity_labels(b, b_iri):
                exact_index.setdefault(normalize_label(label), []).append(b_iri)
                tokens = frozenset(tokenize(label))
                label_sets.append(tokens)
                for token in tokens:
                    token_index.setdefault(token, set()).add(b_iri)
            b_tokens[b_iri] = label_sets
        for a_iri in a_entities:
            labels = entity_labels(a, a_iri)
            hits: dict[Iri, float] = {}
            for label in labels:
                for b_iri in exact_index.get(normalize_label(label), ()):
                    hits[b_iri] = 1.0
            for label in labels:
                tokens = frozenset(tokenize(label))
                candidates: set[Iri] = set()
                for token in tokens:
                    candidates |= token_index.get(token, set())
                for b_iri in candidates:
                    if hits.get(b_iri) == 1.0:
                        continue
                    for other in b_tokens[b_iri]:
                        union = len(tokens | other)
                        if union == 0:
                            continue
                        jaccard = len(tokens & other) / union
                        if jaccard >= cfg.jaccard_threshold and jaccard > hits.get(b_iri, 0.0):
                            hits[b_iri] = jaccard
            for b_iri, confidence in hits.items():
                if a_iri == b_iri:
                    continue
                key = (a_iri, b_iri)
                if confidence > found.get(key, 0.0):
                    found[key] = confidence
    ordered = sorted(found.items(), key=lambda kv: (kv[0][0].value, kv[0][1].value))
    return Alignment(
        Correspondence(source, target, "=", conf) for (source, target), conf in ordered
    )


def extract_one_to_one(alignment: Alignment) -> Alignment:
    """Greedy selection in descending confidence (ties by (source, target)),
    keeping a correspondence only while both ends are unused."""
    ranked = sorted(
        alignment, key=lambda c: (-c.confidence, c.source.value, c.target.value)
    )
    used_sources: set[Iri] = set()
    used_targets: set[Iri] = set()
    kept = []
    for corr in ranked:
        if corr.source in used_sources or corr.target in used_targets:
            continue
        used_sources.add(corr.source)
        used_targets.add(corr.target)
        kept.append(corr)
    return Alignment(kept)


# --- alignment TSV files --------------------------------------------------------
#
# sourceIri<TAB>targetIri<TAB>relation<TAB>confidence

class AlignmentParseError(ValueError):
    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


def alignment_to_tsv(alignment: Alignment) -> str:
    return "".join(
        f"{c.source.value}\t{c.target.value}\t{c.relation}\t{c.confidence!r}\n"
        for c in alignment
    )


def save_alignment(alignment: Alignment, path: Union[str, Path]) -> None:
    Path(path).write_text(alignment_to_tsv(alignment), encoding="utf-8")


def parse_alignment_tsv(text: str) -> Alignment:
    correspondences = []
    for number, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise AlignmentParseError(number, f"expected 4 tab-separated fields, got {len(parts)}")
        source, target, relation, raw_confidence = parts
        try:
            confidence = float(raw_confidence)
        except ValueError:
            raise AlignmentParseError(number, f"bad confidence {raw_confidence!r}") from None
        try:
            correspondences.append(
                Correspondence(Iri(source), Iri(target), relation, confidence)
            )
        except ValueError as exc:
            raise AlignmentParseError(number, str(exc)) from None
    return Alignment(correspondences)


def load_alignment(path: Union[str, Path]) -> Alignment:
    return parse_alignment_tsv(Path(path).read_text(encoding="utf-8"))


# --- external matcher adapter ----------------------------------------------------

class ExternalMatcherError(RuntimeError):
    pass


def run_external_matcher(
    command_template: str,
    path_a: Union[str, Path],
    path_b: Union[str, Path],
    out_path: Optional[Union[str, Path]] = None,
    timeout: Optional[float] = None,
) -> Alignment:
    """Run a one-to-one matcher process and parse its TSV alignment.

    The template must contain the placeholders {A}, {B}, and {OUT}; it is
    tokenized first, so paths with spaces stay intact.
    """
    for placeholder in ("{A}", "{B}", "{OUT}"):
        if placeholder not in command_template:
            raise ValueError(f"command template is missing the {placeholder} placeholder")
    own_out = out_path is None
    if own_out:
        handle = tempfile.NamedTemporaryFile(
            prefix="matcher-", suffix=".tsv", delete=False
        )
        handle.close()
        out_path = handle.name
    out_path = Path(out_path)
    argv = [
        token.replace("{A}", str(path_a)).replace("{B}", str(path_b)).replace("{OUT}", str(out_path))
        for token in shlex.split(command_template)
    ]
    try:
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=timeout)
        except subprocess.TimeoutExpired as exc:
            raise ExternalMatcherError(
                f"matcher timed out after {timeout}s: {' '.join(argv)}"
            ) from exc
        except OSError as exc:
            raise ExternalMatcherError(f"cannot run matcher {argv[0]!r}: {exc}") from exc
        if proc.returncode != 0:
            raise ExternalMatcherError(
                f"matcher exited with status {proc.returncode}: {' '.join(argv)}\n"
                f"stdout: {proc.stdout.strip()}\nstderr: {proc.stderr.strip()}"
            )
        if not out_path.exists():
            raise ExternalMatcherError(f"matcher produced no output file {out_path}")
        try:
            raw = load_alignment(out_path)
        except AlignmentParseError as exc:
            raise ExternalMatcherError(f"unparseable matcher output: {exc}") from exc
    finally:
        if own_out:
            out_path.unlink(missing_ok=True)
    # one-to-one is enforced unconditionally on adapter output
    return extract_one_to_one(raw)


# --- matcher selection used by plan execution --------------------------------------

class BuiltinMatcher:
    def __init__(self, config: MatcherConfig = MatcherConfig()):
        self.config = config

    def match(self, a: KnowledgeGraph, b: KnowledgeGraph, path_a, path_b) -> Alignment:
        return match_pair(a, b, self.config)


class ExternalMatcher:
    """Wraps a command template; a semaphore caps concurrent subprocesses."""

    def __init__(
        self,
        command_template: str,
        timeout: Optional[float] = None,
        max_processes: int = 4,
    ):
        self.command_template = command_template
        self.timeout = timeout
        self._gate = threading.BoundedSemaphore(max_processes)

    def match(self, a: KnowledgeGraph, b: KnowledgeGraph, path_a, path_b) -> Alignment:
        with self._gate:
            return run_external_matcher(
                self.command_template, path_a, path_b, timeout=self.timeout
            )
