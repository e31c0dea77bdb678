"""Pairwise graph union under an alignment, and leveled plan execution.

Plan execution stages everything through the workspace: inputs are read
from files, outputs are written to temporary names and atomically renamed.
Tasks within a level run on a bounded worker pool; a finished task's
artifacts are sufficient to resume an interrupted run.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Union

from .match import alignment_to_tsv, extract_one_to_one
from .mergeplan import MergePlan, MergeTask
from .model import Alignment, Iri, KnowledgeGraph, Triple
from .ntriples import load_ntriples, serialize_ntriples
from .util import atomic_write_text

log = logging.getLogger(__name__)


class PlanExecutionError(RuntimeError):
    pass


@dataclass(frozen=True)
class MergeTaskResult:
    output_id: str
    alignment_path: Path
    union_graph_path: Path
    elapsed: float
    skipped: bool = False


def merge_pair(a: KnowledgeGraph, b: KnowledgeGraph, alignment: Alignment) -> KnowledgeGraph:
    """Union of a and b with every matched b-IRI replaced by its a-side
    counterpart (in subject, predicate, and object position)."""
    known = a.iris() | b.iris()
    rewrite: dict[Iri, Iri] = {}
    for corr in alignment:
        if corr.source not in known or corr.target not in known:
            log.warning(
                "merge %s+%s: correspondence %s = %s references an unknown IRI; skipped",
                a.id, b.id, corr.source, corr.target,
            )
            continue
        rewrite[corr.target] = corr.source
    triples = set(a.triples)
    for t in b.triples:
        subject = rewrite.get(t.subject, t.subject)
        predicate = rewrite.get(t.predicate, t.predicate)
        obj = rewrite.get(t.object, t.object) if isinstance(t.object, Iri) else t.object
        triples.add(Triple(subject, predicate, obj))
    return KnowledgeGraph(f"{a.id}+{b.id}", triples)


def _leaf_path(workspace: Path, name: str) -> Path:
    return workspace / "kgs" / f"{name}.nt"


def _union_path(workspace: Path, name: str) -> Path:
    return workspace / "unions" / f"{name}.nt"


def _alignment_path(workspace: Path, name: str) -> Path:
    return workspace / "alignments" / f"{name}.tsv"


def _input_path(workspace: Path, plan: MergePlan, name: str) -> Path:
    return _leaf_path(workspace, name) if name in set(plan.leaves) else _union_path(workspace, name)


def execute_plan(
    plan: MergePlan,
    workspace: Union[str, Path],
    matcher,
    workers: int = 1,
) -> KnowledgeGraph:
    """Run every merge task level by level and return the root union graph.

    `matcher` needs a .match(graph_a, graph_b, path_a, path_b) -> Alignment
    method (BuiltinMatcher or ExternalMatcher). The larger input of each
    task keeps its IRIs.
    """
    workspace = Path(workspace)
    (workspace / "unions").mkdir(parents=True, exist_ok=True)
    (workspace / "alignments").mkdir(parents=True, exist_ok=True)
    missing = [name for name in plan.leaves if not _leaf_path(workspace, name).exists()]
    if missing:
        raise PlanExecutionError(
            f"missing leaf graph files in {workspace / 'kgs'}: {', '.join(missing)}"
        )

    def run_task(task: MergeTask) -> MergeTaskResult:
        union_path = _union_path(workspace, task.output)
        alignment_path = _alignment_path(workspace, task.output)
        if union_path.exists() and alignment_path.exists():
            return MergeTaskResult(task.output, alignment_path, union_path, 0.0, skipped=True)
        started = time.monotonic()
        left_path = _input_path(workspace, plan, task.left)
        right_path = _input_path(workspace, plan, task.right)
        left = load_ntriples(left_path)
        right = load_ntriples(right_path)
        # the larger graph plays role A and keeps its IRIs; ties go to the
        # lexicographically smaller id
        left_wins = (len(left), right.id) >= (len(right), left.id)
        big, big_path = (left, left_path) if left_wins else (right, right_path)
        small, small_path = (right, right_path) if left_wins else (left, left_path)
        alignment = extract_one_to_one(matcher.match(big, small, big_path, small_path))
        merged = merge_pair(big, small, alignment)
        atomic_write_text(alignment_path, alignment_to_tsv(alignment))
        atomic_write_text(union_path, serialize_ntriples(merged))
        return MergeTaskResult(
            task.output, alignment_path, union_path, time.monotonic() - started
        )

    for depth, level in enumerate(plan.levels):
        failures = []
        if workers == 1 or len(level) == 1:
            for task in level:
                try:
                    result = run_task(task)
                except Exception as exc:  # noqa: BLE001 - reported below
                    failures.append((task, exc))
                else:
                    _log_result(depth, result)
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                futures = {pool.submit(run_task, task): task for task in level}
                for future, task in futures.items():
                    try:
                        result = future.result()
                    except Exception as exc:  # noqa: BLE001
                        failures.append((task, exc))
                    else:
                        _log_result(depth, result)
        if failures:
            details = "; ".join(f"{task.output}: {exc}" for task, exc in failures)
            raise PlanExecutionError(
                f"level {depth}: {len(failures)} task(s) failed, aborting dependents: {details}"
            ) from failures[0][1]

    root_path = _input_path(workspace, plan, plan.root)
    return load_ntriples(root_path)


def _log_result(depth: int, result: MergeTaskResult) -> None:
    if result.skipped:
        log.info("level %d: %s already done, skipped", depth, result.output_id)
    else:
        log.info("level %d: merged %s in %.2fs", depth, result.output_id, result.elapsed)
