"""Leveled execution plan derived from a dendrogram.

A task's level is 0 when both inputs are leaves, otherwise one more than
the deepest non-leaf input. Tasks within a level touch disjoint inputs and
can run in parallel; levels are barriers.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

from .cluster import Dendrogram


@dataclass(frozen=True)
class MergeTask:
    left: str
    right: str
    output: str


@dataclass(frozen=True)
class MergePlan:
    leaves: tuple[str, ...]
    levels: tuple[tuple[MergeTask, ...], ...]

    @property
    def root(self) -> str:
        if not self.levels:
            return self.leaves[0]
        return self.levels[-1][-1].output

    def tasks(self):
        for level in self.levels:
            yield from level


@dataclass(frozen=True)
class PlanStats:
    height: int
    merges_per_level: tuple[int, ...]


def _check_name(name: str) -> str:
    if not name or any(ch.isspace() for ch in name):
        raise ValueError(f"plan input names must be non-empty and whitespace-free: {name!r}")
    return name


def plan_from_dendrogram(
    dendrogram: Dendrogram, leaf_names: Optional[Sequence[str]] = None
) -> MergePlan:
    n = dendrogram.n_leaves
    if leaf_names is None:
        leaf_names = [str(i) for i in range(n)]
    if len(leaf_names) != n:
        raise ValueError(f"{n} leaves but {len(leaf_names)} names")
    names = {i: _check_name(leaf_names[i]) for i in range(n)}
    level_of = {i: -1 for i in range(n)}  # leaves sit below level 0
    by_level: dict[int, list[MergeTask]] = {}
    for merge in dendrogram.merges:
        level = 1 + max(level_of[merge.left], level_of[merge.right])
        level_of[merge.new_id] = level
        names[merge.new_id] = f"n{merge.new_id}"
        by_level.setdefault(level, []).append(
            MergeTask(names[merge.left], names[merge.right], names[merge.new_id])
        )
    levels = tuple(tuple(by_level[lvl]) for lvl in sorted(by_level))
    return MergePlan(tuple(names[i] for i in range(n)), levels)


def plan_stats(plan: MergePlan) -> PlanStats:
    return PlanStats(
        height=len(plan.levels),
        merges_per_level=tuple(len(level) for level in plan.levels),
    )


# --- persistence --------------------------------------------------------------
#
# One level per block, blocks separated by blank lines, one task per line
# "left right -> out". A comment header keeps the leaf order.

def save_plan(plan: MergePlan, path: Union[str, Path]) -> None:
    lines = ["# leaves: " + " ".join(plan.leaves) + "\n"]
    for index, level in enumerate(plan.levels):
        if index > 0:
            lines.append("\n")
        lines += [f"{t.left} {t.right} -> {t.output}\n" for t in level]
    Path(path).write_text("".join(lines), encoding="utf-8")


def load_plan(path: Union[str, Path]) -> MergePlan:
    leaves: tuple[str, ...] = ()
    levels: list[tuple[MergeTask, ...]] = []
    current: list[MergeTask] = []
    for number, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.strip()
        if stripped.startswith("# leaves:"):
            leaves = tuple(stripped[len("# leaves:"):].split())
            continue
        if stripped.startswith("#"):
            continue
        if not stripped:
            if current:
                levels.append(tuple(current))
                current = []
            continue
        parts = stripped.split()
        if len(parts) != 4 or parts[2] != "->":
            raise ValueError(f"{path}:{number}: bad plan line: {stripped!r}")
        current.append(MergeTask(parts[0], parts[1], parts[3]))
    if current:
        levels.append(tuple(current))
    if not leaves:
        raise ValueError(f"{path}: missing '# leaves:' header")
    return MergePlan(leaves, tuple(levels))
