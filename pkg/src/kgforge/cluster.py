"""Hierarchical agglomerative clustering over a condensed distance matrix.

Single linkage uses the SLINK pointer recurrences (O(n^2) time, O(n)
working memory, exact). Complete linkage uses the nearest-neighbor-chain
algorithm with the max-distance update, which reproduces the greedy
"repeatedly merge the two closest clusters" hierarchy exactly whenever
distances are distinct, in O(n^2) time. Published O(n^2) pointer schemes
for complete linkage trade that exactness away, so they are not used here.

Cluster ids: leaves are 0..n-1, the t-th merge creates id n+t. Ties in
merge distance are broken by the smaller participating ids.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .condensed import CondensedMatrix

LINKAGES = ("single", "complete")


@dataclass(frozen=True)
class Merge:
    left: int
    right: int
    distance: float
    new_id: int


@dataclass(frozen=True)
class Dendrogram:
    n_leaves: int
    merges: tuple[Merge, ...]

    def __post_init__(self):
        if len(self.merges) != max(self.n_leaves - 1, 0):
            raise ValueError(
                f"{self.n_leaves} leaves need {self.n_leaves - 1} merges, "
                f"got {len(self.merges)}"
            )

    def leaf_sets(self) -> dict[int, frozenset[int]]:
        """Cluster id -> set of leaf indices under it."""
        sets = {i: frozenset([i]) for i in range(self.n_leaves)}
        for m in self.merges:
            sets[m.new_id] = sets[m.left] | sets[m.right]
        return sets

    def merge_set(self) -> frozenset:
        """Order-free canonical form: {({left leaves}, {right leaves}, distance)}."""
        sets = self.leaf_sets()
        return frozenset(
            (frozenset((sets[m.left], sets[m.right])), m.distance) for m in self.merges
        )


class _UnionFindIds:
    """Maps each current cluster root to its dendrogram node id."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.node = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def merge(self, a: int, b: int, new_node: int) -> tuple[int, int]:
        ra, rb = self.find(a), self.find(b)
        left, right = sorted((self.node[ra], self.node[rb]))
        self.parent[rb] = ra
        self.node[ra] = new_node
        return left, right


def _label(n: int, raw: list[tuple[int, int, float]]) -> tuple[Merge, ...]:
    """Turn (leaf-slot, leaf-slot, distance) records into ordered merges."""
    raw.sort(key=lambda r: (r[2], r[0], r[1]))
    uf = _UnionFindIds(n)
    merges = []
    for t, (a, b, dist) in enumerate(raw):
        left, right = uf.merge(a, b, n + t)
        merges.append(Merge(left, right, dist, n + t))
    return tuple(merges)


def _slink(matrix: CondensedMatrix) -> tuple[Merge, ...]:
    n = matrix.n
    pi = np.zeros(n, dtype=np.int64)
    lam = np.full(n, np.inf)
    m = np.empty(n)
    for k in range(1, n):
        pi[k] = k
        lam[k] = np.inf
        m[:k] = matrix.row(k)[:k]
        for i in range(k):
            if lam[i] >= m[i]:
                m[pi[i]] = min(m[pi[i]], lam[i])
                lam[i] = m[i]
                pi[i] = k
            else:
                m[pi[i]] = min(m[pi[i]], m[i])
        for i in range(k):
            if lam[i] >= lam[pi[i]]:
                pi[i] = k
    raw = [(min(i, int(pi[i])), max(i, int(pi[i])), float(lam[i])) for i in range(n - 1)]
    return _label(matrix.n, raw)


def _nn_chain_complete(matrix: CondensedMatrix) -> tuple[Merge, ...]:
    n = matrix.n
    work = matrix.copy()
    active = np.ones(n, dtype=bool)
    raw: list[tuple[int, int, float]] = []
    chain: list[int] = []
    lowest = 0
    while len(raw) < n - 1:
        if not chain:
            while not active[lowest]:
                lowest += 1
            chain.append(lowest)
        top = chain[-1]
        row = work.row(top)
        row[~active] = np.inf
        if len(chain) >= 2:
            # prefer the predecessor on ties so reciprocal pairs terminate
            prev = chain[-2]
            best = int(np.argmin(row))
            nearest = prev if row[prev] <= row[best] else best
        else:
            nearest = int(np.argmin(row))
        if len(chain) >= 2 and nearest == chain[-2]:
            a, b = sorted((top, nearest))
            raw.append((a, b, float(row[nearest])))
            merged = np.maximum(work.row(a), work.row(b))
            work.write_row(a, merged)
            active[b] = False
            chain.pop()
            chain.pop()
        else:
            chain.append(nearest)
    return _label(n, raw)


def hac(matrix: CondensedMatrix, linkage: str = "complete") -> Dendrogram:
    """Cluster the items of a condensed distance matrix."""
    if linkage not in LINKAGES:
        raise ValueError(f"unknown linkage {linkage!r}; expected one of {LINKAGES}")
    if matrix.has_nan():
        raise ValueError("distance matrix contains NaN")
    merges = _slink(matrix) if linkage == "single" else _nn_chain_complete(matrix)
    return Dendrogram(matrix.n, merges)


# --- persistence: one merge per line "left right distance newId" -------------

def save_dendrogram(dendrogram: Dendrogram, path: Union[str, Path]) -> None:
    lines = [f"# leaves {dendrogram.n_leaves}\n"]
    lines += [
        f"{m.left} {m.right} {m.distance!r} {m.new_id}\n" for m in dendrogram.merges
    ]
    Path(path).write_text("".join(lines), encoding="utf-8")


def load_dendrogram(path: Union[str, Path]) -> Dendrogram:
    n_leaves = None
    merges = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            if n_leaves is None and line[1:].split()[:1] == ["leaves"]:
                n_leaves = int(line[1:].split()[1])
            continue
        left, right, distance, new_id = line.split()
        merges.append(Merge(int(left), int(right), float(distance), int(new_id)))
    if n_leaves is None:
        n_leaves = len(merges) + 1
    return Dendrogram(n_leaves, tuple(merges))
