"""Blocked, parallel computation of the condensed cosine-distance matrix.

Vectors are packed into one CSR matrix with L2-normalized rows; the matrix
is filled block-pair by block-pair with sparse products. Block boundaries
are fixed (independent of the worker count) and every entry is written by
exactly one task, so results are bitwise identical for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import numpy as np
from scipy import sparse

from .condensed import DEFAULT_BLOCK_ENTRIES, CondensedMatrix
from .featurize import SparseVector

DEFAULT_ROW_BLOCK = 512

# distances this close to zero are rounding residue of identical vectors;
# snap them so identity pairs read exactly 0
_ZERO_SNAP = 1e-15


def _to_csr(vectors: Sequence[SparseVector]) -> sparse.csr_matrix:
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    width = 0
    for vec in vectors:
        items = sorted(vec.entries.items())
        for term, weight in items:
            indices.append(term)
            data.append(weight / vec.norm if vec.norm > 0.0 else 0.0)
        indptr.append(len(indices))
        if items:
            width = max(width, items[-1][0] + 1)
    return sparse.csr_matrix(
        (np.asarray(data), np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(vectors), max(width, 1)),
    )


def distance_matrix(
    vectors: Sequence[SparseVector],
    workers: int = 1,
    block_entries: int = DEFAULT_BLOCK_ENTRIES,
    row_block: int = DEFAULT_ROW_BLOCK,
) -> CondensedMatrix:
    """Condensed matrix of pairwise cosine distances, in [0, 1]."""
    n = len(vectors)
    if n < 2:
        raise ValueError("distance_matrix needs at least 2 vectors")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    normalized = _to_csr(vectors)
    matrix = CondensedMatrix(n, block_entries=block_entries)
    starts = range(0, n, row_block)
    tasks = [
        (i0, min(i0 + row_block, n), j0, min(j0 + row_block, n))
        for i0 in starts
        for j0 in starts
        if j0 >= i0
    ]

    def run(task: tuple[int, int, int, int]) -> None:
        i0, i1, j0, j1 = task
        sims = (normalized[i0:i1] @ normalized[j0:j1].T).toarray()
        dists = 1.0 - sims
        np.clip(dists, 0.0, 1.0, out=dists)
        dists[dists <= _ZERO_SNAP] = 0.0
        for i in range(i0, i1):
            tail = max(j0, i + 1)
            if tail < j1:
                matrix.write_tail(i, tail, dists[i - i0, tail - j0:])

    if workers == 1:
        for task in tasks:
            run(task)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for _ in pool.map(run, tasks):
                pass
    return matrix
