"""Chunked condensed (lower-triangular) distance matrix.

The n(n-1)/2 pairwise distances are spread over fixed-size float64 blocks
instead of one array, so the item count is bounded by memory rather than by
the maximum size of a single allocation. Entry (i, j) with i < j lives at
flat index i*n - i*(i+1)/2 + (j - i - 1).
"""

from __future__ import annotations

import math
import struct
from pathlib import Path
from typing import Union

import numpy as np

DEFAULT_BLOCK_ENTRIES = 1 << 24

_MAGIC = b"KGFCMAT1"
_HEADER = struct.Struct("<8sQQ")


class CapacityError(MemoryError):
    """Raised when the requested matrix cannot be allocated."""

    def __init__(self, n: int, required_bytes: int):
        super().__init__(
            f"condensed matrix for {n} items needs {required_bytes} bytes"
        )
        self.required_bytes = required_bytes


def pair_count(n: int) -> int:
    """Number of unordered pairs over n items: n(n-1)/2."""
    if n < 0:
        raise ValueError(f"item count must be >= 0, got {n}")
    return n * (n - 1) // 2


class CondensedMatrix:
    __slots__ = ("n", "block_entries", "blocks")

    def __init__(self, n: int, block_entries: int = DEFAULT_BLOCK_ENTRIES, fill: float = 0.0):
        if n < 2:
            raise ValueError("a condensed matrix needs at least 2 items")
        if block_entries < 1:
            raise ValueError("block_entries must be >= 1")
        self.n = n
        self.block_entries = block_entries
        total = pair_count(n)
        try:
            self.blocks = []
            remaining = total
            while remaining > 0:
                size = min(block_entries, remaining)
                self.blocks.append(np.full(size, fill, dtype=np.float64))
                remaining -= size
        except MemoryError as exc:
            raise CapacityError(n, total * 8) from exc

    def __len__(self) -> int:
        return pair_count(self.n)

    # --- index mapping ------------------------------------------------------

    def index(self, i: int, j: int) -> int:
        if i == j or not (0 <= i < self.n and 0 <= j < self.n):
            raise IndexError(f"bad pair ({i}, {j}) for n={self.n}")
        if i > j:
            i, j = j, i
        return i * self.n - i * (i + 1) // 2 + (j - i - 1)

    def pair(self, k: int) -> tuple[int, int]:
        """Inverse of index(): fromPair(toPair(k)) == k."""
        if not 0 <= k < len(self):
            raise IndexError(f"flat index {k} out of range")
        n = self.n
        # row i is the largest i with i*n - i*(i+1)/2 <= k
        disc = (2 * n - 1) ** 2 - 8 * k
        i = (2 * n - 1 - math.isqrt(disc)) // 2
        while i * n - i * (i + 1) // 2 > k:
            i -= 1
        while (i + 1) * n - (i + 1) * (i + 2) // 2 <= k:
            i += 1
        j = k - (i * n - i * (i + 1) // 2) + i + 1
        return i, j

    # --- element access -----------------------------------------------------

    def get(self, i: int, j: int) -> float:
        k = self.index(i, j)
        return float(self.blocks[k // self.block_entries][k % self.block_entries])

    def set(self, i: int, j: int, value: float) -> None:
        k = self.index(i, j)
        self.blocks[k // self.block_entries][k % self.block_entries] = value

    def _row_indices(self, i: int) -> np.ndarray:
        """Flat indices of d(i, j) for all j != i, ascending."""
        n = self.n
        before = np.arange(i, dtype=np.int64)
        part1 = before * n - before * (before + 1) // 2 + (i - before - 1)
        start = i * n - i * (i + 1) // 2
        part2 = np.arange(start, start + (n - i - 1), dtype=np.int64)
        return np.concatenate([part1, part2])

    def _gather(self, indices: np.ndarray) -> np.ndarray:
        out = np.empty(len(indices), dtype=np.float64)
        be = self.block_entries
        lo = 0
        for b, block in enumerate(self.blocks):
            hi = np.searchsorted(indices, (b + 1) * be, side="left")
            if hi > lo:
                out[lo:hi] = block[indices[lo:hi] - b * be]
            lo = hi
        return out

    def _scatter(self, indices: np.ndarray, values: np.ndarray) -> None:
        be = self.block_entries
        lo = 0
        for b, block in enumerate(self.blocks):
            hi = np.searchsorted(indices, (b + 1) * be, side="left")
            if hi > lo:
                block[indices[lo:hi] - b * be] = values[lo:hi]
            lo = hi

    def row(self, i: int) -> np.ndarray:
        """Length-n array of d(i, *); position i is +inf."""
        out = np.empty(self.n, dtype=np.float64)
        values = self._gather(self._row_indices(i))
        out[:i] = values[:i]
        out[i] = np.inf
        out[i + 1:] = values[i:]
        return out

    def write_row(self, i: int, values: np.ndarray) -> None:
        """Write d(i, j) for all j != i from a length-n array (slot i ignored)."""
        packed = np.concatenate([values[:i], values[i + 1:]])
        self._scatter(self._row_indices(i), packed)

    def write_tail(self, i: int, j_start: int, values: np.ndarray) -> None:
        """Write the contiguous run d(i, j_start .. j_start+len-1), j > i."""
        if j_start <= i:
            raise IndexError("write_tail requires j_start > i")
        start = self.index(i, j_start)
        be = self.block_entries
        offset = 0
        while offset < len(values):
            b, pos = divmod(start + offset, be)
            take = min(len(values) - offset, be - pos)
            self.blocks[b][pos:pos + take] = values[offset:offset + take]
            offset += take

    # --- whole-matrix helpers -------------------------------------------------

    def has_nan(self) -> bool:
        return any(bool(np.isnan(block).any()) for block in self.blocks)

    def copy(self) -> "CondensedMatrix":
        dup = CondensedMatrix.__new__(CondensedMatrix)
        dup.n = self.n
        dup.block_entries = self.block_entries
        dup.blocks = [block.copy() for block in self.blocks]
        return dup

    def to_array(self) -> np.ndarray:
        return np.concatenate(self.blocks) if self.blocks else np.empty(0)

    def __eq__(self, other) -> bool:
        # content equality, independent of chunking
        if not isinstance(other, CondensedMatrix):
            return NotImplemented
        return self.n == other.n and np.array_equal(
            self.to_array(), other.to_array(), equal_nan=True
        )

    # --- persistence ----------------------------------------------------------

    def save(self, path: Union[str, Path]) -> None:
        with open(path, "wb") as handle:
            handle.write(_HEADER.pack(_MAGIC, self.n, self.block_entries))
            for block in self.blocks:
                handle.write(block.astype("<f8", copy=False).tobytes())

    @classmethod
    def load(cls, path: Union[str, Path]) -> "CondensedMatrix":
        with open(path, "rb") as handle:
            magic, n, block_entries = _HEADER.unpack(handle.read(_HEADER.size))
            if magic != _MAGIC:
                raise ValueError(f"not a condensed matrix file: {path}")
            matrix = cls(n, block_entries)
            for block in matrix.blocks:
                raw = handle.read(len(block) * 8)
                block[:] = np.frombuffer(raw, dtype="<f8")
        return matrix
