"""Toroidal sub-block index sets on a P x Q coefficient grid.

A b x b block anchored at grid cell (p, q) wraps cyclically in both the
row and the column dimension.  Indices refer to positions in the
column-major vectorization of the P x Q matrix and are 1-based, matching
the usual convention for support sets (J_{1,1} = {1, 2, P+1, P+2} for
b = 2).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import NamedTuple

import numpy as np

__all__ = [
    "BlockAnchor",
    "BlockIndexSet",
    "BlockCollection",
    "block_index_set",
    "block_index_set_1d",
    "valid_blocks",
    "valid_blocks_1d",
]


class BlockAnchor(NamedTuple):
    """Top-left cell (p, q) of a block, 1-based."""

    p: int
    q: int


@dataclass(frozen=True)
class BlockIndexSet:
    """Vectorized member indices of one block.

    ``indices`` holds the b*b distinct 1-based positions of the block in
    the column-major vectorization, sorted ascending.  ``offset`` shifts
    every index by a constant and is used to address one segment of a
    stacked coefficient vector (stacked multi-user problems); the anchor
    stays grid-local.
    """

    anchor: BlockAnchor
    indices: tuple[int, ...]
    offset: int = 0

    def __post_init__(self):
        if len(set(self.indices)) != len(self.indices):
            raise ValueError("block indices must be distinct")
        if tuple(sorted(self.indices)) != self.indices:
            object.__setattr__(self, "indices", tuple(sorted(self.indices)))


@dataclass(frozen=True)
class BlockCollection:
    """A set of candidate blocks over a (P, Q) grid with block side b."""

    grid: tuple[int, int, int]  # (P, Q, b)
    blocks: tuple[BlockIndexSet, ...]
    # Inclusive 1-based (start, stop) ranges, one per segment, for stacked
    # problems; empty when the collection addresses a single grid.
    segments: tuple[tuple[int, int], ...] = field(default=())

    def __len__(self) -> int:
        return len(self.blocks)

    @cached_property
    def index_array(self) -> np.ndarray:
        """All block indices as a 0-based (n_blocks, b*b) int array."""
        arr = np.asarray([b.indices for b in self.blocks], dtype=np.int64) - 1
        arr.setflags(write=False)
        return arr

    def max_index(self) -> int:
        return int(self.index_array.max()) + 1


def _check_anchor(p: int, q: int, b: int, P: int, Q: int) -> None:
    if not (1 <= p <= P and 1 <= q <= Q):
        raise ValueError(f"anchor ({p}, {q}) outside 1..{P} x 1..{Q}")
    if not (1 <= b <= min(P, Q)):
        raise ValueError(f"block side {b} must lie in 1..min({P}, {Q})")


def block_index_set(p: int, q: int, b: int, P: int, Q: int, offset: int = 0) -> BlockIndexSet:
    """Indices of the b x b block anchored at (p, q) on the P x Q torus.

    Rows past P wrap to the top of the same column; columns past Q wrap
    to the first column (full torus semantics in both dimensions).
    """
    _check_anchor(p, q, b, P, Q)
    rows = (p - 1 + np.arange(b)) % P  # 0-based
    cols = (q - 1 + np.arange(b)) % Q
    idx = (rows[:, None] + cols[None, :] * P).ravel() + 1
    return BlockIndexSet(BlockAnchor(p, q), tuple(sorted(int(i) + offset for i in idx)), offset)


def block_index_set_1d(p: int, b: int, P: int, offset: int = 0) -> BlockIndexSet:
    """Indices {p, p+1, ...} of a length-b run on the 1-D circle of size P."""
    if not (1 <= p <= P):
        raise ValueError(f"anchor {p} outside 1..{P}")
    if not (1 <= b <= P):
        raise ValueError(f"block length {b} must lie in 1..{P}")
    idx = (p - 1 + np.arange(b)) % P + 1
    return BlockIndexSet(BlockAnchor(p, 1), tuple(sorted(int(i) + offset for i in idx)), offset)


@lru_cache(maxsize=256)
def valid_blocks(P: int, Q: int, b: int, segment_offset: int = 0) -> BlockCollection:
    """All P*Q candidate anchors, enumerated column-major ((1,1), (2,1), ...).

    ``segment_offset`` translates every index by a constant so the
    collection addresses one segment of a stacked vector.  Results are
    memoized; collections are immutable and safe to share.
    """
    _check_anchor(1, 1, b, P, Q)
    blocks = tuple(
        block_index_set(p, q, b, P, Q, offset=segment_offset)
        for q in range(1, Q + 1)
        for p in range(1, P + 1)
    )
    seg = ((segment_offset + 1, segment_offset + P * Q),)
    return BlockCollection((P, Q, b), blocks, segments=seg)


@lru_cache(maxsize=256)
def valid_blocks_1d(P: int, b: int, segment_offset: int = 0) -> BlockCollection:
    """All P candidate anchors of length-b runs on the size-P circle."""
    if not (1 <= b <= P):
        raise ValueError(f"block length {b} must lie in 1..{P}")
    blocks = tuple(block_index_set_1d(p, b, P, offset=segment_offset) for p in range(1, P + 1))
    seg = ((segment_offset + 1, segment_offset + P),)
    return BlockCollection((P, 1, b), blocks, segments=seg)


def concat_collections(collections: list[BlockCollection]) -> BlockCollection:
    """Merge per-segment collections (same grid) into one stacked collection."""
    grids = {c.grid for c in collections}
    if len(grids) != 1:
        raise ValueError("collections must share the same (P, Q, b) grid")
    blocks = tuple(b for c in collections for b in c.blocks)
    segments = tuple(s for c in collections for s in c.segments)
    return BlockCollection(collections[0].grid, blocks, segments=segments)
