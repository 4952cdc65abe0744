"""Greedy block-sparse recovery: generalized block OMP and the plain-OMP baseline.

Each iteration correlates the residual with every dictionary column, scores
every candidate block by the l2 norm of its correlations, selects the best
block (ties broken by the lexicographically smallest anchor), refits by
least squares on the accumulated support and updates the residual.  The
loop stops after ``max_blocks`` selections or once the squared peak
correlation drops to ``tau``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .blocks import BlockAnchor, BlockCollection, BlockIndexSet

__all__ = [
    "SolverConfig",
    "SolverResult",
    "gbomp",
    "omp",
    "least_squares",
    "default_tau",
    "NOISELESS_TAU",
]

# residual-correlation floor used when no noise threshold applies
NOISELESS_TAU = 1e-20


@dataclass(frozen=True)
class SolverConfig:
    """Stopping rule and selection constraints for one solve.

    ``max_blocks`` is the block budget (atom budget for :func:`omp`);
    ``tau`` the squared peak-correlation stopping threshold.  When
    ``one_block_per_segment`` holds 1-based inclusive index ranges, a
    segment is frozen as soon as one of its blocks has been selected.
    """

    max_blocks: int
    tau: float = NOISELESS_TAU
    one_block_per_segment: tuple[tuple[int, int], ...] | None = None
    tie_break: str = "lexicographic"

    def __post_init__(self):
        if self.max_blocks < 1:
            raise ValueError("max_blocks must be >= 1")
        if self.tau < 0:
            raise ValueError("tau must be non-negative")
        if self.tie_break != "lexicographic":
            raise ValueError("only lexicographic tie-breaking is supported")


@dataclass(frozen=True)
class SolverResult:
    """Outcome of one greedy solve.

    ``estimate`` is the minimum-norm least-squares coefficient vector on
    the final support scattered into full length; ``support`` the sorted
    1-based selected indices.
    """

    estimate: np.ndarray
    support: tuple[int, ...]
    selected_anchors: tuple[BlockAnchor, ...]
    residual_norms: tuple[float, ...]
    selected_blocks: tuple[BlockIndexSet, ...] = field(default=())

    @property
    def n_iterations(self) -> int:
        return len(self.selected_anchors)


def least_squares(a_sub: np.ndarray, y: np.ndarray, rcond: float = 1e-10) -> np.ndarray:
    """Minimum-norm least-squares solution of a_sub @ x ~ y."""
    x, *_ = np.linalg.lstsq(a_sub, y, rcond=rcond)
    return x


def default_tau(noise_variance: float, a_bar: np.ndarray) -> float:
    """Noise-floor stopping threshold 2*sigma^2*ln(N)*max_j ||a_j||^2.

    Bounds the squared peak correlation of pure circular Gaussian noise
    with the N dictionary columns, so a solve on a signal-free observation
    selects nothing with probability about 1 - 1/N.
    """
    if noise_variance < 0:
        raise ValueError("noise_variance must be non-negative")
    if noise_variance == 0:
        return NOISELESS_TAU
    col_sq = np.abs(a_bar) ** 2
    return 2.0 * noise_variance * np.log(a_bar.shape[1]) * float(col_sq.sum(axis=0).max())


def _segment_ids(idx0: np.ndarray, ranges) -> np.ndarray | None:
    """Map each block to the segment range that contains all its indices."""
    if not ranges:
        return None
    lo = idx0.min(axis=1) + 1
    hi = idx0.max(axis=1) + 1
    ids = np.full(idx0.shape[0], -1, dtype=np.int64)
    for s, (start, stop) in enumerate(ranges):
        ids[(lo >= start) & (hi <= stop)] = s
    return ids


def _tie_break(scores: np.ndarray, selectable: np.ndarray, blocks) -> int:
    """Index of the best-scoring selectable block, smallest anchor on ties."""
    masked = np.where(selectable, scores, -np.inf)
    top = masked.max()
    candidates = np.flatnonzero(masked == top)
    if len(candidates) == 1:
        return int(candidates[0])
    return int(min(candidates, key=lambda i: (blocks[i].offset, blocks[i].anchor)))


def gbomp(
    y: np.ndarray,
    a_bar: np.ndarray,
    blocks: BlockCollection,
    config: SolverConfig,
) -> SolverResult:
    """Generalized block OMP over an explicit candidate-block collection.

    Blocks whose indices are already fully contained in the support are
    excluded from later selections (re-selecting them would be a no-op
    under the support union).
    """
    y = np.asarray(y, dtype=complex).ravel()
    a_bar = np.asarray(a_bar, dtype=complex)
    if a_bar.ndim != 2 or a_bar.shape[0] != y.shape[0]:
        raise ValueError(f"shape mismatch: y has {y.shape[0]} entries, "
                         f"A has shape {a_bar.shape}")
    n = a_bar.shape[1]
    if blocks.max_index() > n:
        raise ValueError("block indices exceed the dictionary width")

    idx0 = blocks.index_array
    seg_ids = _segment_ids(idx0, config.one_block_per_segment)
    selectable = np.ones(len(blocks.blocks), dtype=bool)
    in_support = np.zeros(n, dtype=bool)

    r = y.copy()
    sup0 = np.empty(0, dtype=np.int64)
    coeffs = np.empty(0, dtype=complex)
    anchors: list[BlockAnchor] = []
    chosen: list[BlockIndexSet] = []
    res_norms: list[float] = []

    for _ in range(config.max_blocks):
        corr = (r.conj() @ a_bar).conj()  # A^H r without materializing A^H
        if float(np.abs(corr).max(initial=0.0)) ** 2 <= config.tau:
            break
        if not selectable.any():
            break
        scores = np.linalg.norm(corr[idx0], axis=1)
        best = _tie_break(scores, selectable, blocks.blocks)

        in_support[idx0[best]] = True
        sup0 = np.flatnonzero(in_support)
        coeffs = least_squares(a_bar[:, sup0], y)
        r = y - a_bar[:, sup0] @ coeffs
        res_norms.append(float(np.linalg.norm(r)))
        anchors.append(blocks.blocks[best].anchor)
        chosen.append(blocks.blocks[best])

        selectable &= ~in_support[idx0].all(axis=1)
        if seg_ids is not None and seg_ids[best] >= 0:
            selectable &= seg_ids != seg_ids[best]

    estimate = np.zeros(n, dtype=complex)
    estimate[sup0] = coeffs
    return SolverResult(
        estimate=estimate,
        support=tuple(int(i) + 1 for i in sup0),
        selected_anchors=tuple(anchors),
        residual_norms=tuple(res_norms),
        selected_blocks=tuple(chosen),
    )


@lru_cache(maxsize=None)
def _singleton_collection(n: int) -> BlockCollection:
    blocks = tuple(
        BlockIndexSet(BlockAnchor(p, 1), (p,)) for p in range(1, n + 1)
    )
    return BlockCollection((n, 1, 1), blocks, segments=((1, n),))


def omp(y: np.ndarray, a_bar: np.ndarray, config: SolverConfig) -> SolverResult:
    """Plain OMP: the same greedy loop with singleton blocks.

    ``config.max_blocks`` is the atom budget.  When benchmarking against
    :func:`gbomp` the caller should grant max_blocks * b^2 atoms so both
    solvers may select equally many coefficients.
    """
    a_bar = np.asarray(a_bar, dtype=complex)
    return gbomp(y, a_bar, _singleton_collection(a_bar.shape[1]), config)
