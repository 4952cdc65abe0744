"""End-to-end training/estimation strategies and the beamforming-gain metric.

Three pipelines are provided: per-UE downlink estimation (method 1), joint
uplink estimation of all users at the BS (method 2), and the two-stage
scheme (method 3) in which UEs first estimate their channels from a short
downlink phase, then transmit uplink pilots through their estimated
weights so the BS can pick its own weights without ever reconstructing
the full channels.  Every pipeline is scored by the average beamforming
gain of the chosen weight pairs against the true channels.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .blocks import BlockCollection, concat_collections, valid_blocks, valid_blocks_1d
from .channels import ArrayGeometry, fourier_dictionary, unvec
from .solver import SolverConfig, SolverResult, default_tau, gbomp, omp
from .training import (
    MeasurementEnsemble,
    TrainingSet,
    bernoulli_beams,
    method1_measurements,
    method2_measurements,
    method2_training,
    method3_phase2_measurements,
    method3_phase2_training,
)

__all__ = [
    "BeamformerPair",
    "StrategyOutcome",
    "dominant_singular_pair",
    "beamforming_gain",
    "perfect_csi_gain",
    "run_method1",
    "run_method2",
    "run_method3",
]

SOLVERS = ("gbomp", "omp")


@dataclass(frozen=True)
class BeamformerPair:
    """Unit-norm BS-side and UE-side weights for one user.

    ``degenerate`` flags pairs that fell back to canonical basis vectors
    because the estimate carried no usable signal.
    """

    bs_weight: np.ndarray
    ue_weight: np.ndarray
    degenerate: bool = False


@dataclass(frozen=True)
class StrategyOutcome:
    """Result of one strategy run over all users.

    ``estimates`` holds the reconstructed channel matrices (empty for
    method 3, which never forms a BS-side channel estimate) and
    ``diagnostics`` the residual-norm history of every solver call.
    """

    estimates: tuple[np.ndarray, ...]
    pairs: tuple[BeamformerPair, ...]
    gain: float
    per_user_gain: tuple[float, ...]
    diagnostics: tuple[tuple[float, ...], ...]


def _phase_normalize(v: np.ndarray) -> np.ndarray:
    """Rotate so the first significant entry is real positive."""
    mags = np.abs(v)
    j = int(np.flatnonzero(mags > 1e-12 * mags.max())[0])
    return v * (v[j].conjugate() / mags[j])


def _canonical(n: int) -> np.ndarray:
    e = np.zeros(n, dtype=complex)
    e[0] = 1.0
    return e


def dominant_singular_pair(h_hat: np.ndarray) -> BeamformerPair:
    """Leading left/right singular vectors of a channel estimate.

    A zero estimate yields canonical basis vectors flagged degenerate.
    The phase of each vector is normalized (first significant entry real
    positive); the gain |w^H H f|^2 is invariant to this choice.
    """
    h = np.asarray(h_hat, dtype=complex)
    if not np.any(h):
        return BeamformerPair(_canonical(h.shape[0]), _canonical(h.shape[1]), degenerate=True)
    u_mat, _, vh = np.linalg.svd(h)
    return BeamformerPair(_phase_normalize(u_mat[:, 0]), _phase_normalize(vh[0].conj()))


def beamforming_gain(
    true_channels: list[np.ndarray], pairs: list[BeamformerPair]
) -> tuple[float, tuple[float, ...]]:
    """Average of |w_i^H H_i f_i|^2 over users, with the per-user values."""
    if len(true_channels) != len(pairs):
        raise ValueError("one beamformer pair per channel required")
    per_user = tuple(
        float(np.abs(p.bs_weight.conj() @ h @ p.ue_weight) ** 2)
        for h, p in zip(true_channels, pairs)
    )
    return float(np.mean(per_user)), per_user


def perfect_csi_gain(true_channels: list[np.ndarray]) -> tuple[float, tuple[float, ...]]:
    """Upper bound: mean largest squared singular value of the true channels."""
    per_user = tuple(float(np.linalg.svd(h, compute_uv=False)[0] ** 2) for h in true_channels)
    return float(np.mean(per_user)), per_user


@lru_cache(maxsize=64)
def _dictionaries(n_bs: int, n_ue: int, oversampling: int) -> tuple[np.ndarray, np.ndarray]:
    f_bs = fourier_dictionary(n_bs, oversampling)
    f_ue = fourier_dictionary(n_ue, oversampling)
    f_bs.setflags(write=False)
    f_ue.setflags(write=False)
    return f_bs, f_ue


@lru_cache(maxsize=64)
def _stacked_blocks(P: int, Q: int, b: int, n_segments: int) -> BlockCollection:
    parts = [valid_blocks(P, Q, b, segment_offset=i * P * Q) for i in range(n_segments)]
    return concat_collections(parts)


@lru_cache(maxsize=64)
def _stacked_blocks_1d(P: int, b: int, n_segments: int) -> BlockCollection:
    parts = [valid_blocks_1d(P, b, segment_offset=i * P) for i in range(n_segments)]
    return concat_collections(parts)


def _solve(
    ensemble: MeasurementEnsemble,
    collection: BlockCollection,
    solver: str,
    config: SolverConfig,
    n_blocks: int,
    segments: tuple[tuple[int, int], ...] | None,
    tau_policy: str,
) -> SolverResult:
    """Dispatch one solve, granting OMP an equal coefficient budget."""
    if solver not in SOLVERS:
        raise ValueError(f"unknown solver {solver!r}, expected one of {SOLVERS}")
    if tau_policy == "config":
        tau = config.tau
    elif tau_policy == "noise":
        tau = default_tau(ensemble.noise_variance, ensemble.sensing)
    else:
        raise ValueError(f"unknown tau policy {tau_policy!r}")
    if solver == "gbomp":
        cfg = replace(config, max_blocks=n_blocks, tau=tau, one_block_per_segment=segments)
        return gbomp(ensemble.observations, ensemble.sensing, collection, cfg)
    block_area = collection.index_array.shape[1]
    cfg = replace(config, max_blocks=n_blocks * block_area, tau=tau, one_block_per_segment=None)
    return omp(ensemble.observations, ensemble.sensing, cfg)


def run_method1(
    channels: list[np.ndarray],
    bs: ArrayGeometry,
    ue: ArrayGeometry,
    m: int,
    solver_config: SolverConfig,
    noise_variance: float,
    rng: np.random.Generator,
    *,
    solver: str = "gbomp",
    oversampling: int = 2,
    block_size: int = 2,
    tau_policy: str = "config",
    training: list[TrainingSet] | None = None,
) -> StrategyOutcome:
    """Each UE recovers its own channel from downlink pilots.

    The BS pilot beams are shared by all users (one broadcast per
    measurement); each UE combines with its own beams.  The per-user
    block budget is ``solver_config.max_blocks``.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    n_b, n_u = bs.n_antennas, ue.n_antennas
    p_dim, q_dim = oversampling * n_b, oversampling * n_u
    f_bs, f_ue = _dictionaries(n_b, n_u, oversampling)
    collection = valid_blocks(p_dim, q_dim, block_size)

    if training is None:
        shared_bs = bernoulli_beams(m, n_b, rng)
        pilot = np.ones((m, 1))
        training = [
            TrainingSet(shared_bs, bernoulli_beams(m, n_u, rng), pilot) for _ in channels
        ]
    if len(training) != len(channels):
        raise ValueError("one training set per channel required")

    estimates, pairs, diagnostics = [], [], []
    for h, ts in zip(channels, training):
        ensemble = method1_measurements(h, f_bs, f_ue, ts, noise_variance, rng)
        result = _solve(ensemble, collection, solver, solver_config,
                        solver_config.max_blocks, None, tau_policy)
        hw_hat = unvec(result.estimate, p_dim, q_dim)
        h_hat = f_bs @ hw_hat @ f_ue.conj().T
        estimates.append(h_hat)
        pairs.append(dominant_singular_pair(h_hat))
        diagnostics.append(result.residual_norms)
    gain, per_user = beamforming_gain(channels, pairs)
    return StrategyOutcome(tuple(estimates), tuple(pairs), gain, per_user, tuple(diagnostics))


def run_method2(
    channels: list[np.ndarray],
    bs: ArrayGeometry,
    ue: ArrayGeometry,
    m: int,
    solver_config: SolverConfig,
    noise_variance: float,
    rng: np.random.Generator,
    *,
    solver: str = "gbomp",
    oversampling: int = 2,
    block_size: int = 2,
    tau_policy: str = "config",
    training: TrainingSet | None = None,
) -> StrategyOutcome:
    """The BS jointly recovers all users' channels from uplink pilots.

    One solve over the stacked spectral vector with a block budget of
    L * ``solver_config.max_blocks``; candidate blocks live on each
    user's own torus (blocks never straddle two users' segments).
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    n_users = len(channels)
    n_b, n_u = bs.n_antennas, ue.n_antennas
    p_dim, q_dim = oversampling * n_b, oversampling * n_u
    f_bs, f_ue = _dictionaries(n_b, n_u, oversampling)
    collection = _stacked_blocks(p_dim, q_dim, block_size, n_users)

    if training is None:
        training = method2_training(m, n_b, n_u, n_users, rng)
    ensemble = method2_measurements(channels, f_bs, f_ue, training, noise_variance, rng)
    result = _solve(ensemble, collection, solver, solver_config,
                    n_users * solver_config.max_blocks, None, tau_policy)

    seg_len = p_dim * q_dim
    estimates, pairs = [], []
    for i in range(n_users):
        hw_hat = unvec(result.estimate[i * seg_len:(i + 1) * seg_len], p_dim, q_dim)
        h_hat = f_bs @ hw_hat @ f_ue.conj().T
        estimates.append(h_hat)
        pairs.append(dominant_singular_pair(h_hat))
    gain, per_user = beamforming_gain(channels, pairs)
    return StrategyOutcome(tuple(estimates), tuple(pairs), gain, per_user,
                           (result.residual_norms,))


def run_method3(
    channels: list[np.ndarray],
    bs: ArrayGeometry,
    ue: ArrayGeometry,
    m1: int,
    m2: int,
    solver_config: SolverConfig,
    noise_variance: float,
    rng: np.random.Generator,
    *,
    solver: str = "gbomp",
    oversampling: int = 2,
    block_size: int = 2,
    block_size_1d: int = 4,
    tau_policy: str = "config",
) -> StrategyOutcome:
    """Two-stage scheme: UE-side estimation, then BS-side weight recovery.

    Phase 1 runs method 1 with ``m1`` pilots and keeps only each UE's
    weight.  In phase 2 the UEs transmit ``m2`` pilots through those
    weights; the BS solves a 1-D block-sparse problem (one block per
    user segment) and takes its weight for user i as the normalized
    synthesis of that user's recovered spectrum.  No feedback and no full
    BS-side channel estimate are involved; ``estimates`` is empty.
    """
    if m1 < 1 or m2 < 1:
        raise ValueError("both phase budgets m1 and m2 must be >= 1")
    n_users = len(channels)
    n_b = bs.n_antennas
    p_dim = oversampling * n_b
    f_bs, _ = _dictionaries(n_b, ue.n_antennas, oversampling)

    phase1 = run_method1(
        channels, bs, ue, m1, solver_config, noise_variance, rng,
        solver=solver, oversampling=oversampling, block_size=block_size,
        tau_policy=tau_policy,
    )
    ue_weights = [p.ue_weight for p in phase1.pairs]

    training = method3_phase2_training(m2, n_b, n_users, rng)
    ensemble = method3_phase2_measurements(
        channels, ue_weights, f_bs, training, noise_variance, rng)
    collection = _stacked_blocks_1d(p_dim, block_size_1d, n_users)
    segments = collection.segments if solver == "gbomp" else None
    result = _solve(ensemble, collection, solver, solver_config,
                    n_users, segments, tau_policy)

    pairs = []
    for i in range(n_users):
        c_hat = result.estimate[i * p_dim:(i + 1) * p_dim]
        if not np.any(c_hat):
            pairs.append(BeamformerPair(_canonical(n_b), ue_weights[i], degenerate=True))
            continue
        w = f_bs @ c_hat
        pairs.append(BeamformerPair(w / np.linalg.norm(w), ue_weights[i]))
    gain, per_user = beamforming_gain(channels, pairs)
    return StrategyOutcome((), tuple(pairs), gain, per_user,
                           phase1.diagnostics + (result.residual_norms,))
