"""Training beams, pilot symbols and measurement synthesis.

Beamformer entries are i.i.d. +-1 (scaled to unit norm) and pilot symbols
are i.i.d. +-1, so every training quantity is binary.  Measurement rows
have Kronecker structure; the sensing matrices (measurement rows times
the Fourier dictionary) are assembled through the Kronecker mixed-product
identity, e.g. (v^T kron u^H)(conj(F_ue) kron F_bs) =
(v^T conj(F_ue)) kron (u^H F_bs), which avoids ever forming the full
vectorized dictionary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "TrainingSet",
    "MeasurementEnsemble",
    "bernoulli_beam",
    "bernoulli_beams",
    "bernoulli_symbols",
    "method1_training",
    "method2_training",
    "method3_phase2_training",
    "method1_measurements",
    "method2_measurements",
    "method3_phase2_measurements",
]


@dataclass(frozen=True)
class TrainingSet:
    """Per-measurement beams and pilot symbols.

    ``bs_beams`` is (M, N_b) and ``ue_beams`` (M, N_u), one unit-norm beam
    per row; ``symbols`` is (M, L) with entries +-1 (all ones when the BS
    transmits a constant pilot).  ``ue_beams`` is None for the uplink
    phase in which UEs transmit through their estimated weights instead
    of training beams.
    """

    bs_beams: np.ndarray
    ue_beams: np.ndarray | None
    symbols: np.ndarray

    @property
    def n_measurements(self) -> int:
        return self.bs_beams.shape[0]


@dataclass(frozen=True)
class MeasurementEnsemble:
    """A sensing matrix paired with its noisy observations."""

    sensing: np.ndarray  # (M, N_dict) complex
    observations: np.ndarray  # (M,) complex
    noise_variance: float


def bernoulli_beam(n: int, rng: np.random.Generator) -> np.ndarray:
    """One unit-norm beam with entries +-1/sqrt(n), equally likely."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return (2.0 * rng.integers(0, 2, size=n) - 1.0) / np.sqrt(n)


def bernoulli_beams(m: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """(m, n) matrix of unit-norm +-1/sqrt(n) beams, one per row."""
    return (2.0 * rng.integers(0, 2, size=(m, n)) - 1.0) / np.sqrt(n)


def bernoulli_symbols(m: int, n_users: int, rng: np.random.Generator) -> np.ndarray:
    """(m, n_users) matrix of +-1 pilot symbols."""
    return 2.0 * rng.integers(0, 2, size=(m, n_users)) - 1.0


def method1_training(m: int, n_bs: int, n_ue: int, rng: np.random.Generator) -> TrainingSet:
    """Downlink training for one UE: BS beams, UE beams, constant pilot."""
    bs = bernoulli_beams(m, n_bs, rng)
    ue = bernoulli_beams(m, n_ue, rng)
    return TrainingSet(bs, ue, np.ones((m, 1)))


def method2_training(
    m: int, n_bs: int, n_ue: int, n_users: int, rng: np.random.Generator
) -> TrainingSet:
    """Uplink training: shared UE beam per measurement, per-user symbols."""
    bs = bernoulli_beams(m, n_bs, rng)
    ue = bernoulli_beams(m, n_ue, rng)
    symbols = bernoulli_symbols(m, n_users, rng)
    return TrainingSet(bs, ue, symbols)


def method3_phase2_training(
    m: int, n_bs: int, n_users: int, rng: np.random.Generator
) -> TrainingSet:
    """Uplink training with UEs precoding through their estimated weights."""
    bs = bernoulli_beams(m, n_bs, rng)
    symbols = bernoulli_symbols(m, n_users, rng)
    return TrainingSet(bs, None, symbols)


def _complex_noise(m: int, variance: float, rng: np.random.Generator) -> np.ndarray:
    # circular: real and imaginary parts i.i.d. with variance sigma^2/2
    draw = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    return np.sqrt(variance / 2.0) * draw


def method1_measurements(
    channel: np.ndarray,
    f_bs: np.ndarray,
    f_ue: np.ndarray,
    training: TrainingSet,
    noise_variance: float,
    rng: np.random.Generator,
) -> MeasurementEnsemble:
    """Downlink per-UE measurements z_m = u_m^H H v_m + n_m.

    The sensing matrix equals A @ Psi where row m of A is
    v_m^T kron u_m^H and Psi = conj(F_ue) kron F_bs.
    """
    n_b, n_u = channel.shape
    if training.bs_beams.shape[1] != n_b or training.ue_beams.shape[1] != n_u:
        raise ValueError("training beam dimensions do not match the channel")
    if f_bs.shape[0] != n_b or f_ue.shape[0] != n_u:
        raise ValueError("dictionary dimensions do not match the channel")
    m = training.n_measurements

    u = training.bs_beams
    v = training.ue_beams
    clean = np.einsum("mb,bu,mu->m", u.conj(), channel, v, optimize=True)
    z = clean + _complex_noise(m, noise_variance, rng)

    g_b = u.conj() @ f_bs          # rows u^H F_bs, (M, P)
    g_u = v @ f_ue.conj()          # rows v^T conj(F_ue), (M, Q)
    sensing = np.einsum("mq,mp->mqp", g_u, g_b).reshape(m, -1)
    return MeasurementEnsemble(sensing, z, noise_variance)


def method2_measurements(
    channels: list[np.ndarray],
    f_bs: np.ndarray,
    f_ue: np.ndarray,
    training: TrainingSet,
    noise_variance: float,
    rng: np.random.Generator,
) -> MeasurementEnsemble:
    """Joint uplink measurements y_m = sum_i x_im w_bm^H H_i w_um + n_m.

    The sensing matrix equals B @ Phi where row m of B is
    x_m^T kron w_um^T kron w_bm^H and Phi = I_L kron conj(F_ue) kron F_bs;
    the unknown is the stacked per-user spectral vector.
    """
    if not channels:
        raise ValueError("at least one channel required")
    n_b, n_u = channels[0].shape
    if any(h.shape != (n_b, n_u) for h in channels):
        raise ValueError("all channels must share the same dimensions")
    if training.symbols.shape[1] != len(channels):
        raise ValueError("symbol columns must match the number of users")
    if training.bs_beams.shape[1] != n_b or training.ue_beams.shape[1] != n_u:
        raise ValueError("training beam dimensions do not match the channels")
    m = training.n_measurements

    w_b = training.bs_beams
    w_u = training.ue_beams
    x = training.symbols
    h_stack = np.asarray(channels)
    clean = np.einsum("mb,ibu,mu,mi->m", w_b.conj(), h_stack, w_u, x, optimize=True)
    y = clean + _complex_noise(m, noise_variance, rng)

    g_b = w_b.conj() @ f_bs
    g_u = w_u @ f_ue.conj()
    sensing = np.einsum("ml,mq,mp->mlqp", x, g_u, g_b).reshape(m, -1)
    return MeasurementEnsemble(sensing, y, noise_variance)


def method3_phase2_measurements(
    channels: list[np.ndarray],
    ue_weights: list[np.ndarray],
    f_bs: np.ndarray,
    training: TrainingSet,
    noise_variance: float,
    rng: np.random.Generator,
) -> MeasurementEnsemble:
    """Uplink measurements y_m = w_bm^H sum_i H_i uhat_i x_im + n_m.

    Observations are computed from the full channels, so energy on the
    weaker paths shows up as model mismatch exactly as it would over the
    air.  The sensing matrix equals D @ Gamma with row m of D equal to
    x_m^T kron w_bm^H and Gamma = I_L kron F_bs.
    """
    if len(channels) != len(ue_weights):
        raise ValueError("one UE weight per channel required")
    n_b = channels[0].shape[0]
    if training.bs_beams.shape[1] != n_b or f_bs.shape[0] != n_b:
        raise ValueError("BS dimensions do not match the channels")
    if training.symbols.shape[1] != len(channels):
        raise ValueError("symbol columns must match the number of users")
    for h, w in zip(channels, ue_weights):
        if h.shape[1] != len(w):
            raise ValueError("UE weight length does not match the channel")
    m = training.n_measurements

    w_b = training.bs_beams
    x = training.symbols
    effective = np.asarray([h @ w for h, w in zip(channels, ue_weights)])  # (L, N_b)
    clean = np.einsum("mb,ib,mi->m", w_b.conj(), effective, x, optimize=True)
    y = clean + _complex_noise(m, noise_variance, rng)

    g_b = w_b.conj() @ f_bs
    sensing = np.einsum("ml,mp->mlp", x, g_b).reshape(m, -1)
    return MeasurementEnsemble(sensing, y, noise_variance)
