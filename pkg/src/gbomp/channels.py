"""mm-wave channel generation and Fourier dictionaries.

Two generators are provided: a physical multipath model (random gains and
angles, arbitrary spatial frequencies) and a grid model that draws the
frequency-domain matrix directly as an exactly block-sparse P x Q matrix
on the oversampled Fourier grid.  Column-major vectorization is used
throughout, so ``vec(F_bs @ X @ F_ue^H) = (conj(F_ue) kron F_bs) @ vec(X)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ArrayGeometry",
    "MultipathChannel",
    "SpectralChannel",
    "ula_response",
    "fourier_dictionary",
    "vec_dictionary",
    "physical_channel",
    "grid_channel",
    "vec",
    "unvec",
]


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear array: element count and spacing in wavelengths."""

    n_antennas: int
    spacing_ratio: float = 0.5

    def __post_init__(self):
        if self.n_antennas < 1:
            raise ValueError("n_antennas must be >= 1")
        if self.spacing_ratio <= 0:
            raise ValueError("spacing_ratio must be positive")


@dataclass(frozen=True)
class MultipathChannel:
    """Path parameters behind one BS-UE link.

    ``gains`` are the complex path amplitudes, ``omega_bs``/``omega_ue``
    the spatial frequencies (radians per element, in (-pi, pi]) seen by
    the BS and UE arrays.
    """

    gains: np.ndarray
    omega_bs: np.ndarray
    omega_ue: np.ndarray

    def __post_init__(self):
        if not (len(self.gains) == len(self.omega_bs) == len(self.omega_ue)):
            raise ValueError("per-path arrays must have equal length")
        if self.n_paths < 1:
            raise ValueError("at least one path required")

    @property
    def n_paths(self) -> int:
        return len(self.gains)


@dataclass(frozen=True)
class SpectralChannel:
    """Frequency-domain channel on the oversampled P x Q grid."""

    entries: np.ndarray  # complex, P x Q
    oversampling: int
    block_size: int
    anchors: tuple[tuple[int, int], ...] = ()  # 1-based block anchors, if grid-generated

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


def ula_response(geometry: ArrayGeometry, omega: float) -> np.ndarray:
    """Unit-norm ULA response at spatial frequency ``omega`` (radians)."""
    n = geometry.n_antennas
    return np.exp(1j * omega * np.arange(n)) / np.sqrt(n)


def spatial_frequency(geometry: ArrayGeometry, phi: np.ndarray) -> np.ndarray:
    """Map physical angles (radians) to spatial frequencies in (-pi, pi]."""
    omega = 2.0 * np.pi * geometry.spacing_ratio * np.sin(phi)
    # wrap boundary values (e.g. exactly -pi) into the canonical interval
    return np.pi - np.mod(np.pi - omega, 2.0 * np.pi)


def fourier_dictionary(n: int, oversampling: int = 1) -> np.ndarray:
    """n x (oversampling*n) matrix of ULA responses on the uniform frequency grid.

    Column q responds to frequency 2*pi*q / (oversampling*n); every column
    has unit norm and for ``oversampling == 1`` the matrix is the unitary
    DFT.
    """
    if n < 1 or oversampling < 1:
        raise ValueError("n and oversampling must be >= 1")
    m = np.arange(n)[:, None]
    q = np.arange(oversampling * n)[None, :]
    return np.exp(2j * np.pi * m * q / (oversampling * n)) / np.sqrt(n)


def vec_dictionary(f_ue: np.ndarray, f_bs: np.ndarray) -> np.ndarray:
    """Kronecker dictionary conj(F_ue) kron F_bs for the vectorized channel.

    Satisfies vec(F_bs @ X @ F_ue^H) = vec_dictionary(F_ue, F_bs) @ vec(X)
    with column-major ``vec``.
    """
    return np.kron(f_ue.conj(), f_bs)


def vec(a: np.ndarray) -> np.ndarray:
    """Column-major vectorization."""
    return a.ravel(order="F")


def unvec(v: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec`."""
    return v.reshape((rows, cols), order="F")


def physical_channel(
    bs: ArrayGeometry,
    ue: ArrayGeometry,
    k_paths: int,
    gain_variance: float = 1.0,
    angle_range: tuple[float, float] = (-np.pi / 2, np.pi / 2),
    rng: np.random.Generator | None = None,
) -> tuple[MultipathChannel, np.ndarray]:
    """Draw a multipath channel and return (paths, N_b x N_u channel matrix).

    Gains are i.i.d. circular complex Gaussian with the given variance;
    departure/arrival angles are uniform on ``angle_range``.  The matrix is
    sqrt(N_u*N_b/K) * sum_k gain_k * a_bs(k) a_ue(k)^H, so its expected
    squared Frobenius norm is N_u*N_b*gain_variance.
    """
    if k_paths < 1:
        raise ValueError("k_paths must be >= 1")
    if gain_variance <= 0:
        raise ValueError("gain_variance must be positive")
    rng = np.random.default_rng() if rng is None else rng

    scale = np.sqrt(gain_variance / 2.0)
    gains = scale * (rng.standard_normal(k_paths) + 1j * rng.standard_normal(k_paths))
    phi_bs = rng.uniform(angle_range[0], angle_range[1], size=k_paths)
    phi_ue = rng.uniform(angle_range[0], angle_range[1], size=k_paths)
    omega_bs = spatial_frequency(bs, phi_bs)
    omega_ue = spatial_frequency(ue, phi_ue)

    n_b, n_u = bs.n_antennas, ue.n_antennas
    h = np.zeros((n_b, n_u), dtype=complex)
    for g, wb, wu in zip(gains, omega_bs, omega_ue):
        h += g * np.outer(ula_response(bs, wb), ula_response(ue, wu).conj())
    h *= np.sqrt(n_u * n_b / k_paths)
    return MultipathChannel(gains, omega_bs, omega_ue), h


def grid_channel(
    bs: ArrayGeometry,
    ue: ArrayGeometry,
    k_blocks: int,
    block_size: int = 2,
    oversampling: int = 2,
    rng: np.random.Generator | None = None,
) -> tuple[SpectralChannel, np.ndarray]:
    """Draw an exactly block-sparse spectral channel and synthesize H.

    ``k_blocks`` anchors are placed uniformly at random on the P x Q torus
    (P = oversampling*N_b, Q = oversampling*N_u); each block holds i.i.d.
    circular Gaussian entries, overlapping blocks summing.  Both the
    spectral matrix and H = F_bs @ Hw @ F_ue^H are rescaled so that
    ||H||_F^2 equals N_u*N_b exactly, which keeps the per-measurement SNR
    convention identical to :func:`physical_channel`.
    """
    if k_blocks < 1:
        raise ValueError("k_blocks must be >= 1")
    if oversampling < 1:
        raise ValueError("oversampling must be >= 1")
    n_b, n_u = bs.n_antennas, ue.n_antennas
    p_dim, q_dim = oversampling * n_b, oversampling * n_u
    if block_size > min(p_dim, q_dim):
        raise ValueError(f"block_size {block_size} exceeds min grid dimension "
                         f"{min(p_dim, q_dim)}")
    rng = np.random.default_rng() if rng is None else rng

    p_anchor = rng.integers(0, p_dim, size=k_blocks)
    q_anchor = rng.integers(0, q_dim, size=k_blocks)
    vals = (rng.standard_normal((k_blocks, block_size, block_size))
            + 1j * rng.standard_normal((k_blocks, block_size, block_size))) / np.sqrt(2.0)

    hw = np.zeros((p_dim, q_dim), dtype=complex)
    for k in range(k_blocks):
        rows = (p_anchor[k] + np.arange(block_size)) % p_dim
        cols = (q_anchor[k] + np.arange(block_size)) % q_dim
        hw[np.ix_(rows, cols)] += vals[k]

    f_bs = fourier_dictionary(n_b, oversampling)
    f_ue = fourier_dictionary(n_u, oversampling)
    h = f_bs @ hw @ f_ue.conj().T
    scale = np.sqrt(n_u * n_b) / np.linalg.norm(h)
    h *= scale
    hw *= scale

    anchors = tuple((int(p) + 1, int(q) + 1) for p, q in zip(p_anchor, q_anchor))
    return SpectralChannel(hw, oversampling, block_size, anchors), h
