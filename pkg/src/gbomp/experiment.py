"""Seeded Monte Carlo sweeps over SNR and training budget.

Every (method, solver, snr, M, trial) cell regenerates its channels,
training and noise from a per-trial random stream derived as
``SeedSequence([master_seed, trial])``.  Channels are drawn first, so all
cells of a trial share the same channel realizations: method and solver
comparisons are paired and SNR/M curves use common random numbers.  The
emitted CSV files are byte-deterministic for a given (config, seed); the
wall-clock runtime column is therefore written as -1 unless ``timing`` is
enabled, while measured runtimes are always kept on the in-memory rows.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .channels import ArrayGeometry, fourier_dictionary, grid_channel, physical_channel
from .solver import NOISELESS_TAU, SolverConfig
from .strategies import perfect_csi_gain, run_method1, run_method2, run_method3

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ResultRow",
    "AggregateRow",
    "run_sweep",
    "write_trials_csv",
    "write_aggregate_csv",
    "spectral_magnitude_dump",
]

METHODS = ("method1", "method2", "method3")
SOLVERS = ("gbomp", "omp")
TAU_POLICIES = ("floor", "noise")
GENERATORS = ("grid", "physical")


class ConfigError(ValueError):
    """Raised when an experiment configuration is inconsistent."""


@dataclass(frozen=True)
class ExperimentConfig:
    """All knobs of one simulation study; defaults match the reference setup
    (32x16 arrays, 4 users, 2 paths, budget 225 split 125/100)."""

    n_bs: int = 32
    n_ue: int = 16
    n_users: int = 4
    n_paths: int = 2
    k_max: int = 3
    block_size: int = 2
    block_size_1d: int = 4
    oversampling: int = 2
    d_over_lambda: float = 0.5
    m: int = 225
    m1: int = 125
    m1_fraction: float = 2.0 / 3.0
    m_list: tuple[int, ...] = (75, 150, 225, 300)
    snr_db_list: tuple[float, ...] = (-20.0, -15.0, -10.0, -5.0, 0.0)
    m_sweep_snr_db: float = -10.0
    n_trials: int = 200
    master_seed: int = 1234
    generator: str = "grid"
    gain_variance: float = 1.0
    methods: tuple[str, ...] = METHODS
    solvers: tuple[str, ...] = SOLVERS
    tau_policy: str = "floor"
    timing: bool = False
    output_path: str = "results"

    def validate(self) -> None:
        errs = []
        for name in ("n_bs", "n_ue", "n_users", "n_paths", "k_max", "block_size",
                     "block_size_1d", "oversampling", "m", "m1", "n_trials"):
            if int(getattr(self, name)) < 1:
                errs.append(f"{name} must be >= 1")
        if self.d_over_lambda <= 0:
            errs.append("d_over_lambda must be positive")
        if self.gain_variance <= 0:
            errs.append("gain_variance must be positive")
        if not 0.0 < self.m1_fraction < 1.0:
            errs.append("m1_fraction must lie in (0, 1)")
        if self.m1 >= self.m and "method3" in self.methods:
            errs.append("m1 must be smaller than m so that m2 = m - m1 >= 1")
        if self.block_size > min(self.oversampling * self.n_bs,
                                 self.oversampling * self.n_ue):
            errs.append("block_size exceeds the spectral grid")
        if self.block_size_1d > self.oversampling * self.n_bs:
            errs.append("block_size_1d exceeds the BS spectral grid")
        if self.master_seed < 0:
            errs.append("master_seed must be a non-negative integer")
        if not self.m_list or any(int(v) < 1 for v in self.m_list):
            errs.append("m_list entries must be >= 1")
        if not self.snr_db_list:
            errs.append("snr_db_list must not be empty")
        if self.generator not in GENERATORS:
            errs.append(f"generator must be one of {GENERATORS}")
        if self.tau_policy not in TAU_POLICIES:
            errs.append(f"tau_policy must be one of {TAU_POLICIES}")
        bad = [m for m in self.methods if m not in METHODS]
        if bad or not self.methods:
            errs.append(f"methods must be a non-empty subset of {METHODS}")
        bad = [s for s in self.solvers if s not in SOLVERS]
        if bad or not self.solvers:
            errs.append(f"solvers must be a non-empty subset of {SOLVERS}")
        if errs:
            raise ConfigError("invalid config: " + "; ".join(errs))

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        with open(path) as f:
            data = json.load(f)
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config fields: {', '.join(unknown)}")
        for key in ("m_list", "snr_db_list", "methods", "solvers"):
            if key in data:
                data[key] = tuple(data[key])
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ResultRow:
    """One (method, solver, snr, M, trial) cell."""

    method: str
    solver: str
    snr_db: float
    m: int
    trial: int
    gamma: float
    gamma_db: float
    per_user_gains: tuple[float, ...]
    per_user_bounds: tuple[float, ...]  # per-user perfect-CSI gains of the true channels
    runtime_ms: float
    seed: int


@dataclass(frozen=True)
class AggregateRow:
    """Trial summary of one cell; the mean is taken in the linear domain."""

    method: str
    solver: str
    snr_db: float
    m: int
    mean_gamma_db: float
    std_gamma_db: float
    n_trials: int


def _gamma_db(gamma: float) -> float:
    return 10.0 * math.log10(gamma) if gamma > 0 else float("-inf")


def _draw_channels(config: ExperimentConfig, rng: np.random.Generator) -> list[np.ndarray]:
    bs = ArrayGeometry(config.n_bs, config.d_over_lambda)
    ue = ArrayGeometry(config.n_ue, config.d_over_lambda)
    channels = []
    for _ in range(config.n_users):
        if config.generator == "grid":
            _, h = grid_channel(bs, ue, config.n_paths, config.block_size,
                                config.oversampling, rng)
        else:
            _, h = physical_channel(bs, ue, config.n_paths, config.gain_variance, rng=rng)
        channels.append(h)
    return channels


def run_cell(
    config: ExperimentConfig,
    method: str,
    solver: str,
    snr_db: float,
    m: int,
    m1: int,
    trial: int,
) -> ResultRow:
    """Run one fully seeded pipeline cell and score it."""
    seed_seq = np.random.SeedSequence([config.master_seed, trial])
    seed_val = int(seed_seq.generate_state(1, np.uint64)[0])
    rng = np.random.default_rng(seed_seq)
    noise_var = 10.0 ** (-snr_db / 10.0)
    bs = ArrayGeometry(config.n_bs, config.d_over_lambda)
    ue = ArrayGeometry(config.n_ue, config.d_over_lambda)
    solver_config = SolverConfig(max_blocks=config.k_max, tau=NOISELESS_TAU)
    tau_policy = "noise" if config.tau_policy == "noise" else "config"
    opts = dict(solver=solver, oversampling=config.oversampling,
                block_size=config.block_size, tau_policy=tau_policy)

    start = time.perf_counter()
    channels = _draw_channels(config, rng)
    if method == "method1":
        outcome = run_method1(channels, bs, ue, m, solver_config, noise_var, rng, **opts)
    elif method == "method2":
        outcome = run_method2(channels, bs, ue, m, solver_config, noise_var, rng, **opts)
    elif method == "method3":
        outcome = run_method3(channels, bs, ue, m1, m - m1, solver_config, noise_var,
                              rng, block_size_1d=config.block_size_1d, **opts)
    else:
        raise ConfigError(f"unknown method {method!r}")
    runtime_ms = (time.perf_counter() - start) * 1e3

    _, bounds = perfect_csi_gain(channels)
    return ResultRow(
        method=method,
        solver=solver,
        snr_db=float(snr_db),
        m=int(m),
        trial=int(trial),
        gamma=outcome.gain,
        gamma_db=_gamma_db(outcome.gain),
        per_user_gains=outcome.per_user_gain,
        per_user_bounds=bounds,
        runtime_ms=runtime_ms,
        seed=seed_val,
    )


def _sweep_cells(config: ExperimentConfig, sweep: str) -> list[tuple[float, int, int]]:
    """(snr_db, m, m1) combinations of the requested sweep."""
    if sweep == "snr":
        return [(float(snr), config.m, config.m1) for snr in config.snr_db_list]
    if sweep == "m":
        cells = []
        for m in config.m_list:
            m1 = int(round(config.m1_fraction * m))
            m1 = min(max(m1, 1), m - 1)
            cells.append((float(config.m_sweep_snr_db), int(m), m1))
        return cells
    raise ConfigError(f"unknown sweep kind {sweep!r}, expected 'snr' or 'm'")


def _run_chunk(args: tuple) -> list[ResultRow]:
    config, method, solver, snr_db, m, m1, start, stop = args
    return [run_cell(config, method, solver, snr_db, m, m1, t) for t in range(start, stop)]


def run_sweep(
    config: ExperimentConfig,
    sweep: str = "snr",
    out_dir: str | Path | None = None,
    verbose: bool = False,
    workers: int | None = None,
) -> tuple[list[ResultRow], list[AggregateRow]]:
    """Run a full sweep; write trial and aggregate CSVs when ``out_dir`` is set.

    Cells are independent, so ``workers`` > 1 fans trials out over
    processes; every cell reseeds from (master_seed, trial), so the result
    does not depend on scheduling.  Rows come back sorted by
    (method, solver, snr_db, M, trial) and the output is deterministic
    for a given (config, master_seed).
    """
    config.validate()
    points = _sweep_cells(config, sweep)
    tasks = []
    chunk = max(1, config.n_trials // (4 * max(workers or 1, 1)))
    for method in config.methods:
        for solver in config.solvers:
            for snr_db, m, m1 in points:
                for start in range(0, config.n_trials, chunk):
                    stop = min(start + chunk, config.n_trials)
                    tasks.append((config, method, solver, snr_db, m, m1, start, stop))

    rows: list[ResultRow] = []
    if workers is not None and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_run_chunk, tasks):
                rows.extend(part)
    else:
        for task in tasks:
            rows.extend(_run_chunk(task))
    rows.sort(key=lambda r: (r.method, r.solver, r.snr_db, r.m, r.trial))

    if verbose:
        for a in aggregate_rows(rows):
            print(f"{a.method:8s} {a.solver:6s} snr={a.snr_db:+6.1f} dB  M={a.m:4d}  "
                  f"mean gamma = {a.mean_gamma_db:6.2f} dB")
    aggregates = aggregate_rows(rows)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_trials_csv(rows, out / f"{sweep}_sweep_trials.csv", timing=config.timing)
        write_aggregate_csv(aggregates, out / f"{sweep}_sweep_aggregate.csv")
    return rows, aggregates


def aggregate_rows(rows: list[ResultRow]) -> list[AggregateRow]:
    """Per-cell trial means (linear-domain mean, reported in dB)."""
    groups: dict[tuple, list[ResultRow]] = {}
    for r in rows:
        groups.setdefault((r.method, r.solver, r.snr_db, r.m), []).append(r)
    aggregates = []
    for (method, solver, snr_db, m), members in sorted(groups.items()):
        gammas = np.array([r.gamma for r in members])
        dbs = np.array([r.gamma_db for r in members])
        std_db = float(np.std(dbs, ddof=1)) if len(members) > 1 else 0.0
        aggregates.append(AggregateRow(
            method=method, solver=solver, snr_db=snr_db, m=m,
            mean_gamma_db=_gamma_db(float(gammas.mean())),
            std_gamma_db=std_db, n_trials=len(members),
        ))
    return aggregates


def write_trials_csv(rows: list[ResultRow], path: str | Path, timing: bool = False) -> None:
    """One row per trial cell; runtime_ms is -1 unless ``timing`` is set,
    keeping the file byte-deterministic for a given (config, seed)."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["method", "solver", "snr_db", "M", "trial",
                    "gamma", "gamma_db", "runtime_ms", "seed"])
        for r in rows:
            runtime = repr(round(r.runtime_ms, 3)) if timing else "-1"
            w.writerow([r.method, r.solver, repr(r.snr_db), r.m, r.trial,
                        repr(r.gamma), repr(r.gamma_db), runtime, r.seed])


def write_aggregate_csv(aggregates: list[AggregateRow], path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["method", "solver", "snr_db", "M",
                    "mean_gamma_db", "std_gamma_db", "n_trials"])
        for a in aggregates:
            w.writerow([a.method, a.solver, repr(a.snr_db), a.m,
                        repr(a.mean_gamma_db), repr(a.std_gamma_db), a.n_trials])


def spectral_magnitude_dump(channel: np.ndarray, grid: tuple[int, int, int]) -> np.ndarray:
    """Per-anchor block magnitudes of a channel's spectral analysis.

    ``grid`` is (P, Q, b) with P/N_b == Q/N_u an integer oversampling
    factor.  The channel is analyzed against the grid's Fourier
    dictionaries and entry (p, q) holds the sum of spectral magnitudes
    over the b x b toroidal block anchored there, i.e. the shading data
    of a block-sparsity plot.
    """
    h = np.asarray(channel, dtype=complex)
    n_b, n_u = h.shape
    p_dim, q_dim, b = grid
    if p_dim % n_b or q_dim % n_u or p_dim // n_b != q_dim // n_u:
        raise ValueError("grid must oversample both array dimensions equally")
    if not 1 <= b <= min(p_dim, q_dim):
        raise ValueError("block side out of range")
    rho = p_dim // n_b
    f_bs = fourier_dictionary(n_b, rho)
    f_ue = fourier_dictionary(n_u, rho)
    mag = np.abs(f_bs.conj().T @ h @ f_ue)
    out = np.zeros((p_dim, q_dim))
    for k1 in range(b):
        for k2 in range(b):
            out += np.roll(mag, (-k1, -k2), axis=(0, 1))
    return out
