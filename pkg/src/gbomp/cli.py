"""Command-line harness for the simulation sweeps.

Subcommands:
    sweep-snr       gain-vs-SNR study at a fixed training budget
    sweep-m         gain-vs-budget study at a fixed SNR
    dump-spectrum   write the block-magnitude map of one random channel

All subcommands accept ``--config`` (JSON file whose keys mirror
ExperimentConfig) plus overrides for seed, trial count and output
directory.  Without a config file the reference parameter set is used.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .channels import ArrayGeometry, physical_channel
from .experiment import ConfigError, ExperimentConfig, run_sweep, spectral_magnitude_dump


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    config = ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig()
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.trials is not None:
        overrides["n_trials"] = args.trials
    if args.out is not None:
        overrides["output_path"] = args.out
    if getattr(args, "timing", False):
        overrides["timing"] = True
    return replace(config, **overrides) if overrides else config


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=str, default=None, help="JSON config file")
    p.add_argument("--seed", type=int, default=None, help="master seed override")
    p.add_argument("--out", type=str, default=None, help="output directory")
    p.add_argument("--trials", type=int, default=None, help="trials per cell override")


def _cmd_sweep(args: argparse.Namespace, sweep: str) -> int:
    config = _load_config(args)
    rows, aggregates = run_sweep(config, sweep=sweep, out_dir=config.output_path,
                                 verbose=not args.quiet, workers=args.workers)
    out = Path(config.output_path)
    print(f"wrote {len(rows)} trial rows to {out / (sweep + '_sweep_trials.csv')}")
    print(f"wrote {len(aggregates)} aggregate rows to "
          f"{out / (sweep + '_sweep_aggregate.csv')}")
    return 0


def _cmd_dump_spectrum(args: argparse.Namespace) -> int:
    config = _load_config(args)
    n_bs = args.bs_antennas or config.n_bs
    n_ue = args.ue_antennas or config.n_ue
    k = args.paths or config.n_paths
    rho = args.oversampling
    bs = ArrayGeometry(n_bs, config.d_over_lambda)
    ue = ArrayGeometry(n_ue, config.d_over_lambda)
    rng = np.random.default_rng(np.random.SeedSequence([config.master_seed, 0]))
    _, h = physical_channel(bs, ue, k, config.gain_variance, rng=rng)
    grid = (rho * n_bs, rho * n_ue, args.block_size or config.block_size)
    spectrum = spectral_magnitude_dump(h, grid)

    out = Path(config.output_path)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "spectrum.csv"
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        for row in spectrum:
            w.writerow([repr(float(v)) for v in row])
    print(f"wrote {grid[0]}x{grid[1]} magnitude map to {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gbomp",
        description="Block-sparse multi-user mm-wave channel estimation sweeps",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, kind in (("sweep-snr", "snr"), ("sweep-m", "m")):
        p = sub.add_parser(name, help=f"run the gain-vs-{kind.upper()} sweep")
        _add_common(p)
        p.add_argument("--timing", action="store_true",
                       help="write measured runtimes into the CSV "
                            "(breaks byte-for-byte reproducibility)")
        p.add_argument("--workers", type=int, default=None,
                       help="worker processes for trial cells (default: serial)")
        p.add_argument("--quiet", action="store_true", help="suppress progress lines")
        p.set_defaults(func=lambda a, k=kind: _cmd_sweep(a, k))

    p = sub.add_parser("dump-spectrum", help="write a block-magnitude map")
    _add_common(p)
    p.add_argument("--bs-antennas", type=int, default=None)
    p.add_argument("--ue-antennas", type=int, default=None)
    p.add_argument("--paths", type=int, default=None)
    p.add_argument("--oversampling", type=int, default=1,
                   help="analysis grid oversampling (1 = plain DFT)")
    p.add_argument("--block-size", type=int, default=None)
    p.set_defaults(func=_cmd_dump_spectrum)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
