"""Command-line front end.

    lrsinr <experiment> --config run.json [--seed N] [--trials N] [--threads N]
                        [--out PATH] [--format csv|json] [--plot]

Flags override the matching config keys. Without ``--out`` (and no
``output`` key) the table goes to stdout. Exit codes: 0 success, 2 invalid
input or regime, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from lrsinr import experiments as ex
from lrsinr.config import EXPERIMENTS, RunConfig, parse_config
from lrsinr.errors import NumericalError, RegimeError, ValidationError
from lrsinr.output import csv_text, json_text, write_csv, write_json
from lrsinr.scenario import build_covariance, covariance_from_eigenvalues

log = logging.getLogger("lrsinr")

EXIT_OK, EXIT_REGIME, EXIT_NUMERICAL = 0, 2, 3


def execute(cfg: RunConfig):
    """Run the configured experiment and return its result object."""
    sc = cfg.scenario
    mc = ex.McConfig(cfg.trials, cfg.seed, cfg.threads)
    exp = cfg.experiment
    if exp == "predict":
        return ex.predict(sc, cfg.theta_deg, cfg.c)
    if exp == "simulate":
        return ex.simulate(sc, cfg.theta_deg, cfg.K, mc)
    if exp == "sweep-k":
        return ex.sinr_loss_vs_k(sc, cfg.theta_deg, cfg.k_grid, mc)
    if exp == "sweep-theta":
        return ex.sinr_loss_vs_theta(sc, cfg.K, cfg.theta_grid, mc)
    if exp == "mse-qf":
        return ex.mse_structured_qf_sweep(sc, cfg.eigenvalues, cfg.c, cfg.m_grid, mc, cfg.jammer_index)
    if exp == "mse-sinr":
        return ex.mse_sinr_loss_sweep(sc, cfg.c, cfg.m_grid, cfg.theta_deg, mc)
    if exp == "eig-pdf":
        if cfg.eigenvalues is None:
            model = build_covariance(sc)
        elif cfg.multiplicity == "fixed" and len(cfg.eigenvalues) == sc.r + 1:
            model = covariance_from_eigenvalues(sc, cfg.eigenvalues)
        else:
            model = ex.population_spectrum(cfg.eigenvalues, sc.m, cfg.multiplicity)
        return ex.eigen_pdf_histogram(model, cfg.c, mc, cfg.bins)
    if exp == "separation":
        return ex.separation_sweep(sc, cfg.jnr_db_grid, cfg.c_grid)
    raise ValidationError("experiment", f"unknown experiment {exp!r}")


def emit(result, cfg: RunConfig, plot: bool = False, stdout=None) -> None:
    stdout = stdout or sys.stdout
    if cfg.output is None:
        if plot:
            raise ValidationError("output", "--plot needs an output path")
        stdout.write(csv_text(result) if cfg.format == "csv" else json_text(result))
        return
    path = Path(cfg.output)
    if cfg.format == "csv":
        write_csv(result, path)
    else:
        write_json(result, path)
    if plot and isinstance(result, ex.SweepResult):
        from lrsinr.plotting import render

        render(result, path.with_suffix(".png"), cfg.experiment)


def run(cfg: RunConfig, plot: bool = False, stdout=None) -> int:
    """Execute ``cfg`` and write its output; returns the process exit code."""
    try:
        result = execute(cfg)
        emit(result, cfg, plot=plot, stdout=stdout)
    except RegimeError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_REGIME
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lrsinr", description="Spiked-model SINR-loss experiments.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, type=Path, help="JSON run configuration")
        sp.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
        sp.add_argument("--trials", type=int)
        sp.add_argument("--threads", type=int, help="worker threads, 0 = one per CPU")
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json"))
        sp.add_argument("--plot", action="store_true", help="also render <out>.png")
    return p


def load(args: argparse.Namespace) -> RunConfig:
    text = args.config.read_text(encoding="utf-8")
    cfg = parse_config(text)
    if cfg.experiment != args.experiment:
        # the subcommand names the experiment; the config's key must agree
        raise ValidationError("experiment", f"config says {cfg.experiment!r}, command is {args.experiment!r}")
    overrides = {}
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ValidationError("seed", "must be an unsigned 64-bit integer")
        overrides["seed"] = args.seed
    if args.trials is not None:
        if args.trials < 1:
            raise ValidationError("trials", "must be >= 1")
        overrides["trials"] = args.trials
    if args.threads is not None:
        if args.threads < 0:
            raise ValidationError("threads", "must be >= 0")
        overrides["threads"] = args.threads
    if args.out is not None:
        overrides["output"] = args.out
    if args.format is not None:
        overrides["format"] = args.format
    return cfg.replace(**overrides)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load(args)
    except RegimeError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_REGIME
    return run(cfg, plot=args.plot)


if __name__ == "__main__":
    sys.exit(main())
