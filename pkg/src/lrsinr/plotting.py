"""PNG rendering of sweep results (matplotlib, headless Agg backend)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from lrsinr import asymptotics as rmt  # noqa: E402
from lrsinr.experiments import SweepResult  # noqa: E402

CURVES = [
    ("mc_mean", "Monte-Carlo mean", dict(marker="o", ms=3, lw=1)),
    ("prediction_naive", "clairvoyant", dict(ls="--")),
    ("prediction_spiked", "spiked equivalent", dict(ls="-")),
    ("prediction_corrected", "spiked + noise leakage", dict(ls="-.")),
    ("prediction_gifo", "1 - r/K", dict(ls=":")),
]


def _loss_plot(ax, res: SweepResult, logx: bool):
    x = res.column(res.axis_name)
    for key, label, style in CURVES:
        if key in res.columns:
            ax.plot(x, res.column(key), label=label, **style)
    if logx:
        ax.set_xscale("log")
    ax.set_ylabel("SINR loss")
    brk = res.meta.get("performance_break_deg")
    if brk is not None and np.isfinite(brk):
        ax.axvline(brk, color="grey", lw=0.8)


def _mse_plot(ax, res: SweepResult):
    x = res.column("m")
    for key, label in (("mse_spiked", "vs spiked equivalent"), ("mse_corrected", "vs corrected"),
                       ("mse_naive", "vs clairvoyant limit")):
        ax.loglog(x, res.column(key), marker="o", label=label)
    ax.set_ylabel("MSE")


def _hist_plot(ax, res: SweepResult):
    left = res.column("bin_left")
    width = res.column("bin_right") - left
    ax.bar(left, res.column("density"), width=width, align="edge", alpha=0.6, label="SCM eigenvalues")
    meta = res.meta
    c, s2 = meta["c"], meta["sigma2"]
    grid = np.linspace(meta["mp_lambda_minus"], meta["mp_lambda_plus"], 400)
    ax.plot(grid, rmt.mp_pdf(grid / s2, c) / s2, "k", lw=1, label="Marcenko-Pastur")
    i = 1
    while f"tau_{i}" in meta:
        ax.axvline(meta[f"tau_{i}"], color="r", ls="--", lw=0.8)
        i += 1
    ax.set_ylabel("density")


def _separation_plot(ax, res: SweepResult):
    cs = sorted({row["c"] for row in res.rows})
    for c in cs:
        rows = [row for row in res.rows if row["c"] == c]
        ax.plot([r["jnr_db"] for r in rows], [r["margin"] for r in rows], label=f"c = {c:g}")
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_ylabel("separation margin")


def render(result: SweepResult, path, experiment: str) -> Path:
    """Draw ``result`` into a PNG at ``path``."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    try:
        if experiment == "eig-pdf":
            _hist_plot(ax, result)
        elif experiment in ("mse-qf", "mse-sinr"):
            _mse_plot(ax, result)
        elif experiment == "separation":
            _separation_plot(ax, result)
        else:
            _loss_plot(ax, result, logx=experiment == "sweep-k")
        ax.set_xlabel(result.axis_name)
        ax.grid(alpha=0.3)
        ax.legend(fontsize=8)
        fig.tight_layout()
        path = Path(path)
        fig.savefig(path, dpi=120)
    finally:
        plt.close(fig)
    return path
