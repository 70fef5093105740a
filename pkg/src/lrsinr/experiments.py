"""Monte-Carlo harness and parameter sweeps.

Every trial draws its own generator from ``trial_seed(master_seed, stream,
trial)``, a SeedSequence hash of the three integers. Trials run on a thread
pool, but results are gathered and reduced in trial-index order, so the
output does not depend on the worker count.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from lrsinr import asymptotics as rmt
from lrsinr import linalg
from lrsinr.errors import DegenerateSteering, InvalidArgument, InvalidRegime, SeparationViolated
from lrsinr.estimators import SinrLossReport
from lrsinr.scenario import (
    CovarianceModel,
    ScenarioConfig,
    build_covariance,
    covariance_from_eigenvalues,
    steering_matrix,
    steering_vector,
)

log = logging.getLogger(__name__)

PLATEAU_GRID_DEG = np.arange(-90.0, 90.0 + 1e-9, 0.5)


@dataclass(frozen=True)
class McConfig:
    trials: int = 1000
    master_seed: int = 0
    parallelism: int = 1

    def __post_init__(self):
        if int(self.trials) < 1:
            raise InvalidArgument("trials must be >= 1")
        if int(self.master_seed) < 0 or int(self.master_seed) >= 2**64:
            raise InvalidArgument("master_seed must be an unsigned 64-bit integer")
        if int(self.parallelism) < 0:
            raise InvalidArgument("parallelism must be >= 0")


@dataclass
class SweepResult:
    """Tabulated metric against one swept parameter.

    ``rows`` are dicts sharing the keys in ``columns``; a non-empty ``flag``
    entry marks a degenerate point. ``meta`` carries scalar annotations and
    ``raw`` optional bulk data that is not serialised.
    """

    axis_name: str
    columns: list
    rows: list
    meta: dict = field(default_factory=dict)
    raw: Optional[np.ndarray] = None

    @property
    def axis_values(self) -> list:
        return [row[self.axis_name] for row in self.rows]

    def column(self, name: str) -> np.ndarray:
        return np.array([row[name] for row in self.rows], dtype=float)

    @property
    def flagged(self) -> list:
        return [row for row in self.rows if row.get("flag")]


# ---------------------------------------------------------------------------
# Harness
# ---------------------------------------------------------------------------


def trial_seed(master_seed: int, stream: int, trial: int) -> int:
    """64-bit seed for one trial: SeedSequence entropy ``[master_seed, stream, trial]``."""
    ss = np.random.SeedSequence([int(master_seed), int(stream), int(trial)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _workers(parallelism: int) -> int:
    return os.cpu_count() or 1 if parallelism == 0 else parallelism


def run_trials(kernel: Callable[[int], np.ndarray], mc: McConfig, stream: int = 0) -> np.ndarray:
    """Run ``kernel(seed)`` for every trial; rows of the result follow trial order."""
    seeds = [trial_seed(mc.master_seed, stream, t) for t in range(mc.trials)]
    n = min(_workers(mc.parallelism), mc.trials)
    if n <= 1:
        out = [kernel(s) for s in seeds]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            out = list(pool.map(kernel, seeds))
    return np.asarray(out, dtype=float)


def mc_stats(samples: np.ndarray) -> tuple:
    """Mean and standard error (``std / sqrt(N)``, zero for one trial) along axis 0."""
    samples = np.asarray(samples, dtype=float)
    mean = samples.mean(axis=0)
    n = samples.shape[0]
    if n == 1:
        return mean, np.zeros_like(mean)
    return mean, samples.std(axis=0, ddof=1) / math.sqrt(n)


def _scm_eig(model: CovarianceModel, K: int, seed: int) -> linalg.HermitianEig:
    Y = linalg.complex_gauss_matrix(model.m, K, seed)
    X = model.sqrt_apply(Y)
    scm = (X @ X.conj().T) / K
    return linalg.hermitian_eig(scm)


def _lr_loss_batch(model: CovarianceModel, A: np.ndarray, Uhat: np.ndarray) -> np.ndarray:
    """Adaptive low-rank SINR loss for each column of ``A``."""
    P = A - Uhat @ (Uhat.conj().T @ A)
    num = np.einsum("ij,ij->j", A.conj(), P).real
    den = np.einsum("ij,ij->j", P.conj(), model.apply(P)).real
    ira = np.einsum("ij,ij->j", A.conj(), model.solve(A)).real
    return num**2 / (den * ira)


def _k_from_ratio(m: int, c: float, r: int) -> int:
    """``K = max(round(m / c), r + 1)``, used wherever a sweep fixes ``c``."""
    return max(int(round(m / c)), r + 1)


# ---------------------------------------------------------------------------
# Closed-form helpers shared by sweeps and the CLI
# ---------------------------------------------------------------------------


def true_lr_loss(model: CovarianceModel, a) -> float:
    """Clairvoyant low-rank SINR loss (true projector)."""
    a = np.asarray(a, dtype=np.complex128)
    return rmt.lr_sinr_loss_from_perp(model, a, a - model.basis @ (model.basis.conj().T @ a))


def _safe(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs), ""
    except DegenerateSteering:
        return math.nan, "degenerate_steering"
    except SeparationViolated:
        return math.nan, "separation_violated"


def predict(cfg: ScenarioConfig, theta_deg: float, c: float) -> SinrLossReport:
    """Closed-form predictions at aspect ratio ``c`` (``K = m / c``, possibly fractional)."""
    model = build_covariance(cfg)
    a = steering_vector(theta_deg, cfg.m, cfg.spacing_over_wavelength)
    flags = []
    try:
        full = rmt.predict_sinr_loss_fullrank(c)
    except InvalidRegime:
        full = None
        flags.append("fullrank_undefined_c_ge_1")
    K = cfg.m / c
    gifo = rmt.predict_gifo_baseline(cfg.r, K) if K > cfg.r else None
    spiked = rmt.predict_sinr_loss_lr(model, a, c)
    corrected = rmt.predict_sinr_loss_lr(model, a, c, corrected=True)
    rho_lr, flag = _safe(true_lr_loss, model, a)
    if flag:
        flags.append(flag)
    return SinrLossReport(
        rho_hat=None, rho_lr=None if flag else rho_lr, rho_hat_lr=None,
        pred_fullrank=full, pred_lr_spiked=spiked, pred_gifo=gifo,
        pred_lr_corrected=corrected, theta_deg=float(theta_deg), c=float(c), K=K,
        trials=None, flag=";".join(flags),
    )


def simulate(cfg: ScenarioConfig, theta_deg: float, K: int, mc: McConfig) -> SinrLossReport:
    """Monte-Carlo means of both adaptive SINR losses at one point, with predictions."""
    if K < cfg.r + 1:
        raise InvalidArgument(f"K must be >= r + 1 = {cfg.r + 1}")
    model = build_covariance(cfg)
    a = steering_vector(theta_deg, cfg.m, cfg.spacing_over_wavelength)
    c = cfg.m / K
    full_ok = K >= cfg.m + 2
    r = cfg.r
    ira = float(np.vdot(a, model.solve(a)).real)

    def kernel(seed):
        eig = _scm_eig(model, K, seed)
        lr = _lr_loss_batch(model, a[:, None], eig.vectors[:, :r])[0]
        if not full_ok:
            return [lr, math.nan]
        w = linalg.solve_hermitian_pd(None, a, eig=eig)
        fr = abs(np.vdot(a, w)) ** 2 / (float(np.vdot(w, model.apply(w)).real) * ira)
        return [lr, fr]

    samples = run_trials(kernel, mc)
    mean, _ = mc_stats(samples)
    base = predict(cfg, theta_deg, c)
    flags = [f for f in base.flag.split(";") if f]
    if not full_ok:
        flags.append("fullrank_needs_K_ge_m_plus_2")
    return SinrLossReport(
        rho_hat=float(mean[1]) if full_ok else None, rho_lr=base.rho_lr,
        rho_hat_lr=float(mean[0]), pred_fullrank=base.pred_fullrank,
        pred_lr_spiked=base.pred_lr_spiked, pred_gifo=rmt.predict_gifo_baseline(r, K),
        pred_lr_corrected=base.pred_lr_corrected, theta_deg=float(theta_deg), c=c, K=K,
        trials=mc.trials, flag=";".join(dict.fromkeys(flags)),
    )


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


def population_spectrum(values: Sequence[float], m: int, multiplicity: str = "fixed") -> np.ndarray:
    """Length-``m`` population spectrum from distinct values (smallest = noise).

    ``fixed``: each non-noise value appears once. ``proportional``: every value
    gets ``m // len(values)`` copies and the noise value takes the remainder.
    """
    vals = sorted((float(v) for v in values), reverse=True)
    noise, spikes = vals[-1], vals[:-1]
    if multiplicity == "fixed":
        counts = [1] * len(spikes)
    elif multiplicity == "proportional":
        counts = [m // len(vals)] * len(spikes)
    else:
        raise InvalidArgument(f"unknown multiplicity mode {multiplicity!r}")
    head = np.repeat(spikes, counts)
    if head.size >= m:
        raise InvalidArgument("spectrum leaves no room for the noise eigenvalue")
    return np.concatenate([head, np.full(m - head.size, noise)])


def eigen_pdf_histogram(model, c: float, mc: McConfig, bins: int = 200,
                        m: Optional[int] = None) -> SweepResult:
    """Histogram of SCM eigenvalues pooled over trials.

    ``model`` is a :class:`CovarianceModel` or a population spectrum (array of
    ``m`` eigenvalues). Only the eigenvalues matter because the SCM spectrum
    is invariant to the eigenvectors of ``R``, so a population spectrum is
    simulated with a diagonal covariance. ``meta`` carries the
    Marcenko-Pastur edges and the spike limits, all in covariance units.
    """
    if bins < 10:
        raise InvalidArgument("bins must be >= 10")
    if isinstance(model, CovarianceModel):
        pop = np.asarray(model.eigenvalues, dtype=float)
        sqrt_apply = model.sqrt_apply
    else:
        pop = np.sort(np.asarray(model, dtype=float))[::-1]
        root = np.sqrt(pop)

        def sqrt_apply(Y):
            return root[:, None] * Y
    m = pop.size if m is None else m
    if m != pop.size:
        raise InvalidArgument(f"m = {m} does not match the spectrum length {pop.size}")
    K = int(round(m / c))
    if K < 1:
        raise InvalidArgument("m / c must round to a positive snapshot count")

    def kernel(seed):
        X = sqrt_apply(linalg.complex_gauss_matrix(m, K, seed))
        return linalg.hermitian_eigvals((X @ X.conj().T) / K)

    pooled = run_trials(kernel, mc)
    density, edges = np.histogram(pooled.ravel(), bins=bins, density=True)
    rows = [
        {"bin_center": 0.5 * (lo + hi), "bin_left": lo, "bin_right": hi, "density": d}
        for lo, hi, d in zip(edges[:-1], edges[1:], density)
    ]
    sigma2 = float(pop.min())
    law = rmt.MpLaw.from_ratio(m / K)
    meta = {
        "m": m, "K": K, "c": m / K, "trials": mc.trials, "sigma2": sigma2,
        "mp_lambda_minus": sigma2 * law.lambda_minus,
        "mp_lambda_plus": sigma2 * law.lambda_plus,
        "mp_atom_at_zero": law.atom_at_zero,
    }
    distinct = sorted(set(pop[pop > sigma2].tolist()), reverse=True)
    for i, lam in enumerate(distinct, start=1):
        omega = lam / sigma2 - 1.0
        meta[f"tau_{i}"] = sigma2 * float(rmt.spike_limit(omega, m / K))
        meta[f"separated_{i}"] = bool(omega > math.sqrt(m / K))
    return SweepResult("bin_center", ["bin_center", "bin_left", "bin_right", "density"],
                       rows, meta, raw=pooled)


def separation_sweep(cfg: ScenarioConfig, jnr_db_grid: Sequence[float],
                     c_grid: Sequence[float]) -> SweepResult:
    """Margin ``omega_r - sqrt(c)`` of the weakest spike over a (JNR, c) grid.

    ``meta['zero_crossing_db_c=<c>']`` holds the JNR at which the margin
    changes sign, linearly interpolated along the grid (absent if none).
    """
    if not len(jnr_db_grid) or not len(c_grid):
        raise InvalidArgument("grids must be non-empty")
    weakest = min(cfg.jammer_powers)
    rows = []
    meta = {}
    for c in c_grid:
        if not c > 0:
            raise InvalidArgument("c must be positive")
        margins = []
        for x in jnr_db_grid:
            omega_r = 10.0 ** (x / 10.0) * weakest / cfg.sigma2
            margin = omega_r - math.sqrt(c)
            margins.append(margin)
            rows.append({"jnr_db": float(x), "c": float(c), "margin": margin})
        for (x0, g0), (x1, g1) in zip(zip(jnr_db_grid, margins), zip(jnr_db_grid[1:], margins[1:])):
            if g0 == 0:
                meta[f"zero_crossing_db_c={c:g}"] = float(x0)
                break
            if g0 * g1 < 0:
                meta[f"zero_crossing_db_c={c:g}"] = float(x0 + (x1 - x0) * (-g0) / (g1 - g0))
                break
    return SweepResult("jnr_db", ["jnr_db", "c", "margin"], rows, meta)


def separation_threshold_db(cfg: ScenarioConfig, c: float) -> float:
    """JNR (dB) at which the weakest spike sits exactly on ``sqrt(c)``."""
    return 10.0 * math.log10(math.sqrt(c) * cfg.sigma2 / min(cfg.jammer_powers))


QF_COLUMNS = ["m", "K", "mc_mean", "mc_std", "prediction_spiked", "prediction_corrected",
              "prediction_naive", "mse_spiked", "mse_corrected", "mse_naive", "trials"]


def mse_structured_qf_sweep(cfg: ScenarioConfig, eigenvalues: Sequence[float], c: float,
                            m_grid: Sequence[int], mc: McConfig, jammer_index: int = 0) -> SweepResult:
    """MSE of ``s^H Pihat_perp R Pihat_perp s`` against its limits, per ``m``.

    ``s`` is the unit-norm steering vector of jammer ``jammer_index``; ``R``
    uses the jammer geometry with the explicit ``eigenvalues`` and ``K =
    round(m / c)``.
    """
    if not 0 <= jammer_index < cfg.r:
        raise InvalidArgument(f"jammer_index must be in [0, {cfg.r})")
    rows = []
    for stream, m in enumerate(m_grid):
        sub = cfg.with_m(int(m))
        model = covariance_from_eigenvalues(sub, eigenvalues)
        K = _k_from_ratio(sub.m, c, sub.r)
        c_eff = sub.m / K
        s = steering_vector(sub.jammer_aoas_deg[jammer_index], sub.m, sub.spacing_over_wavelength)
        s = s / math.sqrt(sub.m)
        spiked = rmt.deterministic_structured_qf(s, model.R, s, model, c_eff).real
        corrected = rmt.deterministic_structured_qf(s, model.R, s, model, c_eff, corrected=True).real
        ps = s - model.basis @ (model.basis.conj().T @ s)
        naive = float(np.vdot(ps, model.apply(ps)).real)
        r = sub.r

        def kernel(seed, model=model, K=K, s=s, r=r):
            eig = _scm_eig(model, K, seed)
            U = eig.vectors[:, :r]
            p = s - U @ (U.conj().T @ s)
            return [float(np.vdot(p, model.apply(p)).real)]

        samples = run_trials(kernel, mc, stream=stream)[:, 0]
        mean, std = mc_stats(samples)
        rows.append({
            "m": int(m), "K": K, "mc_mean": float(mean), "mc_std": float(std),
            "prediction_spiked": spiked, "prediction_corrected": corrected, "prediction_naive": naive,
            "mse_spiked": float(np.mean((samples - spiked) ** 2)),
            "mse_corrected": float(np.mean((samples - corrected) ** 2)),
            "mse_naive": float(np.mean((samples - naive) ** 2)),
            "trials": mc.trials,
        })
        log.debug("mse-qf m=%d done", m)
    return SweepResult("m", QF_COLUMNS, rows, {"c": c, "jammer_index": jammer_index})


SINR_MSE_COLUMNS = ["m", "K", "mc_mean", "mc_std", "prediction_spiked", "prediction_corrected",
                    "prediction_naive", "mse_spiked", "mse_corrected", "mse_naive", "trials"]


def mse_sinr_loss_sweep(cfg: ScenarioConfig, c: float, m_grid: Sequence[int], theta_deg: float,
                        mc: McConfig) -> SweepResult:
    """MSE of the adaptive low-rank SINR loss against its limits, per ``m``.

    ``K = max(round(m / c), r + 1)``; ``prediction_naive`` is the clairvoyant
    loss with the true projector.
    """
    rows = []
    for stream, m in enumerate(m_grid):
        sub = cfg.with_m(int(m))
        model = build_covariance(sub)
        K = _k_from_ratio(sub.m, c, sub.r)
        c_eff = sub.m / K
        a = steering_vector(theta_deg, sub.m, sub.spacing_over_wavelength)
        spiked = rmt.predict_sinr_loss_lr(model, a, c_eff)
        corrected = rmt.predict_sinr_loss_lr(model, a, c_eff, corrected=True)
        naive, flag = _safe(true_lr_loss, model, a)
        r = sub.r

        def kernel(seed, model=model, K=K, a=a, r=r):
            eig = _scm_eig(model, K, seed)
            return _lr_loss_batch(model, a[:, None], eig.vectors[:, :r])

        samples = run_trials(kernel, mc, stream=stream)[:, 0]
        mean, std = mc_stats(samples)
        row = {
            "m": int(m), "K": K, "mc_mean": float(mean), "mc_std": float(std),
            "prediction_spiked": spiked, "prediction_corrected": corrected, "prediction_naive": naive,
            "mse_spiked": float(np.mean((samples - spiked) ** 2)),
            "mse_corrected": float(np.mean((samples - corrected) ** 2)),
            "mse_naive": float(np.mean((samples - naive) ** 2)),
            "trials": mc.trials,
        }
        if flag:
            row["flag"] = flag
        rows.append(row)
    return SweepResult("m", SINR_MSE_COLUMNS, rows, {"c": c, "theta_deg": theta_deg})


LOSS_COLUMNS = ["mc_mean", "mc_std", "prediction_naive", "prediction_spiked",
                "prediction_corrected", "prediction_gifo", "trials"]


def _predictions(model: CovarianceModel, a, c: float):
    row, flags = {}, []
    row["prediction_naive"], f = _safe(true_lr_loss, model, a)
    flags.append(f)
    row["prediction_spiked"], f = _safe(rmt.predict_sinr_loss_lr, model, a, c)
    flags.append(f)
    row["prediction_corrected"], f = _safe(rmt.predict_sinr_loss_lr, model, a, c, corrected=True)
    flags.append(f)
    return row, ";".join(dict.fromkeys(f for f in flags if f))


def sinr_loss_vs_k(cfg: ScenarioConfig, theta_deg: float, k_grid: Sequence[int],
                   mc: McConfig) -> SweepResult:
    """Adaptive low-rank SINR loss against snapshot count ``K`` at fixed ``m``."""
    model = build_covariance(cfg)
    a = steering_vector(theta_deg, cfg.m, cfg.spacing_over_wavelength)
    r = cfg.r
    rows = []
    for stream, K in enumerate(k_grid):
        K = int(K)
        if K < r + 1:
            raise InvalidArgument(f"K = {K} below r + 1 = {r + 1}")

        def kernel(seed, K=K):
            eig = _scm_eig(model, K, seed)
            return _lr_loss_batch(model, a[:, None], eig.vectors[:, :r])

        samples = run_trials(kernel, mc, stream=stream)[:, 0]
        mean, std = mc_stats(samples)
        preds, flag = _predictions(model, a, cfg.m / K)
        row = {"K": K, "c": cfg.m / K, "mc_mean": float(mean), "mc_std": float(std), **preds,
               "prediction_gifo": rmt.predict_gifo_baseline(r, K), "trials": mc.trials}
        if flag:
            row["flag"] = flag
        rows.append(row)
    return SweepResult("K", ["K", "c", *LOSS_COLUMNS], rows, {"theta_deg": theta_deg, "m": cfg.m})


def nearest_jammer(cfg: ScenarioConfig, theta_grid: Sequence[float]) -> float:
    mid = 0.5 * (min(theta_grid) + max(theta_grid))
    return min(cfg.jammer_aoas_deg, key=lambda t: (abs(t - mid), t))


def break_from_curve(model: CovarianceModel, cfg: ScenarioConfig, c: float, thetas, values,
                     jammer_deg: float, corrected: bool = False):
    """Performance break of a predicted curve, plateau from a -90..90 deg reference grid."""
    ref = []
    for t in PLATEAU_GRID_DEG:
        a = steering_vector(t, cfg.m, cfg.spacing_over_wavelength)
        v, _ = _safe(rmt.predict_sinr_loss_lr, model, a, c, corrected=corrected)
        ref.append(v)
    plateau = rmt.far_field_plateau(PLATEAU_GRID_DEG, ref, jammer_deg)
    return rmt.performance_break(thetas, values, jammer_deg, plateau), plateau


def sinr_loss_vs_theta(cfg: ScenarioConfig, K: int, theta_grid: Sequence[float],
                       mc: McConfig) -> SweepResult:
    """Adaptive low-rank SINR loss against target angle at fixed ``K``.

    All angles share the same secondary data per trial. Angles where the true
    projector annihilates the steering vector are flagged, not fatal.
    """
    if not len(theta_grid):
        raise InvalidArgument("theta grid must be non-empty")
    r = cfg.r
    if K < r + 1:
        raise InvalidArgument(f"K = {K} below r + 1 = {r + 1}")
    model = build_covariance(cfg)
    A = steering_matrix(theta_grid, cfg.m, cfg.spacing_over_wavelength)
    c = cfg.m / K

    def kernel(seed):
        eig = _scm_eig(model, K, seed)
        return _lr_loss_batch(model, A, eig.vectors[:, :r])

    samples = run_trials(kernel, mc)
    mean, std = mc_stats(samples)
    gifo = rmt.predict_gifo_baseline(r, K)
    rows = []
    for j, t in enumerate(theta_grid):
        preds, flag = _predictions(model, A[:, j], c)
        row = {"theta_deg": float(t), "mc_mean": float(mean[j]), "mc_std": float(std[j]), **preds,
               "prediction_gifo": gifo, "trials": mc.trials}
        if flag:
            row["flag"] = flag
        rows.append(row)
    jam = nearest_jammer(cfg, theta_grid)
    meta = {"K": K, "c": c, "m": cfg.m, "jammer_deg": jam}
    for key, corrected in (("", False), ("_corrected", True)):
        vals = [row["prediction" + (key or "_spiked")] for row in rows]
        brk, plateau = break_from_curve(model, cfg, c, theta_grid, vals, jam, corrected)
        meta["plateau" + key] = plateau
        meta["performance_break_deg" + key] = math.nan if brk is None else brk
    return SweepResult("theta_deg", ["theta_deg", *LOSS_COLUMNS], rows, meta)
