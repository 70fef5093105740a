"""Empirical quantities: projectors, filters, SINR losses and spectral transforms."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, NamedTuple, Optional

import numpy as np

from lrsinr import linalg
from lrsinr.asymptotics import DeterministicProjector, lr_sinr_loss_from_perp
from lrsinr.errors import AdaptiveFilterUnavailable, InvalidArgument, RankTooLarge, Singular
from lrsinr.scenario import CovarianceModel, SampleSet


@dataclass(frozen=True, eq=False)
class ProjectorPair:
    """Projector onto ``span(basis)`` and its orthogonal complement."""

    basis: np.ndarray

    @cached_property
    def pi_c(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    @cached_property
    def pi_c_perp(self) -> np.ndarray:
        return np.eye(self.basis.shape[0], dtype=np.complex128) - self.pi_c

    def apply_perp(self, v):
        v = np.asarray(v, dtype=np.complex128)
        return v - self.basis @ (self.basis.conj().T @ v)


def true_projectors(model: CovarianceModel) -> ProjectorPair:
    return ProjectorPair(model.basis)


def estimated_projectors(samples: SampleSet, r: int) -> ProjectorPair:
    """Projectors built from the ``r`` leading SCM eigenvectors."""
    if r >= samples.m:
        raise RankTooLarge(f"r = {r} must be smaller than m = {samples.m}")
    if r < 0:
        raise InvalidArgument("r must be non-negative")
    return ProjectorPair(samples.eig.vectors[:, :r])


class FilterSet(NamedTuple):
    w_opt: np.ndarray
    w_hat: Optional[np.ndarray]
    w_lr: np.ndarray
    w_hat_lr: np.ndarray

    @property
    def adaptive_available(self) -> bool:
        return self.w_hat is not None


def filters(model: CovarianceModel, samples: SampleSet, a, strict: bool = False) -> FilterSet:
    """Optimal, adaptive, low-rank and adaptive low-rank filters for steering ``a``.

    The adaptive full-rank filter ``Rhat^-1 a`` needs ``K >= m``; otherwise it
    is returned as ``None`` (or :class:`AdaptiveFilterUnavailable` is raised
    when ``strict``).
    """
    a = np.asarray(a, dtype=np.complex128)
    try:
        w_hat = linalg.solve_hermitian_pd(samples.scm, a, eig=samples.eig)
    except Singular as exc:
        if strict:
            raise AdaptiveFilterUnavailable(str(exc)) from exc
        w_hat = None
    r = model.r
    return FilterSet(
        w_opt=model.solve(a),
        w_hat=w_hat,
        w_lr=true_projectors(model).apply_perp(a),
        w_hat_lr=estimated_projectors(samples, r).apply_perp(a),
    )


def sinr_loss_fullrank(samples, model: CovarianceModel, a) -> float:
    """``|a^H Rhat^-1 a|^2 / ((a^H Rhat^-1 R Rhat^-1 a)(a^H R^-1 a))``.

    ``samples`` is a :class:`SampleSet` (requires ``K >= m + 2``) or any
    Hermitian positive-definite matrix standing in for the SCM.
    """
    a = np.asarray(a, dtype=np.complex128)
    if isinstance(samples, SampleSet):
        if samples.K < samples.m + 2:
            raise Singular(f"full-rank SINR loss needs K >= m + 2, got K={samples.K}, m={samples.m}")
        w = linalg.solve_hermitian_pd(samples.scm, a, eig=samples.eig)
    else:
        w = linalg.solve_hermitian_pd(samples, a)
    num = abs(np.vdot(a, w)) ** 2
    den = float(np.vdot(w, model.apply(w)).real) * float(np.vdot(a, model.solve(a)).real)
    return float(num / den)


def sinr_loss_lr(model: CovarianceModel, a, projector) -> float:
    """Low-rank SINR loss with the supplied complement projector.

    ``projector`` may be a :class:`ProjectorPair` (true or estimated), a
    :class:`DeterministicProjector` or an explicit ``m x m`` matrix.
    Raises :class:`DegenerateSteering` when ``a^H P R P a`` vanishes.
    """
    a = np.asarray(a, dtype=np.complex128)
    if isinstance(projector, (ProjectorPair, DeterministicProjector)):
        perp_a = projector.apply_perp(a)
    else:
        perp_a = np.asarray(projector, dtype=np.complex128) @ a
    return lr_sinr_loss_from_perp(model, a, perp_a)


class EmpiricalCDF:
    """Step function ``F(x) = #{k : lambda_k <= x} / m``."""

    def __init__(self, eigvals):
        vals = np.sort(np.asarray(eigvals, dtype=float).ravel())
        if vals.size == 0:
            raise InvalidArgument("empirical CDF needs at least one eigenvalue")
        self.values = vals

    def __call__(self, x):
        out = np.searchsorted(self.values, x, side="right") / self.values.size
        return float(out) if np.ndim(x) == 0 else out


def empirical_cdf(eigvals) -> EmpiricalCDF:
    return EmpiricalCDF(eigvals)


def empirical_stieltjes(eigvals, z) -> complex:
    """``(1/m) sum_i 1 / (lambda_i - z)`` for ``Im z > 0``."""
    z = complex(z)
    if not z.imag > 0:
        raise InvalidArgument(f"Stieltjes transform needs Im z > 0, got {z}")
    vals = np.asarray(eigvals, dtype=float).ravel()
    return complex(np.mean(1.0 / (vals - z)))


def pdf_from_stieltjes(stieltjes: Callable[[complex], complex], x: float, eps: float = 0.01) -> float:
    """``Im[b(x + i eps)] / pi``: the Cauchy-smoothed density at ``x``."""
    if not eps > 0:
        raise InvalidArgument("eps must be positive")
    return float(np.imag(stieltjes(complex(x, eps))) / np.pi)


@dataclass(frozen=True)
class SinrLossReport:
    """SINR losses for one configuration, empirical and predicted.

    ``None`` marks a quantity that does not apply (no Monte-Carlo run, or the
    full-rank filter being undefined for ``c >= 1``); ``flag`` says why.
    """

    rho_hat: Optional[float]
    rho_lr: Optional[float]
    rho_hat_lr: Optional[float]
    pred_fullrank: Optional[float]
    pred_lr_spiked: Optional[float]
    pred_gifo: Optional[float]
    pred_lr_corrected: Optional[float] = None
    theta_deg: Optional[float] = None
    c: Optional[float] = None
    K: Optional[float] = None
    trials: Optional[int] = None
    flag: str = ""

    def check(self, slack: float = 1e-9) -> None:
        for name in ("rho_hat", "rho_lr", "rho_hat_lr", "pred_fullrank", "pred_lr_spiked",
                     "pred_gifo", "pred_lr_corrected"):
            v = getattr(self, name)
            if v is not None and not (-slack <= v <= 1 + slack):
                raise ValueError(f"{name} = {v} outside [0, 1]")
