"""Closed-form large-dimensional predictions for the spiked model.

All spike quantities are expressed in noise-normalised units: for a covariance
with white-noise power ``sigma2`` the spike strengths are
``omega_i = lambda_i / sigma2 - 1``.

Two deterministic equivalents are provided for the structured quadratic form
``s1^H Pihat_perp B Pihat_perp s2``:

* the weighted-projector form ``s1^H Pibar B Pibar s2`` with
  ``Pibar = sum_i psi_i u_i u_i^H`` (``corrected=False``, the default);
* the same form plus a noise-leakage term
  ``beta_B * sum_j chi_j psi_j (s1^H u_j)(u_j^H s2)`` where
  ``beta_B = tr(Pi_perp B) / (m - r)`` (``corrected=True``).

The leakage term is the energy that a sample spike eigenvector spends outside
the true spike direction (weight ``psi_j``) picking up the noise-subspace
average of ``B``. Without it the weighted-projector form can fall below the
deterministic lower bound ``sigma2 * |Pihat_perp u_j|^2 -> sigma2 * psi_j``
obtained when ``s1 = s2 = u_j`` and ``B = R``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from lrsinr.errors import (
    DegenerateSteering,
    IndexOutOfRange,
    InvalidArgument,
    InvalidRegime,
    SeparationViolated,
)

if TYPE_CHECKING:
    from lrsinr.scenario import CovarianceModel, SpikedSpectrum

SEPARATION_WARN_BAND = 1e-9
BREAK_PLATEAU_EXCLUSION_DEG = 15.0


# ---------------------------------------------------------------------------
# Marcenko-Pastur law
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MpLaw:
    c: float
    lambda_minus: float
    lambda_plus: float
    atom_at_zero: float

    @classmethod
    def from_ratio(cls, c: float) -> "MpLaw":
        if not c > 0:
            raise InvalidArgument(f"aspect ratio c must be positive, got {c}")
        rc = math.sqrt(c)
        return cls(c, (1 - rc) ** 2, (1 + rc) ** 2, max(0.0, 1 - 1 / c))

    def pdf(self, x):
        return mp_pdf(x, self.c)


def mp_pdf(x, c: float):
    """Continuous part of the Marcenko-Pastur density (unit noise power).

    Vectorised over ``x``. The point mass ``1 - 1/c`` at zero for ``c > 1`` is
    excluded; see :class:`MpLaw`.
    """
    if not c > 0:
        raise InvalidArgument(f"aspect ratio c must be positive, got {c}")
    lo = (1 - math.sqrt(c)) ** 2
    hi = (1 + math.sqrt(c)) ** 2
    x_arr = np.asarray(x, dtype=float)
    inside = (x_arr > lo) & (x_arr < hi)
    safe = np.where(inside, x_arr, 1.0)
    val = np.sqrt(np.clip((lo - safe) * (safe - hi), 0.0, None)) / (2 * math.pi * c * safe)
    out = np.where(inside, val, 0.0)
    return float(out) if np.ndim(x) == 0 else out


# ---------------------------------------------------------------------------
# Spike limits
# ---------------------------------------------------------------------------


def spike_limit(omega, c):
    """Almost-sure limit of a sample spike eigenvalue: ``1 + w + c (1 + w) / w``."""
    omega = np.asarray(omega, dtype=float)
    return 1.0 + omega + c * (1.0 + omega) / omega


def eigvec_alignment(omega, c):
    """``chi = (1 - c / w^2) / (1 + c / w)``, the limit of ``|u_hat^H u|^2``."""
    omega = np.asarray(omega, dtype=float)
    return (1.0 - c / omega**2) / (1.0 + c / omega)


def separation_margin(spectrum: "SpikedSpectrum") -> np.ndarray:
    """Per-spike margin ``omega_i - sqrt(c)``; separation holds iff all are > 0."""
    return np.asarray(spectrum.omegas, dtype=float) - math.sqrt(spectrum.c)


def check_separation(omegas, c: float) -> None:
    """Raise :class:`SeparationViolated` unless every ``omega_i > sqrt(c)``.

    Margins within ``1e-9`` of zero also count as violations and emit a
    near-boundary warning.
    """
    margins = np.asarray(omegas, dtype=float) - math.sqrt(c)
    bad = np.flatnonzero(~(margins > 0) | (np.abs(margins) <= SEPARATION_WARN_BAND))
    if bad.size:
        near = [int(i) for i in bad if abs(margins[i]) <= SEPARATION_WARN_BAND]
        if near:
            warnings.warn(
                f"spikes {near} lie within {SEPARATION_WARN_BAND:g} of the separation boundary",
                RuntimeWarning,
                stacklevel=3,
            )
        raise SeparationViolated(
            bad,
            f"separation condition omega_i > sqrt(c) = {math.sqrt(c):.6g} violated for "
            f"spike indices {bad.tolist()} (margins {np.round(margins[bad], 6).tolist()})",
        )


# ---------------------------------------------------------------------------
# Deterministic projector and structured quadratic forms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DeterministicProjector:
    """Weighted projector ``sum_i psi_i u_i u_i^H`` over all ``m`` eigenvectors.

    Only the spike part is stored: ``psis[i]`` weights ``basis[:, i]`` and every
    noise eigenvector carries weight one. The operator is Hermitian but not
    idempotent.
    """

    psis: np.ndarray
    chis: np.ndarray
    basis: np.ndarray

    @property
    def m(self) -> int:
        return self.basis.shape[0]

    def apply(self, s):
        """``Pibar @ s`` for a vector or a matrix of column vectors."""
        s = np.asarray(s, dtype=np.complex128)
        coef = self.basis.conj().T @ s
        if s.ndim == 1:
            return s - self.basis @ (self.chis * coef)
        return s - self.basis @ (self.chis[:, None] * coef)

    apply_perp = apply

    @property
    def matrix(self) -> np.ndarray:
        return np.eye(self.m, dtype=np.complex128) - (self.basis * self.chis) @ self.basis.conj().T


def deterministic_projector(model: "CovarianceModel", c: float) -> DeterministicProjector:
    if not c > 0:
        raise InvalidArgument(f"aspect ratio c must be positive, got {c}")
    omegas = model.omegas
    check_separation(omegas, c)
    chis = eigvec_alignment(omegas, c)
    return DeterministicProjector(psis=1.0 - chis, chis=chis, basis=model.basis)


def _vec(s, m: int, name: str) -> np.ndarray:
    arr = np.asarray(s, dtype=np.complex128)
    if arr.shape != (m,):
        raise InvalidArgument(f"{name} must have shape ({m},), got {arr.shape}")
    return arr


def noise_leakage_term(s1, B, s2, model: "CovarianceModel", c: float) -> complex:
    """``beta_B * sum_j chi_j psi_j (s1^H u_j)(u_j^H s2)``, ``beta_B = tr(Pi_perp B)/(m-r)``."""
    proj = deterministic_projector(model, c)
    m, r = model.m, model.r
    s1 = _vec(s1, m, "s1")
    s2 = _vec(s2, m, "s2")
    B = np.asarray(B, dtype=np.complex128)
    U = model.basis
    beta = (np.trace(B) - np.trace(U.conj().T @ B @ U)) / (m - r)
    weights = proj.chis * proj.psis
    return complex(beta * np.sum(weights * (U.conj().T @ s1).conj() * (U.conj().T @ s2)))


def deterministic_structured_qf(
    s1, B, s2, model: "CovarianceModel", c: float, corrected: bool = False
) -> complex:
    """Deterministic equivalent of ``s1^H Pihat_perp B Pihat_perp s2``.

    Returns ``s1^H Pibar B Pibar s2``; with ``corrected=True`` the noise-leakage
    term of :func:`noise_leakage_term` is added. ``B`` need not be Hermitian.
    """
    proj = deterministic_projector(model, c)
    m = model.m
    s1 = _vec(s1, m, "s1")
    s2 = _vec(s2, m, "s2")
    B = np.asarray(B, dtype=np.complex128)
    if B.shape != (m, m):
        raise InvalidArgument(f"B must be {m}x{m}, got {B.shape}")
    value = complex(np.vdot(proj.apply(s1), B @ proj.apply(s2)))
    if corrected:
        value += noise_leakage_term(s1, B, s2, model, c)
    return value


def deterministic_base_qf(j1: int, j2: int, s1, B, s2, model: "CovarianceModel", c: float) -> complex:
    """``chi_j1 chi_j2 (s1^H u_j1)(u_j1^H B u_j2)(u_j2^H s2)``; indices are 0-based spikes."""
    r = model.r
    for j in (j1, j2):
        if not 0 <= j < r:
            raise IndexOutOfRange(f"spike index {j} outside [0, {r})")
    check_separation(model.omegas, c)
    chis = eigvec_alignment(model.omegas, c)
    m = model.m
    s1 = _vec(s1, m, "s1")
    s2 = _vec(s2, m, "s2")
    u1 = model.basis[:, j1]
    u2 = model.basis[:, j2]
    B = np.asarray(B, dtype=np.complex128)
    return complex(chis[j1] * chis[j2] * np.vdot(s1, u1) * np.vdot(u1, B @ u2) * np.vdot(u2, s2))


def assembled_structured_qf(s1, B, s2, model: "CovarianceModel", c: float) -> complex:
    """Term-by-term assembly of the structured-QF limit.

    ``s1^H B s2 - sum_i chi_i (s1^H Pi_i B s2 + s1^H B Pi_i s2) + sum_{j1,j2} eta(j1, j2)``;
    algebraically equal to :func:`deterministic_structured_qf` (uncorrected).
    """
    check_separation(model.omegas, c)
    chis = eigvec_alignment(model.omegas, c)
    m, r = model.m, model.r
    s1 = _vec(s1, m, "s1")
    s2 = _vec(s2, m, "s2")
    B = np.asarray(B, dtype=np.complex128)
    U = model.basis
    total = complex(np.vdot(s1, B @ s2))
    for i in range(r):
        u = U[:, i]
        simple = np.vdot(s1, u) * np.vdot(u, B @ s2) + np.vdot(s1, B @ u) * np.vdot(u, s2)
        total -= complex(chis[i] * simple)
    for j1 in range(r):
        for j2 in range(r):
            total += deterministic_base_qf(j1, j2, s1, B, s2, model, c)
    return total


# ---------------------------------------------------------------------------
# SINR-loss predictions
# ---------------------------------------------------------------------------


def predict_sinr_loss_fullrank(c: float) -> float:
    """Large-dimensional limit ``1 - c`` of the full-rank adaptive SINR loss."""
    if not c > 0:
        raise InvalidArgument(f"aspect ratio c must be positive, got {c}")
    if c >= 1:
        raise InvalidRegime(f"c = {c} >= 1: the SCM is singular and the full-rank filter undefined")
    return 1.0 - c


def predict_gifo_baseline(r: int, K) -> float:
    """Rank-only baseline ``E[rho_hat_LR] ~ 1 - r/K``."""
    if not K > r:
        raise InvalidArgument(f"need K > r, got K={K}, r={r}")
    return 1.0 - r / K


def lr_sinr_loss_from_perp(model: "CovarianceModel", a, perp_a, leakage: float = 0.0) -> float:
    """Evaluate ``|a^H P a|^2 / ((a^H P R P a + leakage) (a^H R^-1 a))`` given ``P a``."""
    a = np.asarray(a, dtype=np.complex128)
    num = np.vdot(a, perp_a)
    den_qf = float(np.vdot(perp_a, model.apply(perp_a)).real) + leakage
    floor = 1e-14 * float(np.vdot(a, a).real) * model.spectral_norm
    if den_qf <= floor:
        raise DegenerateSteering(
            "steering vector lies inside the jammer subspace (a^H P R P a is numerically zero)"
        )
    ira = float(np.vdot(a, model.solve(a)).real)
    return float(abs(num) ** 2 / (den_qf * ira))


def predict_sinr_loss_lr(model: "CovarianceModel", a, c: float, corrected: bool = False) -> float:
    """Deterministic equivalent of the adaptive low-rank SINR loss at ratio ``c``."""
    proj = deterministic_projector(model, c)
    a = _vec(a, model.m, "a")
    leakage = 0.0
    if corrected:
        coef = model.basis.conj().T @ a
        leakage = model.sigma2 * float(np.sum(proj.chis * proj.psis * np.abs(coef) ** 2))
    return lr_sinr_loss_from_perp(model, a, proj.apply(a), leakage)


# ---------------------------------------------------------------------------
# Performance break
# ---------------------------------------------------------------------------


def far_field_plateau(thetas, values, jammer_deg: float,
                      exclusion_deg: float = BREAK_PLATEAU_EXCLUSION_DEG) -> float:
    """Median of ``values`` over angles more than ``exclusion_deg`` from the jammer."""
    thetas = np.asarray(thetas, dtype=float)
    values = np.asarray(values, dtype=float)
    mask = (np.abs(thetas - jammer_deg) > exclusion_deg) & np.isfinite(values)
    if not mask.any():
        raise InvalidArgument("no finite far-field points to define the plateau")
    return float(np.median(values[mask]))


def performance_break(thetas: Sequence[float], values: Sequence[float], jammer_deg: float,
                      plateau: float) -> float | None:
    """Angle at which the predicted loss first falls below half the plateau.

    The grid is walked from the point farthest from ``jammer_deg`` toward the
    jammer; the first crossing of ``plateau / 2`` is located by linear
    interpolation between the two bracketing grid points. Returns ``None`` if
    the curve never crosses.
    """
    thetas = np.asarray(thetas, dtype=float)
    values = np.asarray(values, dtype=float)
    order = np.argsort(-np.abs(thetas - jammer_deg), kind="stable")
    level = 0.5 * plateau
    prev_t = prev_v = None
    for t, v in zip(thetas[order], values[order]):
        if not np.isfinite(v):
            continue
        if v < level:
            if prev_t is None:
                return float(t)
            return float(prev_t + (level - prev_v) * (t - prev_t) / (v - prev_v))
        prev_t, prev_v = t, v
    return None
