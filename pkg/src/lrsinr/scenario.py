"""Jamming scenario on a uniform linear array.

Builds steering vectors, the low-rank-plus-white covariance
``R = s U Lambda U^H + sigma2 I`` with ``s = 10^(jnr_db / 10)``, its spiked
spectrum and synthetic secondary data ``X = R^(1/2) Y``.

Angles are in degrees at every public boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from lrsinr import linalg
from lrsinr.asymptotics import eigvec_alignment, spike_limit
from lrsinr.errors import DegenerateJammers, InvalidArgument, ValidationError

COLLINEARITY_LIMIT = 1.0 - 1e-10


@dataclass(frozen=True)
class ScenarioConfig:
    """ULA jamming scenario.

    ``jammer_powers`` is the diagonal of ``Lambda`` and must be strictly
    decreasing so spike eigenvalues are distinct. ``jnr_db`` is the
    ``JNR / tr(Lambda)`` scaling in dB. With ``normalize_trace`` the jamming
    covariance is instead scaled to ``tr(C) = m`` and ``jnr_db`` is unused.
    """

    m: int
    jammer_aoas_deg: tuple[float, ...]
    jammer_powers: tuple[float, ...]
    jnr_db: float = 10.0
    sigma2: float = 1.0
    spacing_over_wavelength: float = 0.5
    normalize_trace: bool = False

    def __post_init__(self):
        object.__setattr__(self, "jammer_aoas_deg", tuple(float(x) for x in self.jammer_aoas_deg))
        object.__setattr__(self, "jammer_powers", tuple(float(x) for x in self.jammer_powers))
        self.validate()

    @property
    def r(self) -> int:
        return len(self.jammer_aoas_deg)

    @property
    def jnr_scale(self) -> float:
        if self.normalize_trace:
            return self.m / sum(self.jammer_powers)
        return 10.0 ** (self.jnr_db / 10.0)

    def validate(self) -> None:
        if not isinstance(self.m, (int, np.integer)) or self.m < 2:
            raise ValidationError("m", "sensor count must be an integer >= 2")
        r = len(self.jammer_aoas_deg)
        if len(self.jammer_powers) != r:
            raise ValidationError("jammer_powers", "must have one entry per jammer AoA")
        if not 1 <= r < self.m:
            raise ValidationError("jammer_aoas_deg", f"need 1 <= r < m, got r={r}, m={self.m}")
        p = self.jammer_powers
        if any(not (x > 0 and math.isfinite(x)) for x in p):
            raise ValidationError("jammer_powers", "powers must be finite and strictly positive")
        if any(p[i] <= p[i + 1] for i in range(r - 1)):
            raise ValidationError("jammer_powers", "powers must be strictly decreasing")
        if not (self.sigma2 > 0 and math.isfinite(self.sigma2)):
            raise ValidationError("sigma2", "noise power must be positive")
        if not self.spacing_over_wavelength > 0:
            raise ValidationError("spacing_over_wavelength", "must be positive")
        if not math.isfinite(self.jnr_db):
            raise ValidationError("jnr_db", "must be finite")

    def with_m(self, m: int) -> "ScenarioConfig":
        return ScenarioConfig(m, self.jammer_aoas_deg, self.jammer_powers, self.jnr_db,
                              self.sigma2, self.spacing_over_wavelength, self.normalize_trace)


@dataclass(frozen=True, eq=False)
class CovarianceModel:
    """Covariance with ``r`` distinct spikes above a white-noise floor.

    ``eigenvalues`` has length ``m`` (descending, the last ``m - r`` equal to
    ``sigma2``); ``basis[:, i]`` is the eigenvector of spike ``i``.
    """

    R: np.ndarray
    eigenvalues: np.ndarray
    basis: np.ndarray
    sigma2: float

    @property
    def m(self) -> int:
        return self.R.shape[0]

    @property
    def r(self) -> int:
        return self.basis.shape[1]

    @property
    def spike_eigenvalues(self) -> np.ndarray:
        return self.eigenvalues[: self.r]

    @property
    def omegas(self) -> np.ndarray:
        return self.spike_eigenvalues / self.sigma2 - 1.0

    @property
    def spectral_norm(self) -> float:
        return float(self.eigenvalues[0])

    def apply(self, v):
        """``R @ v`` through the eigenstructure."""
        v = np.asarray(v, dtype=np.complex128)
        gain = self.spike_eigenvalues - self.sigma2
        coef = self.basis.conj().T @ v
        coef = gain * coef if v.ndim == 1 else gain[:, None] * coef
        return self.sigma2 * v + self.basis @ coef

    def solve(self, v):
        """``R^-1 @ v`` through the eigenstructure."""
        v = np.asarray(v, dtype=np.complex128)
        gain = 1.0 / self.spike_eigenvalues - 1.0 / self.sigma2
        coef = self.basis.conj().T @ v
        coef = gain * coef if v.ndim == 1 else gain[:, None] * coef
        return v / self.sigma2 + self.basis @ coef

    @cached_property
    def sqrt(self) -> np.ndarray:
        return linalg.psd_sqrt(self.R)

    def sqrt_apply(self, Y):
        """``R^(1/2) @ Y`` via the low-rank form ``sigma I + U (sqrt(L) - sigma) U^H``."""
        sig = math.sqrt(self.sigma2)
        gain = np.sqrt(self.spike_eigenvalues) - sig
        coef = self.basis.conj().T @ Y
        coef = gain * coef if Y.ndim == 1 else gain[:, None] * coef
        return sig * Y + self.basis @ coef

    @property
    def pi_c(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T


@dataclass(frozen=True)
class SpikedSpectrum:
    omegas: np.ndarray
    c: float
    taus: np.ndarray
    chis: np.ndarray
    psis: np.ndarray
    sigma2: float = 1.0

    @property
    def sample_spike_limits(self) -> np.ndarray:
        """Spike limits rescaled to the covariance's units (``sigma2 * tau``)."""
        return self.sigma2 * self.taus


@dataclass(frozen=True, eq=False)
class SampleSet:
    X: np.ndarray
    scm: np.ndarray
    eig: linalg.HermitianEig = field(repr=False)

    @property
    def K(self) -> int:
        return self.X.shape[1]

    @property
    def m(self) -> int:
        return self.X.shape[0]


def steering_vector(theta_deg: float, m: int, spacing_over_wavelength: float = 0.5) -> np.ndarray:
    """ULA response ``a_k = exp(j 2 pi d k sin(theta))``, ``k = 0..m-1``; ``|a| = sqrt(m)``."""
    if m < 1:
        raise InvalidArgument(f"m must be >= 1, got {m}")
    phase = 2.0 * math.pi * spacing_over_wavelength * math.sin(math.radians(theta_deg))
    return np.exp(1j * phase * np.arange(m))


def steering_matrix(thetas_deg: Sequence[float], m: int, spacing_over_wavelength: float = 0.5) -> np.ndarray:
    """Steering vectors for several angles stacked as columns."""
    phases = 2.0 * math.pi * spacing_over_wavelength * np.sin(np.radians(np.asarray(thetas_deg, float)))
    return np.exp(1j * np.outer(np.arange(m), phases))


def jammer_basis(cfg: ScenarioConfig) -> np.ndarray:
    """Gram-Schmidt orthonormalisation of the normalised jammer steering vectors."""
    A = steering_matrix(cfg.jammer_aoas_deg, cfg.m, cfg.spacing_over_wavelength) / math.sqrt(cfg.m)
    gram = np.abs(A.conj().T @ A)
    iu = np.triu_indices(cfg.r, k=1)
    if iu[0].size and gram[iu].max() > COLLINEARITY_LIMIT:
        k = int(np.argmax(gram[iu]))
        i, j = iu[0][k], iu[1][k]
        raise DegenerateJammers(
            f"jammers {i} ({cfg.jammer_aoas_deg[i]} deg) and {j} ({cfg.jammer_aoas_deg[j]} deg) "
            "have collinear steering vectors"
        )
    U = np.empty_like(A)
    for k in range(cfg.r):
        v = A[:, k].copy()
        # two passes of modified Gram-Schmidt keep U orthonormal to round-off
        for _ in range(2):
            for j in range(k):
                v -= U[:, j] * np.vdot(U[:, j], v)
        norm = np.linalg.norm(v)
        if norm < math.sqrt(1.0 - COLLINEARITY_LIMIT):
            raise DegenerateJammers(f"jammer {k} steering vector lies in the span of the previous ones")
        U[:, k] = v / norm
    return U


def covariance_from_spikes(basis: np.ndarray, spike_eigenvalues: Sequence[float], sigma2: float = 1.0) -> CovarianceModel:
    """``R = sigma2 I + sum_i (lambda_i - sigma2) u_i u_i^H`` for orthonormal ``basis``."""
    basis = np.asarray(basis, dtype=np.complex128)
    lam = np.asarray(spike_eigenvalues, dtype=float)
    m, r = basis.shape
    if lam.shape != (r,):
        raise InvalidArgument("need one spike eigenvalue per basis column")
    if np.any(np.diff(lam) >= 0) or lam[-1] <= sigma2:
        raise InvalidArgument("spike eigenvalues must be strictly decreasing and above sigma2")
    R = sigma2 * np.eye(m, dtype=np.complex128) + (basis * (lam - sigma2)) @ basis.conj().T
    R = 0.5 * (R + R.conj().T)
    eigenvalues = np.concatenate([lam, np.full(m - r, float(sigma2))])
    return CovarianceModel(R=R, eigenvalues=eigenvalues, basis=basis, sigma2=float(sigma2))


def build_covariance(cfg: ScenarioConfig) -> CovarianceModel:
    """Covariance of the jamming scenario; spike eigenvalues are ``sigma2 + s * Lambda_ii``."""
    U = jammer_basis(cfg)
    lam = cfg.sigma2 + cfg.jnr_scale * np.asarray(cfg.jammer_powers)
    return covariance_from_spikes(U, lam, cfg.sigma2)


def covariance_from_eigenvalues(cfg: ScenarioConfig, eigenvalues: Sequence[float]) -> CovarianceModel:
    """Scenario geometry with an explicit population spectrum.

    ``eigenvalues`` lists the distinct values of ``R`` (noise value included,
    any order); the smallest is the white-noise power and the others are
    attached, largest first, to the jammer directions in configuration order.
    """
    vals = sorted((float(x) for x in eigenvalues), reverse=True)
    if len(set(vals)) != len(vals):
        raise ValidationError("eigenvalues", "values must be distinct")
    noise, spikes = vals[-1], vals[:-1]
    if len(spikes) != cfg.r:
        raise ValidationError("eigenvalues", f"expected {cfg.r} spike values plus the noise value")
    if noise <= 0:
        raise ValidationError("eigenvalues", "noise eigenvalue must be positive")
    return covariance_from_spikes(jammer_basis(cfg), spikes, noise)


def spiked_spectrum(model: CovarianceModel, c: float) -> SpikedSpectrum:
    if not c > 0:
        raise InvalidArgument(f"aspect ratio c must be positive, got {c}")
    omegas = model.omegas
    chis = eigvec_alignment(omegas, c)
    return SpikedSpectrum(omegas=omegas, c=float(c), taus=spike_limit(omegas, c), chis=chis,
                          psis=1.0 - chis, sigma2=model.sigma2)


def scm_from(X: np.ndarray) -> SampleSet:
    K = X.shape[1]
    scm = (X @ X.conj().T) / K
    scm = 0.5 * (scm + scm.conj().T)
    return SampleSet(X=X, scm=scm, eig=linalg.hermitian_eig(scm))


def draw_samples(model: CovarianceModel, K: int, seed: int) -> SampleSet:
    """``K`` secondary snapshots ``X = R^(1/2) Y`` with ``Y`` iid CN(0, 1)."""
    if K < 1:
        raise InvalidArgument(f"K must be >= 1, got {K}")
    Y = linalg.complex_gauss_matrix(model.m, K, seed)
    return scm_from(model.sqrt_apply(Y))
