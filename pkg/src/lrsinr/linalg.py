"""Dense complex linear algebra and Gaussian sampling primitives.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Eigen-solves are
delegated to LAPACK (``numpy.linalg.eigh``); this module adds the ordering,
phase convention and precondition checks the rest of the package relies on.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from lrsinr.errors import (
    DimensionMismatch,
    InvalidArgument,
    NoConvergence,
    NotHermitian,
    NotPSD,
    Singular,
)

HERMITIAN_RTOL = 1e-8
PSD_CLAMP_RTOL = 1e-10
PD_FLOOR_RTOL = 1e-12


class HermitianEig(NamedTuple):
    """Eigenpairs of a Hermitian matrix.

    ``values`` are sorted in non-increasing order and ``vectors[:, i]`` is the
    unit eigenvector paired with ``values[i]``. Each column's largest-modulus
    entry is real and positive.
    """

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T


def as_complex_matrix(a, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a 2-D complex128 array, rejecting NaN/Inf."""
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionMismatch(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgument(f"{name} contains non-finite entries")
    return arr


def _as_vector(v, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=np.complex128)
    if arr.ndim != 1:
        raise DimensionMismatch(f"{name} must be 1-D, got shape {arr.shape}")
    return arr


def _check_hermitian(a: np.ndarray) -> None:
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    norm = np.linalg.norm(a)
    if np.linalg.norm(a - a.conj().T) > HERMITIAN_RTOL * norm:
        raise NotHermitian("matrix is not Hermitian within tolerance")


def fix_phase(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-modulus entry is real positive.

    Ties in modulus go to the lowest row index (``argmax`` semantics).
    """
    idx = np.argmax(np.abs(vectors), axis=0)
    pivots = vectors[idx, np.arange(vectors.shape[1])]
    mod = np.abs(pivots)
    phase = np.where(mod > 0, pivots / np.where(mod > 0, mod, 1.0), 1.0)
    return vectors * phase.conj()


def hermitian_eig(a) -> HermitianEig:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Raises
    ------
    NotHermitian
        If ``||A - A^H||_F > 1e-8 ||A||_F``.
    NoConvergence
        If the LAPACK driver fails to converge.
    """
    a = as_complex_matrix(a)
    _check_hermitian(a)
    herm = 0.5 * (a + a.conj().T)
    try:
        w, v = np.linalg.eigh(herm)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    # eigh returns ascending order; stable reversal keeps ties by original index.
    order = np.argsort(-w, kind="stable")
    return HermitianEig(w[order], fix_phase(v[:, order]))


def hermitian_eigvals(a) -> np.ndarray:
    """Eigenvalues only, descending; same checks as :func:`hermitian_eig`."""
    a = as_complex_matrix(a)
    _check_hermitian(a)
    try:
        w = np.linalg.eigvalsh(0.5 * (a + a.conj().T))
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return w[::-1].copy()


def psd_sqrt(a) -> np.ndarray:
    """Hermitian positive semi-definite square root.

    Eigenvalues down to ``-1e-10 ||A||_2`` are clamped to zero; anything more
    negative raises :class:`NotPSD`.
    """
    eig = hermitian_eig(a)
    scale = max(abs(eig.values[0]), abs(eig.values[-1]))
    if eig.values[-1] < -PSD_CLAMP_RTOL * scale:
        raise NotPSD(f"smallest eigenvalue {eig.values[-1]:.3e} below clamp tolerance")
    root = np.sqrt(np.clip(eig.values, 0.0, None))
    s = (eig.vectors * root) @ eig.vectors.conj().T
    return 0.5 * (s + s.conj().T)


def complex_gauss_matrix(m: int, K: int, seed: int) -> np.ndarray:
    """``m x K`` matrix of iid circular CN(0, 1) entries.

    Real and imaginary parts are independent N(0, 1/2). The stream comes from
    numpy's PCG64 generator seeded with ``seed``, with Gaussians drawn by the
    ziggurat method, so identical seeds give bit-identical matrices.
    """
    if m < 1 or K < 1:
        raise InvalidArgument(f"m and K must be >= 1, got m={m}, K={K}")
    rng = np.random.default_rng(int(seed))
    parts = rng.standard_normal((2, m, K))
    out = np.empty((m, K), dtype=np.complex128)
    out.real = parts[0]
    out.imag = parts[1]
    out *= np.sqrt(0.5)
    return out


def quad_form(s1, M, s2) -> complex:
    """Return ``s1^H M s2``."""
    s1 = _as_vector(s1, "s1")
    s2 = _as_vector(s2, "s2")
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim != 2 or M.shape != (s1.size, s2.size):
        raise DimensionMismatch(
            f"cannot form s1^H M s2 with s1 {s1.shape}, M {M.shape}, s2 {s2.shape}"
        )
    return complex(np.vdot(s1, M @ s2))


def solve_hermitian_pd(a, b, eig: HermitianEig | None = None) -> np.ndarray:
    """Solve ``A x = b`` for Hermitian positive-definite ``A``.

    Uses the eigendecomposition of ``A`` (pass ``eig`` to reuse one already
    computed). Raises :class:`Singular` when the smallest eigenvalue is not
    above ``1e-12 ||A||_2``.
    """
    if eig is None:
        eig = hermitian_eig(a)
    b = np.asarray(b, dtype=np.complex128)
    if b.shape[0] != eig.vectors.shape[0]:
        raise DimensionMismatch(f"rhs has {b.shape[0]} rows, matrix is {eig.vectors.shape[0]}")
    top = max(abs(eig.values[0]), abs(eig.values[-1]))
    if not eig.values[-1] > PD_FLOOR_RTOL * top:
        raise Singular(
            f"matrix is singular or indefinite (min eigenvalue {eig.values[-1]:.3e}, "
            f"norm {top:.3e}); an SCM needs K >= m snapshots to be invertible"
        )
    coef = eig.vectors.conj().T @ b
    if coef.ndim == 1:
        return eig.vectors @ (coef / eig.values)
    return eig.vectors @ (coef / eig.values[:, None])
