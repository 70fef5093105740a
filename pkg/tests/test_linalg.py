import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lrsinr import linalg
from lrsinr.errors import DimensionMismatch, NotHermitian, NotPSD, Singular


def random_hermitian(rng, n, psd=False):
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return G @ G.conj().T if psd else G + G.conj().T


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 12), seed=st.integers(0, 2**32 - 1))
def test_eig_reconstructs_and_is_sorted(n, seed):
    A = random_hermitian(np.random.default_rng(seed), n)
    eig = linalg.hermitian_eig(A)
    assert np.all(np.diff(eig.values) <= 1e-12)
    assert np.allclose(eig.reconstruct(), A, atol=1e-10 * max(1.0, np.linalg.norm(A)))
    assert np.allclose(eig.vectors.conj().T @ eig.vectors, np.eye(n), atol=1e-10)


def test_eig_phase_convention():
    A = random_hermitian(np.random.default_rng(3), 6)
    V = linalg.hermitian_eig(A).vectors
    piv = V[np.argmax(np.abs(V), axis=0), np.arange(6)]
    assert np.allclose(piv.imag, 0.0) and np.all(piv.real > 0)


def test_eig_diagonal_oracle():
    d = np.array([3.0, -1.0, 7.0, 0.5])
    eig = linalg.hermitian_eig(np.diag(d))
    assert eig.values.tolist() == [7.0, 3.0, 0.5, -1.0]
    assert np.allclose(linalg.hermitian_eigvals(np.diag(d)), eig.values)


def test_eig_rejects_bad_input():
    with pytest.raises(NotHermitian):
        linalg.hermitian_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(DimensionMismatch):
        linalg.hermitian_eig(np.ones((2, 3)))


def test_psd_sqrt_squares_back():
    A = random_hermitian(np.random.default_rng(5), 8, psd=True)
    S = linalg.psd_sqrt(A)
    assert np.allclose(S @ S, A, atol=1e-9 * np.linalg.norm(A))
    assert np.allclose(S, S.conj().T)


def test_psd_sqrt_clamps_and_rejects():
    tiny = np.diag([1.0, -1e-13])
    assert np.allclose(linalg.psd_sqrt(tiny), np.diag([1.0, 0.0]))
    with pytest.raises(NotPSD):
        linalg.psd_sqrt(np.diag([1.0, -0.1]))


def test_gauss_matrix_is_reproducible_and_circular():
    a = linalg.complex_gauss_matrix(50, 400, seed=11)
    b = linalg.complex_gauss_matrix(50, 400, seed=11)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, linalg.complex_gauss_matrix(50, 400, seed=12))
    assert abs(np.mean(np.abs(a) ** 2) - 1.0) < 0.02
    assert abs(np.mean(a.real**2) - 0.5) < 0.02
    assert abs(np.mean(a**2)) < 0.02  # pseudo-covariance vanishes


def test_quad_form_and_solve():
    rng = np.random.default_rng(2)
    A = random_hermitian(rng, 5, psd=True) + np.eye(5)
    b = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    x = linalg.solve_hermitian_pd(A, b)
    assert np.allclose(A @ x, b)
    assert np.isclose(linalg.quad_form(b, A, b), np.vdot(b, A @ b))
    with pytest.raises(DimensionMismatch):
        linalg.quad_form(b, A, b[:3])
    with pytest.raises(Singular):
        linalg.solve_hermitian_pd(np.diag([1.0, 0.0]), np.ones(2))
