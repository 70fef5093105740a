import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lrsinr import asymptotics as rmt
from lrsinr.errors import IndexOutOfRange, InvalidArgument, InvalidRegime, SeparationViolated
from lrsinr.scenario import covariance_from_spikes, draw_samples, steering_vector


def tau_exact(omega, c):
    omega, c = Fraction(omega), Fraction(c)
    return 1 + omega + c * (1 + omega) / omega


@pytest.mark.parametrize("omega, c", [(6, "0.1"), (2, "0.1"), (1, "0.1"), (6, "1.5"), (60, "0.2"), (3, 4)])
def test_spike_limit_against_rationals(omega, c):
    want = float(tau_exact(omega, Fraction(c)))
    assert math.isclose(float(rmt.spike_limit(omega, float(Fraction(c)))), want, rel_tol=1e-14)


@pytest.mark.parametrize("c", [0.05, 0.3, 1.0, 2.5])
def test_alignment_limits(c):
    w = np.array([10.0 * math.sqrt(c), 1e6])
    chi = rmt.eigvec_alignment(w, c)
    assert np.all((0 < chi) & (chi < 1))
    assert math.isclose(chi[1], 1.0, abs_tol=1e-5)
    # vanishes at the separation boundary
    assert math.isclose(float(rmt.eigvec_alignment(math.sqrt(c), c)), 0.0, abs_tol=1e-12)


@pytest.mark.parametrize("c", [0.1, 0.5, 0.9, 2.0])
def test_mp_law_mass(c):
    law = rmt.MpLaw.from_ratio(c)
    assert math.isclose(law.lambda_minus, (1 - math.sqrt(c)) ** 2)
    assert math.isclose(law.lambda_plus, (1 + math.sqrt(c)) ** 2)
    assert math.isclose(law.atom_at_zero, max(0.0, 1 - 1 / c))
    # substitution x = a + (b - a) sin^2(t) removes the edge singularities
    t = np.linspace(0.0, math.pi / 2, 20001)
    a, b = law.lambda_minus, law.lambda_plus
    x = a + (b - a) * np.sin(t) ** 2
    integrand = rmt.mp_pdf(x, c) * (b - a) * 2 * np.sin(t) * np.cos(t)
    mass = float(np.sum(0.5 * (integrand[1:] + integrand[:-1]) * np.diff(t)))
    assert math.isclose(mass + law.atom_at_zero, 1.0, abs_tol=1e-6)
    assert rmt.mp_pdf(b + 0.1, c) == 0.0


def test_separation_check_reports_indices():
    with pytest.raises(SeparationViolated) as info:
        rmt.check_separation([5.0, 0.5, 0.1], 1.0)
    assert info.value.indices == (1, 2)
    rmt.check_separation([5.0, 1.01], 1.0)
    with pytest.warns(RuntimeWarning), pytest.raises(SeparationViolated):
        rmt.check_separation([1.0 + 1e-12], 1.0)


def random_model(rng, m, r):
    G = rng.standard_normal((m, r)) + 1j * rng.standard_normal((m, r))
    U, _ = np.linalg.qr(G)
    spikes = np.sort(rng.uniform(3.0, 40.0, r))[::-1]
    return covariance_from_spikes(U, spikes, float(rng.uniform(0.5, 2.0)))


def cvec(rng, m):
    return rng.standard_normal(m) + 1j * rng.standard_normal(m)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), r=st.integers(1, 4), c=st.floats(0.01, 1.5))
def test_projector_apply_matches_matrix(seed, r, c):
    rng = np.random.default_rng(seed)
    model = random_model(rng, 12, r)
    proj = rmt.deterministic_projector(model, c)
    s = cvec(rng, 12)
    assert np.allclose(proj.apply(s), proj.matrix @ s)
    # weights: psi on spike directions, one elsewhere
    assert np.allclose(np.linalg.eigvalsh(proj.matrix), np.sort(np.r_[proj.psis, np.ones(12 - r)]))


def test_base_qf_index_checks(jam_model):
    s = steering_vector(10.0, 100)
    with pytest.raises(IndexOutOfRange):
        rmt.deterministic_base_qf(3, 0, s, jam_model.R, s, jam_model, 0.1)
    v = rmt.deterministic_base_qf(0, 0, s, jam_model.R, s, jam_model, 0.1)
    chi = rmt.eigvec_alignment(60.0, 0.1)
    u = jam_model.basis[:, 0]
    assert np.isclose(v, chi**2 * abs(np.vdot(s, u)) ** 2 * 61.0)


def test_leakage_beta_for_covariance(jam_model):
    # for B = R the noise-subspace average of B is sigma2
    u = jam_model.basis[:, 1]
    val = rmt.noise_leakage_term(u, jam_model.R, u, jam_model, 0.5)
    chi = float(rmt.eigvec_alignment(20.0, 0.5))
    assert np.isclose(val, chi * (1 - chi))


def test_leakage_restores_noise_floor_bound():
    # s = u_j: s^H Pihat R Pihat s >= sigma2 |Pihat u_j|^2 -> sigma2 psi_j for any sample
    U = np.eye(60, 1, dtype=complex)
    model = covariance_from_spikes(U, [3.0], 1.0)
    c = 0.5
    psi = 1 - float(rmt.eigvec_alignment(2.0, c))
    s = U[:, 0]
    plain = rmt.deterministic_structured_qf(s, model.R, s, model, c).real
    fixed = rmt.deterministic_structured_qf(s, model.R, s, model, c, corrected=True).real
    assert plain < psi < fixed + 1e-12
    assert math.isclose(plain, psi**2 * 3.0)
    draws = []
    for seed in range(40):
        eig = draw_samples(model, 120, seed).eig
        p = s - eig.vectors[:, :1] @ (eig.vectors[:, :1].conj().T @ s)
        draws.append(np.vdot(p, model.apply(p)).real)
    assert abs(np.mean(draws) - fixed) < abs(np.mean(draws) - plain)


def test_fullrank_and_gifo():
    assert rmt.predict_sinr_loss_fullrank(0.25) == 0.75
    with pytest.raises(InvalidRegime):
        rmt.predict_sinr_loss_fullrank(1.0)
    assert rmt.predict_gifo_baseline(3, 6) == 0.5
    with pytest.raises(InvalidArgument):
        rmt.predict_gifo_baseline(3, 3)


def test_lr_prediction_reduces_to_clairvoyant(jam_model):
    a = steering_vector(45.0, 100)
    pa = a - jam_model.basis @ (jam_model.basis.conj().T @ a)
    clair = rmt.lr_sinr_loss_from_perp(jam_model, a, pa)
    for corrected in (False, True):
        assert math.isclose(rmt.predict_sinr_loss_lr(jam_model, a, 1e-6, corrected), clair, rel_tol=1e-5)
    assert 0.0 < rmt.predict_sinr_loss_lr(jam_model, a, 3.0) <= 1.0


def test_break_on_synthetic_curve():
    thetas = np.arange(20.0, 24.01, 0.5)
    values = np.clip((thetas - 20.0) / 2.0, 0, 1)  # 0 at jammer, plateau 1 from 22 deg
    brk = rmt.performance_break(thetas, values, 20.0, 1.0)
    assert math.isclose(brk, 21.0)
    assert rmt.performance_break(thetas, np.ones_like(thetas), 20.0, 1.0) is None
    assert rmt.far_field_plateau([-60.0, 0.0, 19.0, 50.0], [0.9, 0.8, 0.1, 1.0], 20.0) == 0.9
