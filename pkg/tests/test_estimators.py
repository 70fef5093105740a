import math

import numpy as np
import pytest

from lrsinr import estimators as est
from lrsinr.asymptotics import deterministic_projector
from lrsinr.errors import AdaptiveFilterUnavailable, DegenerateSteering, InvalidArgument, RankTooLarge, Singular
from lrsinr.scenario import draw_samples, steering_vector


def test_true_projector_idempotent(jam_model):
    pp = est.true_projectors(jam_model)
    assert np.allclose(pp.pi_c @ pp.pi_c, pp.pi_c)
    assert np.allclose(pp.pi_c + pp.pi_c_perp, np.eye(100))
    a = steering_vector(7.0, 100)
    assert np.allclose(pp.apply_perp(a), pp.pi_c_perp @ a)


def test_estimated_projector_rank(jam_model):
    s = draw_samples(jam_model, 300, 1)
    pp = est.estimated_projectors(s, 3)
    assert np.isclose(np.trace(pp.pi_c).real, 3.0)
    with pytest.raises(RankTooLarge):
        est.estimated_projectors(s, 100)


def test_filters_and_losses(jam_model):
    a = steering_vector(40.0, 100)
    s = draw_samples(jam_model, 400, 2)
    f = est.filters(jam_model, s, a)
    assert f.adaptive_available
    # optimal filter attains loss one
    assert math.isclose(est.sinr_loss_fullrank(jam_model.R, jam_model, a), 1.0, rel_tol=1e-12)
    assert 0 < est.sinr_loss_fullrank(s, jam_model, a) < 1
    true_lr = est.sinr_loss_lr(jam_model, a, est.true_projectors(jam_model))
    mat_lr = est.sinr_loss_lr(jam_model, a, est.true_projectors(jam_model).pi_c_perp)
    assert math.isclose(true_lr, mat_lr, rel_tol=1e-12) and true_lr > 0.99
    det = est.sinr_loss_lr(jam_model, a, deterministic_projector(jam_model, 0.25))
    assert 0 < det <= 1


def test_fullrank_needs_enough_snapshots(jam_model):
    a = steering_vector(40.0, 100)
    s = draw_samples(jam_model, 60, 3)
    assert est.filters(jam_model, s, a).w_hat is None
    with pytest.raises(AdaptiveFilterUnavailable):
        est.filters(jam_model, s, a, strict=True)
    with pytest.raises(Singular):
        est.sinr_loss_fullrank(draw_samples(jam_model, 101, 3), jam_model, a)


def test_lr_loss_on_jammer_is_degenerate(jam_model):
    a = steering_vector(20.0, 100)
    with pytest.raises(DegenerateSteering):
        est.sinr_loss_lr(jam_model, a, est.true_projectors(jam_model))


def test_empirical_cdf_and_stieltjes():
    vals = [1.0, 2.0, 2.0, 5.0]
    F = est.empirical_cdf(vals)
    assert F(0.5) == 0.0 and F(2.0) == 0.75 and F(10) == 1.0
    assert np.allclose(F(np.array([1.0, 4.0])), [0.25, 0.75])
    z = 3 + 0.5j
    assert np.isclose(est.empirical_stieltjes(vals, z), np.mean([1 / (v - z) for v in vals]))
    with pytest.raises(InvalidArgument):
        est.empirical_stieltjes(vals, 1.0)


def test_stieltjes_density_is_cauchy_smoothing():
    # single atom at 0: Im b(x + i eps) / pi is the Cauchy density with scale eps
    eps = 0.2
    for x in (0.0, 0.3, -1.0):
        want = eps / (math.pi * (x * x + eps * eps))
        assert math.isclose(est.pdf_from_stieltjes(lambda z: est.empirical_stieltjes([0.0], z), x, eps), want)


def test_report_bounds():
    est.SinrLossReport(0.5, 0.9, 0.8, 0.5, 0.85, 0.5).check()
    with pytest.raises(ValueError):
        est.SinrLossReport(1.2, None, None, None, None, None).check()
