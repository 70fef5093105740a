import math

import numpy as np
import pytest

from lrsinr import experiments as ex
from lrsinr.asymptotics import MpLaw, spike_limit
from lrsinr.errors import InvalidArgument
from lrsinr.scenario import ScenarioConfig, steering_vector

QF_EIGS = (1.0, 21.0, 31.0, 71.0)


def test_trial_seed_frozen():
    assert ex.trial_seed(0, 0, 0) == 15793235383387715774
    assert ex.trial_seed(12345, 2, 7) == 10954615165991602734
    seeds = {ex.trial_seed(1, s, t) for s in range(3) for t in range(100)}
    assert len(seeds) == 300


def test_mc_config_validation():
    with pytest.raises(InvalidArgument):
        ex.McConfig(trials=0)
    with pytest.raises(InvalidArgument):
        ex.McConfig(trials=1, master_seed=-1)


@pytest.mark.parametrize("threads", [0, 2, 5])
def test_run_trials_independent_of_threads(threads):
    def kernel(seed):
        return np.random.default_rng(seed).standard_normal(3)

    serial = ex.run_trials(kernel, ex.McConfig(23, 9, 1), stream=4)
    pooled = ex.run_trials(kernel, ex.McConfig(23, 9, threads), stream=4)
    assert serial.tobytes() == pooled.tobytes()


def test_mc_stats_single_trial():
    mean, std = ex.mc_stats(np.array([[0.3, 2.0]]))
    assert mean.tolist() == [0.3, 2.0] and std.tolist() == [0.0, 0.0]
    mean, std = ex.mc_stats(np.array([1.0, 3.0]))
    assert mean == 2.0 and math.isclose(std, math.sqrt(2.0) / math.sqrt(2.0))


def test_population_spectrum_modes():
    fixed = ex.population_spectrum([1, 2, 3, 7], 20)
    assert fixed.tolist() == [7, 3, 2] + [1] * 17
    prop = ex.population_spectrum([1, 2, 3, 7], 20, "proportional")
    assert (prop == 7).sum() == 5 and (prop == 1).sum() == 5
    with pytest.raises(InvalidArgument):
        ex.population_spectrum([1, 2], 20, "other")


def test_noise_only_histogram_inside_mp_support():
    res = ex.eigen_pdf_histogram(np.ones(200), 0.5, ex.McConfig(100, 3), bins=60)
    law = MpLaw.from_ratio(0.5)
    pooled = res.raw.ravel()
    inside = np.mean((pooled >= law.lambda_minus - 0.05) & (pooled <= law.lambda_plus + 0.05))
    assert inside >= 0.99
    widths = res.column("bin_right") - res.column("bin_left")
    assert math.isclose(float(np.sum(res.column("density") * widths)), 1.0)
    assert res.meta["K"] == 400 and "tau_1" not in res.meta


def test_fixed_multiplicity_spikes_near_limits():
    res = ex.eigen_pdf_histogram(ex.population_spectrum([1, 2, 3, 7], 200), 0.1, ex.McConfig(40, 5))
    tops = res.raw[:, :3].mean(axis=0)
    want = [7.116666666666667, 3.15, 2.2]
    assert np.allclose([res.meta[f"tau_{i}"] for i in (1, 2, 3)], want)
    assert np.allclose(tops, want, rtol=0.05)


def test_jamming_histogram_has_isolated_clusters(jam_model):
    res = ex.eigen_pdf_histogram(jam_model, 0.2, ex.McConfig(20, 2), bins=200)
    assert all(res.meta[f"separated_{i}"] for i in (1, 2, 3))
    edges = res.meta["mp_lambda_plus"]
    outliers = res.raw[:, :3]
    assert np.all(outliers > edges + 1.0)
    assert np.all(res.raw[:, 3:] < edges + 0.3)


def test_histogram_rejects_few_bins(jam_model):
    with pytest.raises(InvalidArgument):
        ex.eigen_pdf_histogram(jam_model, 0.2, ex.McConfig(1), bins=5)


def test_separation_sweep_examples(jam_cfg):
    grid = [round(-10 + 0.05 * i, 2) for i in range(401)]
    res = ex.separation_sweep(jam_cfg, grid, [0.04, 2.0])
    crossing = res.meta["zero_crossing_db_c=0.04"]
    assert abs(crossing - 10 * math.log10(0.2)) < 0.01
    row = next(r for r in res.rows if r["c"] == 2.0 and r["jnr_db"] == 4.0)
    assert math.isclose(row["margin"], 10**0.4 - math.sqrt(2.0))
    assert row["margin"] > 0
    bigger = ex.separation_sweep(jam_cfg.with_m(400), grid, [0.04, 2.0])
    assert bigger.rows == res.rows
    assert math.isclose(ex.separation_threshold_db(jam_cfg, 0.04), 10 * math.log10(0.2))


def test_mse_qf_single_trial_convention(jam_cfg):
    res = ex.mse_structured_qf_sweep(jam_cfg, QF_EIGS, 0.1, [30], ex.McConfig(1, 8))
    row = res.rows[0]
    assert row["mc_std"] == 0.0 and row["trials"] == 1
    assert math.isclose(row["mse_naive"], (row["mc_mean"] - row["prediction_naive"]) ** 2)


def test_mse_qf_corrected_equivalent_converges(jam_cfg):
    res = ex.mse_structured_qf_sweep(jam_cfg, QF_EIGS, 0.1, [50, 100, 200], ex.McConfig(150, 4))
    mse = res.column("mse_corrected")
    assert np.all(np.diff(mse) < 0)
    assert mse[-1] * 3 < res.rows[-1]["mse_naive"]
    # the leakage term is what separates the two equivalents at every size
    assert np.all(res.column("prediction_corrected") > 5 * res.column("prediction_spiked"))


def test_mse_sinr_example_c3():
    cfg = ScenarioConfig(33, (20.0,), (1.0,))
    res = ex.mse_sinr_loss_sweep(cfg, 3.0, [33, 66, 132, 264], 50.0, ex.McConfig(300, 7))
    assert res.column("K").tolist() == [11, 22, 44, 88]
    mse = res.column("mse_spiked")
    assert np.all(np.diff(mse) < 0)
    assert mse[-1] < res.rows[-1]["mse_naive"]


def test_mse_sinr_small_c_limits_coincide(jam_cfg):
    res = ex.mse_sinr_loss_sweep(jam_cfg, 0.01, [200], 50.0, ex.McConfig(10, 7))
    row = res.rows[0]
    assert row["mse_spiked"] < 1e-6 and row["mse_naive"] < 1e-6
    assert 0.5 <= row["mse_spiked"] / row["mse_naive"] <= 2.0


def test_sweep_k_large_k_matches_clairvoyant(jam_cfg):
    res = ex.sinr_loss_vs_k(jam_cfg, 50.0, [1000], ex.McConfig(30, 3))
    assert len(res.rows) == 1
    row = res.rows[0]
    assert abs(row["mc_mean"] - row["prediction_naive"]) < 0.02
    assert row["prediction_gifo"] == 1 - 3 / 1000
    with pytest.raises(InvalidArgument):
        ex.sinr_loss_vs_k(jam_cfg, 50.0, [3], ex.McConfig(1))


def test_sweep_theta_flags_jammer_and_keeps_gifo(jam_cfg):
    grid = [19.95, 20.0, 20.05, 50.0]
    res = ex.sinr_loss_vs_theta(jam_cfg, 6, grid, ex.McConfig(50, 3))
    assert len(res.rows) == 4
    assert [bool(r.get("flag")) for r in res.rows] == [False, True, False, False]
    assert set(res.column("prediction_gifo")) == {0.5}
    assert np.all(np.isfinite(res.column("mc_mean")))


def test_sweep_theta_far_target_within_tenth(jam_cfg):
    res = ex.sinr_loss_vs_theta(jam_cfg, 6, [50.0], ex.McConfig(300, 3))
    row = res.rows[0]
    assert abs(row["prediction_spiked"] - row["mc_mean"]) <= 0.1


def test_mc_std_scales_with_trials(jam_cfg):
    small = ex.sinr_loss_vs_k(jam_cfg, 30.0, [20], ex.McConfig(100, 11)).rows[0]["mc_std"]
    large = ex.sinr_loss_vs_k(jam_cfg, 30.0, [20], ex.McConfig(400, 11)).rows[0]["mc_std"]
    assert 0.25 <= large / small <= 1.0


def test_sweeps_do_not_mutate_inputs(jam_cfg):
    grid = [10.0, 30.0]
    eigs = list(QF_EIGS)
    ex.sinr_loss_vs_theta(jam_cfg, 8, grid, ex.McConfig(2, 1))
    ex.mse_structured_qf_sweep(jam_cfg, eigs, 0.1, [20], ex.McConfig(2, 1))
    assert grid == [10.0, 30.0] and eigs == list(QF_EIGS)


def test_same_seed_same_result(jam_cfg):
    a = ex.mse_sinr_loss_sweep(jam_cfg, 0.5, [40], 50.0, ex.McConfig(1, 99))
    b = ex.mse_sinr_loss_sweep(jam_cfg, 0.5, [40], 50.0, ex.McConfig(1, 99))
    assert a.rows == b.rows


def test_predict_report(jam_cfg):
    rep = ex.predict(jam_cfg, 50.0, 0.06)
    rep.check()
    assert math.isclose(rep.pred_fullrank, 0.94) and math.isclose(rep.pred_gifo, 1 - 3 * 0.06 / 100)
    high = ex.predict(jam_cfg, 50.0, 2.0)
    assert high.pred_fullrank is None and "fullrank" in high.flag


def test_simulate_report(jam_cfg):
    rep = ex.simulate(jam_cfg, 50.0, 200, ex.McConfig(40, 2))
    rep.check()
    assert abs(rep.rho_hat - 0.5) < 0.05
    short = ex.simulate(jam_cfg, 50.0, 50, ex.McConfig(3, 2))
    assert short.rho_hat is None and short.rho_hat_lr is not None
