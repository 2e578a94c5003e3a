"""Smoke tests for the pybind11 extension."""

import numpy as np
import pytest

wf = pytest.importorskip("_weakfactor")


def test_truncated_svd_matches_numpy():
    rng = np.random.default_rng(7)
    x = rng.standard_normal((8, 6))
    left, singular, right = wf.truncated_svd(x, 2)
    u, s, vt = np.linalg.svd(x)
    assert np.allclose(singular, s[:2], atol=1e-10)
    approx = left @ np.diag(singular) @ right.T
    ref = u[:, :2] @ np.diag(s[:2]) @ vt[:2]
    assert np.allclose(approx, ref, atol=1e-10)
    # sign convention: dominant entry of each left column is positive
    for k in range(2):
        assert left[np.argmax(np.abs(left[:, k])), k] > 0


def test_pc_fit_normalization():
    rng = np.random.default_rng(11)
    x = rng.standard_normal((30, 40))
    fit = wf.pc_fit(x, 3)
    t = x.shape[1]
    assert np.allclose(fit.factors_hat.T @ fit.factors_hat / t, np.eye(3),
                       atol=1e-8)
    gram = fit.loadings_hat.T @ fit.loadings_hat
    off = gram - np.diag(np.diag(gram))
    assert np.abs(off).max() / np.diag(gram).max() < 1e-8


def test_procrustes_recovers_planted_rotation():
    rng = np.random.default_rng(13)
    a = rng.standard_normal((20, 2))
    theta = 0.7
    rot = np.array([[np.cos(theta), -np.sin(theta)],
                    [np.sin(theta), np.cos(theta)]])
    assert np.allclose(wf.procrustes(a, a @ rot), rot, atol=1e-10)


def test_simulate_panel_is_deterministic():
    kwargs = dict(n=25, t=30, r=2, alpha=0.6, seed=99)
    a = wf.simulate_panel(**kwargs)
    b = wf.simulate_panel(**kwargs)
    assert np.array_equal(a["panel"], b["panel"])
    assert np.allclose(a["panel"],
                       a["loadings"] @ a["factors"].T + a["noise"])


def test_zero_noise_alignment_is_exact():
    inst = wf.simulate_panel(n=20, t=25, r=2, alpha=0.8, seed=5, base_sd=0.0)
    fit = wf.pc_fit(inst["panel"], 2)
    report = wf.align_to_truth(fit, inst["loadings"], inst["factors"],
                               alpha=0.8)
    assert report["per_unit_loading"].max() < 1e-8
    assert report["per_period_factor"].max() < 1e-8
    assert np.allclose(report["o"], report["sign_estimate"], atol=1e-8)


def test_leave_one_out_contract():
    inst = wf.simulate_panel(n=15, t=18, r=1, alpha=1.0, seed=3)
    loo = wf.leave_one_out(inst["panel"], inst["loadings"], inst["factors"],
                           4, 1)
    assert np.array_equal(loo["panel"][4], inst["common"][4])
    assert np.array_equal(np.delete(loo["panel"], 4, axis=0),
                          np.delete(inst["panel"], 4, axis=0))


def test_leave_neighbor_out_window():
    inst = wf.simulate_panel(n=15, t=20, r=1, alpha=1.0, seed=4)
    loo = wf.leave_neighbor_out(inst["panel"], inst["loadings"],
                                inst["factors"], 2, 3, 1)
    assert loo["members"] == [0, 1, 2, 3, 4, 5]


def test_identity_gaps_hold():
    gaps = wf.identity_gaps(n=40, t=50, r=2, alpha=0.5, seed=21)
    assert gaps["max_gap"] < 1e-8


def test_ar1_conditional_mean_against_oracle():
    phi, delta = 0.5, 2
    gamma0 = 1.0 / (1.0 - phi * phi)
    dim = 2 * delta + 3
    cov = gamma0 * phi ** np.abs(np.subtract.outer(np.arange(dim),
                                                   np.arange(dim)))
    direct = wf.ar1_conditional_mean(phi, delta, 0.4, -1.1)
    oracle = wf.gaussian_conditional_oracle(cov, [0, 2 * delta + 2],
                                            np.array([0.4, -1.1]), delta + 1)
    assert abs(direct - oracle) < 1e-12


def test_normal_quantile():
    assert abs(wf.normal_quantile(0.975) - 1.959964) < 1e-6


def test_errors_surface_as_python_exceptions():
    with pytest.raises(Exception, match="RankTooLarge"):
        wf.truncated_svd(np.eye(3), 5)
