"""Scaling transforms, collapse quality, and the conformal fits."""

import math

import numpy as np
import pytest

from qdp.scaling import (Curve, DP_EXPONENTS, ExponentSet, ScalingDataset,
                         chord_coordinate, collapse_baseline, collapse_quality,
                         crossover_rescale, fit_conformal, fit_power_law,
                         fit_steady_state, merge_datasets, rescale_dp,
                         rescale_entropy_dp)


def test_exponent_set_consistency():
    e = ExponentSet(0.159, 1.097, 1.733)
    assert abs(e.z - 1.733 / 1.097) < 1e-12
    ExponentSet(0.159, 1.097, 1.733, z=1.581)  # paper rounding tolerated
    with pytest.raises(ValueError):
        ExponentSet(0.159, 1.097, 1.733, z=1.0)


def test_rescale_dp_exact_collapse_of_planted_form():
    # n(t, L) = (t L^{-z})^{-alpha} * L^{-z alpha}: rescaled y(eta) identical
    exps = DP_EXPONENTS
    curves = []
    for L in (16, 32, 64):
        t = np.linspace(10, 4000, 300)
        eta = t * L ** (-exps.z)
        n = eta ** (-exps.alpha) * L ** (-exps.z * exps.alpha)
        curves.append(Curve(L, exps.p_c, t, n, 1e-4 * n))
    ds = ScalingDataset(curves, "n_classical")
    rs = rescale_dp(ds, exps)
    for r in rs:
        # every rescaled curve is exactly the master law eta^(-alpha)
        assert np.allclose(r.y, r.eta ** (-exps.alpha), rtol=1e-12)
        assert r.x == 0.0


def test_rescale_round_trip_bit_exact():
    exps = DP_EXPONENTS
    t = np.arange(1.0, 50.0)
    n = 0.3 * t ** -0.2
    c = Curve(32, 0.3, t, n, 0.01 * n)
    r = rescale_dp(ScalingDataset([c], "n"), exps)[0]
    # invert the pure coordinate transform
    t_back = r.eta * 32 ** exps.z
    n_back = r.y * 32 ** (-exps.z * exps.alpha)
    assert np.allclose(t_back, t, rtol=1e-13, atol=0)
    assert np.allclose(n_back, n, rtol=1e-13, atol=0)
    p_back = r.x / 32 ** (1 / exps.nu_perp) + exps.p_c
    assert abs(p_back - 0.3) < 1e-13


def test_rescale_entropy_normalization():
    t = np.arange(1.0, 10.0)
    c = Curve(16, 0.3553, t, np.zeros_like(t), np.zeros_like(t))
    ds = ScalingDataset([c], "entropy_Q", q_plus_1=997)
    r = rescale_entropy_dp(ds)[0]
    assert not r.y.any()


def test_merge_rejects_mismatched_observables():
    t = np.arange(1.0, 5.0)
    a = ScalingDataset([Curve(8, 0.1, t, t, t * 0)], "n_classical")
    b = ScalingDataset([Curve(8, 0.1, t, t, t * 0)], "entropy_Q")
    with pytest.raises(ValueError):
        merge_datasets(a, b)


def test_fit_power_law_exact():
    x = np.linspace(1, 50, 40)
    y = 3.0 * x ** (-0.159)
    fit = fit_power_law(x, y)
    assert abs(fit.exponent + 0.159) < 1e-9
    assert abs(fit.amplitude - 3.0) < 1e-9


def test_fit_power_law_refusals():
    with pytest.raises(ValueError):
        fit_power_law([1.0], [2.0])
    with pytest.raises(ValueError):
        fit_power_law([1.0, -2.0], [2.0, 3.0])
    with pytest.raises(ValueError):
        fit_power_law([1.0, 2.0], [0.0, 3.0])


def test_collapse_quality_duplicate_zero():
    x = np.linspace(0, 1, 30)
    y = np.sin(x)
    e = np.full_like(x, 0.1)
    assert collapse_quality([(x, y, e), (x, y, e)]) == 0.0


def test_collapse_quality_offset_magnitude():
    x = np.linspace(0, 1, 200)
    y = np.zeros_like(x)
    e = np.full_like(x, 0.1)
    q = collapse_quality([(x, y, e), (x, y + 1.0, e)])  # 10 sigma offset
    assert 25.0 < q < 100.0


def test_collapse_quality_permutation_invariance():
    rng = np.random.default_rng(0)
    curves = []
    for _ in range(3):
        x = np.sort(rng.random(40)) * 2
        y = np.cos(x) + 0.05 * rng.standard_normal(40)
        curves.append((x, y, np.full_like(x, 0.05)))
    q1 = collapse_quality(curves)
    q2 = collapse_quality(curves[::-1])
    assert abs(q1 - q2) < 1e-12


def test_collapse_quality_affine_reparameterization():
    rng = np.random.default_rng(1)
    curves = []
    for _ in range(3):
        x = np.sort(rng.random(200)) * 3
        y = np.sin(x) + 0.02 * rng.standard_normal(x.size)
        curves.append((x, y, np.full_like(x, 0.02)))
    q1 = collapse_quality(curves)
    q2 = collapse_quality([(3 * x + 1, y, e) for x, y, e in curves])
    assert abs(q1 - q2) < 1e-12
    # smooth monotone reparameterization: invariant up to interpolation error
    q3 = collapse_quality([(np.exp(x / 3), y, e) for x, y, e in curves])
    assert abs(q3 - q1) / q1 < 0.2


def test_collapse_quality_refusal_no_overlap():
    a = (np.array([0.0, 1.0]), np.zeros(2), np.ones(2))
    b = (np.array([5.0, 6.0]), np.zeros(2), np.ones(2))
    with pytest.raises(ValueError):
        collapse_quality([a, b])


def test_collapse_baseline_near_one():
    x = np.linspace(0, 1, 100)
    curves = [(x, np.sin(x), np.full_like(x, 0.05)) for _ in range(2)]
    base = collapse_baseline(curves, n_boot=40, seed=1)
    assert 0.5 < base < 3.0


def test_wrong_exponent_degrades_quality():
    # planted DP curves (power law with a finite-size knee, which is what
    # pins z): quality with z = 1.581 beats z = 1.0 by >= 5x
    exps = DP_EXPONENTS
    rng = np.random.default_rng(2)
    curves = []
    for L in (16, 32, 64, 128):
        t = np.unique(np.round(np.logspace(0.5, math.log10(4000), 120)))
        eta = t * L ** (-exps.z)
        n = eta ** (-exps.alpha) * np.exp(-eta / 4.0) * L ** (-exps.z * exps.alpha)
        err = 0.01 * n + 1e-9
        curves.append(Curve(L, exps.p_c, t, n + err * rng.standard_normal(n.size), err))
    ds = ScalingDataset(curves, "n")
    good = collapse_quality([(r.eta, r.y, r.yerr) for r in rescale_dp(ds, exps)])
    bad_exps = ExponentSet(exps.alpha, exps.nu_perp, exps.nu_perp,  # z = 1
                           p_c=exps.p_c)
    bad = collapse_quality([(r.eta, r.y, r.yerr)
                            for r in rescale_dp(ds, bad_exps)])
    assert bad > 5 * good


def test_fit_steady_state_planted():
    L = 256
    x12 = np.arange(8, 249, 8)
    s = 1.04 * chord_coordinate(x12, L)
    fit = fit_steady_state(x12, s, np.full_like(s, 1e-3), L)
    assert abs(fit.h_ab - 0.52) < 1e-9
    assert abs(fit.intercept) < 1e-9


def test_chord_coordinate_symmetry():
    L = 128
    x = np.arange(1, 128)
    u = chord_coordinate(x, L)
    assert np.allclose(u, u[::-1], atol=1e-12)
    # x12 = L/2 maximizes the chord coordinate
    assert np.argmax(u) == np.nonzero(x == L // 2)[0][0]


def test_fit_conformal_planted():
    # S = 0.52 * pi * L / (0.59 t): with the steady-state reference 0.52,
    # the collapse fit recovers v = 0.59 and the Eq.-33 slope 0.52
    curves = []
    for L in (64, 128, 256):
        t = np.arange(1.0, 2 * L)
        s = 0.52 * math.pi * L / (0.59 * t)
        curves.append(Curve(L, 0.1563, t, s, np.full_like(s, 1e-4)))
    ds = ScalingDataset(curves, "entropy_Q_natural")
    fit = fit_conformal(ds, h_ab_ref=0.52)
    assert abs(fit.v - 0.59) < 5e-4
    assert abs(fit.h_ab - 0.52) < 5e-4
    assert fit.quality < 1e-6


def test_fit_conformal_refuses_underdetermined():
    t = np.arange(1.0, 100)
    curves = [Curve(L, 0.15, t, 1 / t, np.full_like(t, 1e-3))
              for L in (64, 128)]
    with pytest.raises(ValueError):
        fit_conformal(ScalingDataset(curves, "s"), h_ab_ref=0.5)


def test_crossover_rescale_transform():
    t = np.arange(1.0, 10)
    c = Curve(32, 0.35, t, t * 0 + 1, t * 0)
    r = crossover_rescale(ScalingDataset([c], "s"), (100.0, 2000.0))[0]
    assert abs(r.x - 0.32) < 1e-12
    assert np.allclose(r.eta, t / 2000.0)
    with pytest.raises(ValueError):
        crossover_rescale(ScalingDataset([c], "s"), (0.0, 1.0))
