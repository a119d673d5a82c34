"""Scan structure, root refinement, tails, and large-amplitude asymptotics."""

import math

import numpy as np
import pytest

import logschroed as L
from logschroed.shooting import ShootingError


def test_scan_single_root_flat_potential(gausson3):
    pot, state = gausson3
    problem = L.LogProblem(pot)
    result = L.scan_beta(problem, 0.5, 50.0, n_samples=32)
    assert result.multiplicity == 1
    br = result.brackets[0]
    assert br.lo <= math.exp(1.5) <= br.hi
    assert result.roots[0].beta_star == pytest.approx(math.exp(1.5),
                                                      rel=1e-10)


def test_suite_roots_match_closed_forms(suite):
    for n, name in ((2, "gausson_n2"), (3, "gausson_n3"), (4, "gausson_n4")):
        _, state = suite[name]
        assert state.beta_star == pytest.approx(math.exp(n / 2.0), rel=1e-10)


def test_scan_multiplicity_anchor(mu_scan):
    _, result = mu_scan
    assert result.multiplicity == 2
    lo_root, hi_root = result.roots
    assert lo_root.beta_star == pytest.approx(math.exp(0.375), rel=1e-7)
    assert hi_root.beta_star == pytest.approx(math.exp(1.125), rel=1e-9)
    # the two refinement mechanisms: depth peak below, classification flip above
    assert lo_root.method == "depth-peak"
    assert hi_root.method == "flip-bisection"
    for root, target in ((lo_root, math.exp(0.375)), (hi_root, math.exp(1.125))):
        br = root.bracket
        assert br[0] <= target <= br[1]
    # the spurious fold boundary between the roots was seen and discarded
    assert any(tag == "fold" for *_, tag in result.discarded)
    # confirmed roots hug the zero saddle far deeper than any fold
    assert lo_root.depth < -15 and hi_root.depth < -15


def test_multiplicity_across_family():
    # two roots for mu in (0, 1/4); heights e^{3 lam} with
    # lam = (1 +- sqrt(1 - 4 mu))/4
    for mu in (0.1, 0.24):
        pot = L.inverted_harmonic(mu, dimension=3)
        result = L.find_all_roots(L.LogProblem(pot), 1.0, 5.0, n_samples=64)
        assert result.multiplicity == 2, mu
        disc = math.sqrt(1.0 - 4.0 * mu)
        lam_lo, lam_hi = (1.0 - disc) / 4.0, (1.0 + disc) / 4.0
        assert result.roots[0].beta_star == pytest.approx(
            math.exp(3 * lam_lo), rel=1e-6)
        assert result.roots[1].beta_star == pytest.approx(
            math.exp(3 * lam_hi), rel=1e-6)


def test_log_slope_family_has_one_root(suite):
    for name in ("logslope_m15", "logslope_p10", "logslope_p30"):
        pot, state = suite[name]
        problem = L.LogProblem(pot)
        result = L.scan_beta(problem, 0.5, 50.0, n_samples=32)
        assert result.multiplicity == 1
        assert result.roots[0].beta_star == pytest.approx(state.beta_star,
                                                          rel=1e-9)


def test_find_ground_requires_usable_bracket(gausson3):
    pot, _ = gausson3
    problem = L.LogProblem(pot)
    with pytest.raises(ShootingError):
        L.find_ground(problem, (20.0, 50.0))  # both endpoints cross


def test_found_root_reintegrates_as_decaying(gausson3):
    _, state = gausson3
    assert state.profile.classification.tag == L.UNDETERMINED
    # Gaussian-weighted height decreasing over the final decade
    r = np.linspace(state.profile.r_max / 10.0, state.profile.r_max, 200)
    weighted = state.profile.logu_of(r) + 0.45 * r * r
    assert np.all(np.diff(weighted) < 0)
    assert state.residual_tail < 1e-12
    assert state.bracket_width <= 1e-12 * state.beta_star * 1.01


def test_shift_covariance_constant_potential():
    # replacing V by V + c multiplies every root height by e^{c/2}
    c = math.log(4.0)
    problem = L.LogProblem(L.constant(c, dimension=3))
    result = L.find_all_roots(problem, 2.0, 40.0, n_samples=16)
    assert result.multiplicity == 1
    assert result.roots[0].beta_star == pytest.approx(
        2.0 * math.exp(1.5), rel=1e-9)


def test_trajectory_against_closed_form(gausson3):
    _, state = gausson3
    rs = np.linspace(1e-6, 6.0, 2001)
    err = np.abs(state.profile.u_of(rs) - np.exp(1.5 - rs ** 2 / 2.0))
    assert float(np.max(err)) < 1e-6


def test_gaussian_envelope_dominates_tail(gausson3):
    _, state = gausson3
    env = state.profile.gaussian_envelope()
    rs = np.linspace(state.profile.tail_start, state.profile.r_max, 200)
    bound = np.log(env["amplitude"]) - env["tau"] * rs ** 2
    assert np.all(state.profile.logu_of(rs) <= bound)


def test_scan_flags_all_undetermined():
    problem = L.LogProblem(L.constant(0.0, dimension=3))
    cfg = L.IVPConfig(r_max=1.5)
    with pytest.raises(ShootingError):
        L.scan_beta(problem, 4.46, 4.50, n_samples=8, config=cfg)


def test_scan_validates_inputs():
    problem = L.LogProblem(L.constant(0.0, dimension=3))
    with pytest.raises(ShootingError):
        L.scan_beta(problem, 5.0, 1.0)
    with pytest.raises(ShootingError):
        L.scan_beta(problem, 1.0, 5.0, n_samples=4)


def test_threaded_scan_matches_serial(gausson3):
    pot, _ = gausson3
    problem = L.LogProblem(pot)
    cfg = L.IVPConfig()
    betas = np.geomspace(1.0, 20.0, 12)
    serial = L.shooting.scan_classifications(problem, betas, cfg, threads=0)
    threaded = L.shooting.scan_classifications(problem, betas, cfg, threads=4)
    for (b1, c1), (b2, c2) in zip(serial, threaded):
        assert b1 == b2 and c1 == c2


def test_large_amplitude_asymptotics():
    problem = L.LogProblem(L.constant(0.0, dimension=3))
    reports = [L.large_beta_check(problem, b, L.IVPConfig(r_max=5.0))
               for b in (1e3, 1e4, 1e5, 1e6)]
    devs = [r.sup_deviation for r in reports]
    assert all(b < a for a, b in zip(devs, devs[1:]))
    assert devs[-1] < 0.05
    final = reports[-1]
    assert final.reference_zero == pytest.approx(math.pi / math.sqrt(2.0),
                                                 abs=1e-12)
    assert abs(final.first_zero_scaled - final.reference_zero) \
        < 0.05 * final.reference_zero
    with pytest.raises(ShootingError):
        L.large_beta_check(problem, 5.0)
