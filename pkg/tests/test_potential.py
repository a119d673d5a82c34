"""Potentials, perturbation pairs, transformed-potential values, admissibility."""

import math

import numpy as np
import pytest

from logschroed.potential import (NO_PERTURBATION, PerturbationPair,
                                  PotentialError, check_uniqueness_condition,
                                  constant, default_check_grid, from_table,
                                  inverted_harmonic, liouville_potential,
                                  liouville_potential_slope, log_power,
                                  potential_growth_advisory, power_admissible)


def test_transformed_potential_values():
    # (N-1)(N-3) kills the 1/r^2 term at N = 3
    pot = constant(0.0, dimension=3)
    assert liouville_potential(pot, 2.0) == pytest.approx(2.0 * math.log(2.0),
                                                          abs=1e-14)
    pot2 = constant(0.0, dimension=2)
    assert liouville_potential(pot2, 1.0) == pytest.approx(-0.25, abs=1e-14)
    pot3 = inverted_harmonic(3.0 / 16.0, dimension=3)
    expected = -3.0 / 16.0 * 16.0 + 2.0 * math.log(4.0)
    assert liouville_potential(pot3, 4.0) == pytest.approx(expected, rel=1e-14)
    assert expected == pytest.approx(-0.227411, abs=5e-7)


def test_transformed_potential_rejects_nonpositive_radius():
    pot = constant(0.0)
    with pytest.raises(PotentialError):
        liouville_potential(pot, 0.0)
    with pytest.raises(PotentialError):
        liouville_potential(pot, -1.0)


def test_perturbed_reduces_to_plain_at_delta_zero():
    pot = log_power(1.0, 0.5, 2.0, -0.3, dimension=4)
    pair = PerturbationPair(delta=0.0, plateau=1.0, support=2.0)
    for r in (0.05, 0.7, 1.5, 3.0, 12.0):
        assert liouville_potential(pot, r, pair) == \
            liouville_potential(pot, r)
        assert liouville_potential_slope(pot, r, pair) == \
            liouville_potential_slope(pot, r)


def test_perturbed_plateau_closed_form():
    # on the plateau K is constant, so only the log K and scaling terms act
    pot = log_power(1.0, dimension=3)
    pair = PerturbationPair(delta=0.1, plateau=1.0, support=2.0)
    k = 1.0 / 1.1
    for r in (0.2, 0.5, 0.9):
        expected = (k * pot.v(r) - math.log(k) / 2.0 + 2.0 * math.log(r))
        assert liouville_potential(pot, r, pair) == pytest.approx(expected,
                                                                  rel=1e-13)


def test_perturbed_matches_finite_difference_reconstruction():
    # independent oracle: rebuild the K-derivative terms from numerical
    # differentiation of K itself inside the transition band
    pot = log_power(1.0, dimension=3)
    pair = PerturbationPair(delta=0.1, plateau=1.0, support=2.0)

    def k_of(r):
        return pair.k(r)

    h = 1e-4
    for r in (1.2, 1.5, 1.8):
        k = k_of(r)
        k1 = (k_of(r + h) - k_of(r - h)) / (2 * h)
        k2 = (k_of(r + h) - 2 * k + k_of(r - h)) / h ** 2
        v_eff = pot.v(r) + pair.delta * pair.a(r)
        oracle = (k * v_eff - k2 / 4.0 + 3.0 * k1 ** 2 / (16.0 * k)
                  - math.log(k) / 2.0 + 2.0 * math.log(r))
        assert liouville_potential(pot, r, pair) == pytest.approx(oracle,
                                                                  abs=1e-6)


def test_slope_matches_finite_differences():
    pots = [log_power(-1.5, dimension=3), log_power(2.0, 1.0, 2.0, 0.5),
            inverted_harmonic(0.2), constant(1.3, dimension=4)]
    for pot in pots:
        for r in (0.1, 1.0, 3.7):
            h = 1e-5 * max(1.0, r)
            fd = (pot.v(r + h) - pot.v(r - h)) / (2 * h)
            assert pot.slope(r) == pytest.approx(fd, rel=1e-6, abs=1e-9)


def test_uniqueness_condition_examples():
    assert check_uniqueness_condition(log_power(1.0, dimension=3)).passed
    assert check_uniqueness_condition(constant(0.0, dimension=3)).passed
    res = check_uniqueness_condition(inverted_harmonic(3.0 / 16.0, dimension=3))
    assert not res.passed
    # slope flips sign at r = 4/sqrt(3); the witness lies at or past it
    assert res.witness >= 4.0 / math.sqrt(3.0) * 0.999


def test_uniqueness_condition_log_family_closed_form():
    # for V = a1 log r the slope is (a1 + N - 1)/r - (N-1)(N-3)/(2 r^3);
    # analysis of that closed form says every admissible a1 passes
    for n in (2, 3, 4, 5):
        for a1 in (1 - n + 0.25, -0.5, 0.0, 1.0, 4.0):
            if a1 <= 1 - n:
                continue
            res = check_uniqueness_condition(log_power(a1, dimension=n))
            assert res.passed, (n, a1, res.reason)


def test_uniqueness_condition_grid_refinement_invariant():
    cases = [log_power(1.0, dimension=3), log_power(-1.5, dimension=3),
             log_power(0.5, dimension=5), inverted_harmonic(3.0 / 16.0),
             inverted_harmonic(0.1)]
    for pot in cases:
        v1 = check_uniqueness_condition(pot, default_check_grid(n=256)).passed
        v2 = check_uniqueness_condition(pot, default_check_grid(n=512)).passed
        v3 = check_uniqueness_condition(pot, default_check_grid(n=1024)).passed
        assert v1 == v2 == v3


def test_uniqueness_condition_rejects_coarse_grid():
    with pytest.raises(PotentialError):
        check_uniqueness_condition(constant(0.0), np.geomspace(1e-3, 1e3, 32))


def test_power_admissibility():
    assert power_admissible(-1.0, 0.5, 3).passed
    res = power_admissible(-1.9, 0.3, 3)
    assert not res.passed and "2 min" in res.reason
    assert power_admissible(2.0, 1.0, 3).passed
    with pytest.raises(PotentialError):
        power_admissible(-2.5, 0.5, 3)   # alpha <= 1 - N
    with pytest.raises(PotentialError):
        power_admissible(0.0, 3.0, 3)    # sigma beyond 2/(N-2)


def test_log_power_validation():
    with pytest.raises(PotentialError):
        log_power(-2.0, dimension=3)
    with pytest.raises(PotentialError):
        log_power(0.0, alpha2=-1.0)
    log_power(-1.9, dimension=3)  # just admissible


def test_table_potential_roundtrip():
    rs = np.geomspace(1e-4, 50.0, 400)
    vals = np.log(rs)
    pot = from_table(rs, vals, dimension=3)
    assert pot.v(1.0) == pytest.approx(0.0, abs=1e-6)
    assert pot.v(7.3) == pytest.approx(math.log(7.3), rel=1e-6)
    with pytest.raises(PotentialError):
        pot.v(100.0)
    with pytest.raises(PotentialError):
        from_table([1.0, 0.5, 2.0], [0, 0, 0])


def test_perturbation_pair_shape():
    pair = PerturbationPair(delta=0.3, plateau=0.8, support=2.5)
    assert pair.b(0.0) == 1.0 and pair.b(0.8) == 1.0
    assert pair.b(2.5) == 0.0 and pair.b(5.0) == 0.0
    rs = np.linspace(0.0, 3.0, 301)
    bvals = np.array([pair.b(r) for r in rs])
    assert np.all(bvals >= 0.0) and np.all(bvals <= 1.0)
    assert all(pair.big_b(r) >= 1.0 for r in rs)
    assert all(0.0 < pair.k(r) <= 1.0 for r in rs)
    with pytest.raises(PotentialError):
        PerturbationPair(delta=-0.1)
    with pytest.raises(PotentialError):
        PerturbationPair(plateau=2.0, support=1.0)


def test_perturbation_pair_derivatives_match_fd():
    pair = PerturbationPair(delta=0.2, plateau=1.0, support=2.0)
    for r in (1.1, 1.5, 1.9):
        h = 1e-6
        fd1 = (pair.b(r + h) - pair.b(r - h)) / (2 * h)
        assert pair.b1(r) == pytest.approx(fd1, rel=1e-7, abs=1e-9)
        h = 1e-4  # second difference needs a larger step against roundoff
        fd2 = (pair.b(r + h) - 2 * pair.b(r) + pair.b(r - h)) / h ** 2
        assert pair.b2(r) == pytest.approx(fd2, rel=1e-6, abs=1e-5)
        h = 1e-5
        fd3 = (pair.b2(r + h) - pair.b2(r - h)) / (2 * h)
        assert pair.b3(r) == pytest.approx(fd3, rel=1e-5, abs=1e-5)


def test_growth_advisory_is_nonblocking():
    report = potential_growth_advisory(log_power(1.0, dimension=3))
    assert report["ratio_ok"] and report["locally_integrable"]
    with pytest.warns(UserWarning):
        bad = potential_growth_advisory(inverted_harmonic(0.2, dimension=3))
    assert not bad["ratio_ok"]
