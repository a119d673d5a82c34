"""Startup series, event classification, and the reference oscillator mode."""

import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

import logschroed as L
from logschroed.radial_ivp import IntegrationError


def test_startup_gausson_taylor():
    # u = beta e^{-r^2/2}: u(eps) = beta (1 - eps^2/2 + O(eps^4)), u' = -beta eps
    pot = L.constant(0.0, dimension=3)
    problem = L.LogProblem(pot)
    beta = math.exp(1.5)
    eps = 1e-6
    u, du = L.startup(problem, beta, eps)
    assert u == pytest.approx(beta * (1.0 - eps ** 2 / 2.0), rel=1e-15)
    assert du == pytest.approx(-beta * eps, rel=1e-6)


def test_startup_constant_solution_is_stationary():
    # with V = c and log beta^2 = c the source vanishes identically
    c = 0.8
    pot = L.constant(c, dimension=3)
    problem = L.LogProblem(pot)
    beta = math.exp(c / 2.0)
    eps = 1e-6
    u, du = L.startup(problem, beta, eps)
    assert abs(u - beta) <= 1e-12 * eps
    assert abs(du) <= 1e-12 * eps


def test_startup_singular_potential_self_convergence():
    # oracle: start at eps/2 with a deeper Picard series, integrate the two
    # log-variable equations to eps, compare
    pot = L.log_power(1.0, dimension=3)
    problem = L.LogProblem(pot)
    beta, eps = 2.0, 1e-4
    u, du = L.startup(problem, beta, eps)
    u_half, du_half = L.startup(problem, beta, eps / 2.0, iterations=4)

    def rhs(r, y):
        w, phi = y
        return [phi, -phi * phi - 2.0 / r * phi + pot.v(r) - 2.0 * w]

    sol = solve_ivp(rhs, (eps / 2.0, eps), [math.log(u_half), du_half / u_half],
                    method="DOP853", rtol=1e-13, atol=1e-15)
    u_oracle = math.exp(sol.y[0, -1])
    assert u == pytest.approx(u_oracle, abs=1e-10 * beta)


def test_startup_rejects_nonpositive_beta():
    problem = L.LogProblem(L.constant(0.0))
    with pytest.raises(IntegrationError):
        L.startup(problem, -1.0, 1e-6)


def test_integrate_exact_gausson_height():
    problem = L.LogProblem(L.constant(0.0, dimension=3))
    sol = L.integrate(problem, math.exp(1.5))
    # the trajectory tracks the closed form well past r = 5 before the
    # float-level height error peels it off
    assert sol.r_end > 5.0
    assert float(sol.u_of(5.0)) == pytest.approx(math.exp(1.5 - 12.5),
                                                 abs=1e-8)


def test_integrate_classification_examples():
    problem = L.LogProblem(L.constant(0.0, dimension=3))
    big = L.integrate(problem, 10.0)
    assert big.classification.tag == L.CROSSES_ZERO
    assert 0 < big.classification.radius < 20.0
    small = L.integrate(problem, 0.5)
    assert small.classification.tag == L.GROWS


def test_classifications_match_fixed_step_oracle():
    # coarse linear-variable RK4: the independent check that small heights
    # turn back up and large ones cross
    def oracle(beta, h=1e-3, r_max=12.0):
        r, u, du = 1e-6, beta, 0.0

        def f(rr, y0, y1):
            nl = 2.0 * y0 * math.log(abs(y0)) if abs(y0) > 1e-300 else 0.0
            return y1, -2.0 / rr * y1 - nl

        while r < r_max:
            k1 = f(r, u, du)
            k2 = f(r + h / 2, u + h / 2 * k1[0], du + h / 2 * k1[1])
            k3 = f(r + h / 2, u + h / 2 * k2[0], du + h / 2 * k2[1])
            k4 = f(r + h, u + h * k3[0], du + h * k3[1])
            u_new = u + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            du_new = du + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
            r += h
            if u_new <= 0:
                return "cross", r
            if du_new > 0 and du < 0:
                return "grow", r
            u, du = u_new, du_new
        return "undet", r

    problem = L.LogProblem(L.constant(0.0, dimension=3))
    for beta in (0.5, 2.0, 6.0, 10.0):
        mine = L.integrate(problem, beta).classification
        ref_tag, ref_r = oracle(beta)
        expected = {"cross": L.CROSSES_ZERO, "grow": L.GROWS}[ref_tag]
        assert mine.tag == expected, beta
        assert mine.radius == pytest.approx(ref_r, abs=0.05)


def test_constant_solution_preserved_to_r_max():
    c = math.log(4.0)
    problem = L.LogProblem(L.constant(c, dimension=3))
    beta = math.exp(c / 2.0)
    sol = L.integrate(problem, beta)
    assert sol.classification.tag == L.UNDETERMINED
    rs = np.linspace(1e-6, sol.r_end, 500)
    assert np.max(np.abs(sol.u_of(rs) - beta)) < 1e-7


def test_self_convergence_under_tolerance_halving():
    problem = L.LogProblem(L.constant(0.0, dimension=3))
    beta, probe = 3.0, 2.5
    u_vals = []
    for rt in (1e-10, 5e-11):
        cfg = L.IVPConfig(rel_tol=rt, abs_tol=1e-13)
        sol = L.integrate(problem, beta, cfg)
        assert sol.r_end > probe
        u_vals.append(float(sol.u_of(probe)))
    assert abs(u_vals[0] - u_vals[1]) < 10 * 5e-11 * max(1.0, u_vals[1])


def test_trajectory_satisfies_ode_residual():
    pot = L.log_power(1.0, dimension=3)
    problem = L.LogProblem(pot)
    # same tolerances the assembled profiles are integrated with
    cfg = L.IVPConfig(rel_tol=1e-12, abs_tol=1e-13)
    for beta in (2.0, 6.0):
        sol = L.integrate(problem, beta, cfg)
        rs = np.linspace(4e-3, sol.r_end * 0.98, 300)
        checked = 0
        for r in rs[::17]:
            phi = float(sol.phi_of(r))
            if abs(phi) > 2.5:
                continue  # crossing-dive endgame: slope too steep for FD
            # step scales with r near the origin and shrinks where the slope
            # steepens, balancing truncation against dense-output noise
            h = min(1e-3, 2e-3 * r, 3e-4 / (1.0 + 0.5 * phi * phi))
            u = float(sol.u_of(r))
            dphi = (float(sol.phi_of(r + h)) - float(sol.phi_of(r - h))) / (2 * h)
            resid = u * (dphi + phi * phi + 2.0 / r * phi - pot.v(r)
                         + 2.0 * float(sol.logu_of(r)))
            assert abs(resid) < 1e-6 * max(1.0, abs(u))
            checked += 1
        assert checked >= 10


def test_clamped_stop_reports_state():
    problem = L.LogProblem(L.constant(0.0, dimension=3))
    beta = math.exp(1.5)
    sol = L.integrate(problem, beta, stop_at_u_rel=1e-2)
    assert sol.clamped
    r_c, w_c, phi_c = sol.clamp_state
    assert w_c == pytest.approx(math.log(beta * 1e-2), abs=1e-9)
    assert float(sol.u_of(r_c)) == pytest.approx(beta * 1e-2, rel=1e-8)


# --- reference oscillator mode ------------------------------------------------

def test_bessel_mode_closed_form_n3():
    prof = L.bessel_mode(3, 2.0)
    rs = np.linspace(1e-3, prof.first_zero + 0.5, 300)
    ref = np.sin(math.sqrt(2.0) * rs) / (math.sqrt(2.0) * rs)
    assert np.max(np.abs(prof(rs) - ref)) < 1e-12
    assert prof.first_zero == pytest.approx(math.pi / math.sqrt(2.0),
                                            abs=1e-12)


def test_bessel_mode_n2_against_independent_integrator():
    prof = L.bessel_mode(2, 1.0)
    assert prof.first_zero == pytest.approx(2.404825557695773, abs=1e-10)

    # independent fixed-step check of the profile values
    h, r = 1e-4, 1e-4
    w, dw = 1.0 - 0.25 * r * r, -0.5 * r
    while r < 2.0:
        def f(rr, y0, y1):
            return y1, -y1 / rr - y0
        k1 = f(r, w, dw)
        k2 = f(r + h / 2, w + h / 2 * k1[0], dw + h / 2 * k1[1])
        k3 = f(r + h / 2, w + h / 2 * k2[0], dw + h / 2 * k2[1])
        k4 = f(r + h, w + h * k3[0], dw + h * k3[1])
        w += h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        dw += h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        r += h
    assert float(prof(r)) == pytest.approx(w, abs=1e-8)


def test_bessel_mode_scaling_law():
    # first zero scales like 1/sqrt(b0)
    vals = [L.bessel_mode(3, b0).first_zero * math.sqrt(b0)
            for b0 in (0.5, 1.0, 2.0, 4.0, 8.0)]
    assert max(vals) - min(vals) < 1e-8
    assert L.bessel_mode(3, 8.0).first_zero == pytest.approx(
        math.pi / (2.0 * math.sqrt(2.0)), abs=1e-12)


def test_bessel_mode_rejects_bad_coefficient():
    with pytest.raises(ValueError):
        L.bessel_mode(3, 0.0)


def test_config_validation():
    with pytest.raises(ValueError):
        L.IVPConfig(epsilon0=0.5)
    with pytest.raises(ValueError):
        L.IVPConfig(rel_tol=-1.0)
    with pytest.raises(ValueError):
        L.IVPConfig(r_max=0.5)
