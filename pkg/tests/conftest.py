"""Shared solved fixtures; session-scoped because each solve costs seconds."""

import math

import numpy as np
import pytest

import logschroed as L

# the log-potential verification suite: dimension sweep of the constant-free
# problem plus the log-slope family at three strengths
SUITE_SPECS = {
    "gausson_n2": dict(alpha1=0.0, dimension=2, lo=1.5, hi=40.0),
    "gausson_n3": dict(alpha1=0.0, dimension=3, lo=1.5, hi=40.0),
    "gausson_n4": dict(alpha1=0.0, dimension=4, lo=1.5, hi=40.0),
    "logslope_m15": dict(alpha1=-1.5, dimension=3, lo=0.5, hi=50.0),
    "logslope_p10": dict(alpha1=1.0, dimension=3, lo=0.5, hi=50.0),
    "logslope_p30": dict(alpha1=3.0, dimension=3, lo=0.5, hi=50.0),
}

# long box so decay checks see an honest final decade even for the
# slowest-decaying suite member (positive log slope)
SUITE_CONFIG = L.IVPConfig(r_max=40.0)


@pytest.fixture(scope="session")
def suite():
    """name -> (potential, GroundState) for the six suite solutions."""
    out = {}
    for name, spec in SUITE_SPECS.items():
        pot = L.log_power(spec["alpha1"], dimension=spec["dimension"])
        problem = L.LogProblem(pot)
        res = L.find_all_roots(problem, spec["lo"], spec["hi"], n_samples=16,
                               config=SUITE_CONFIG)
        assert len(res.roots) == 1, f"{name}: expected one root"
        out[name] = (pot, res.roots[0])
    return out


@pytest.fixture(scope="session")
def gausson3(suite):
    return suite["gausson_n3"]


@pytest.fixture(scope="session")
def mu_scan():
    """Full multiplicity scan for the inverted-harmonic anchor mu = 3/16."""
    pot = L.inverted_harmonic(3.0 / 16.0, dimension=3)
    problem = L.LogProblem(pot)
    return pot, L.find_all_roots(problem, 1.0, 5.0, n_samples=64)


@pytest.fixture(scope="session")
def gausson5():
    pot = L.log_power(0.0, dimension=5)
    problem = L.LogProblem(pot)
    res = L.find_all_roots(problem, 5.0, 40.0, n_samples=12,
                           config=SUITE_CONFIG)
    assert len(res.roots) == 1
    return pot, res.roots[0]


class AnalyticProfile:
    """Closed-form stand-in with the assembled-profile interface."""

    class _Cfg:
        epsilon0 = 1e-6

    class _Prob:
        def __init__(self, dim):
            self.dim = dim

    def __init__(self, logu, dlogu, dim=3, r_max=20.0, beta=None):
        self._logu = logu
        self._dlogu = dlogu
        self.problem = self._Prob(dim)
        self.r_max = r_max
        self.config = self._Cfg()
        self.beta = beta if beta is not None else float(np.exp(logu(0.0)))
        self.tail_start = r_max

    def logu_of(self, r):
        return self._logu(np.asarray(r, dtype=float))

    def u_of(self, r):
        return np.exp(self.logu_of(r))

    def phi_of(self, r):
        return self._dlogu(np.asarray(r, dtype=float))

    def du_of(self, r):
        return self.phi_of(r) * self.u_of(r)


@pytest.fixture
def analytic_gausson():
    """e^{3/2 - r^2/2}: the N = 3 closed-form solution."""
    return AnalyticProfile(lambda r: 1.5 - 0.5 * r * r, lambda r: -r,
                           dim=3, beta=math.exp(1.5))
