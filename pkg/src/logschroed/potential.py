"""Radial potentials, compact perturbation pairs, and admissibility checks.

The solver works with the radial equation

    u'' + (N-1)/r u' - V_eff(r) u + B(r) u log u^2 = 0,

where V_eff = V + delta*a and B = 1 + delta*b.  After the Liouville
substitution v = K^{-1/4} r^{(N-1)/2} u (K = 1/B) the first-derivative term
drops out and the transformed potential

    G(r)       = V(r) + (N-1)(N-3)/(4 r^2) + (N-1) log r          (delta = 0)
    G_delta(r) = K V_eff - K''/4 + 3 K'^2/(16 K)
                 + (N-1)(N-3) K/(4 r^2) - log(K)/2 + (N-1) log r

controls the uniqueness diagnostics: the sign pattern of G' (or r^3 G' for
N >= 4) is the condition checked by ``check_uniqueness_condition``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator


class PotentialError(ValueError):
    """Invalid potential or perturbation parameters."""


def _fd5(f: Callable[[float], float], r: float) -> float:
    # 5-point central difference, step scaled to r
    h = max(1e-5, 1e-4 * r)
    if r - 2 * h <= 0:
        h = r / 4.0
    vals = [f(r + k * h) for k in (-2, -1, 1, 2)]
    return (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * h)


@dataclass(frozen=True)
class Potential:
    """Immutable radial potential with optional analytic derivatives.

    kinds: "log_power"  V = a1 log r + a2 r^a3 + a4   (requires a1 > 1-N)
           "inverted_harmonic"  V = -mu r^2
           "constant"   V = c
           "table"      two-column (r, V) samples, monotone cubic interpolant
    """

    kind: str
    params: dict
    dimension: int
    v: Callable[[float], float]
    vp: Callable[[float], float] | None = None
    vpp: Callable[[float], float] | None = None
    singular_at_origin: bool = False

    def __call__(self, r: float) -> float:
        return self.v(r)

    def slope(self, r: float) -> float:
        """V'(r), analytic when the family provides it, else 5-point FD."""
        if self.vp is not None:
            return self.vp(r)
        return _fd5(self.v, r)

    def curvature(self, r: float) -> float:
        if self.vpp is not None:
            return self.vpp(r)
        return _fd5(self.slope, r)


def log_power(alpha1: float, alpha2: float = 0.0, alpha3: float = 0.0,
              alpha4: float = 0.0, dimension: int = 3) -> Potential:
    """V(r) = alpha1 log r + alpha2 r^alpha3 + alpha4."""
    n = int(dimension)
    if n < 2:
        raise PotentialError(f"dimension must be >= 2, got {n}")
    if not alpha1 > 1 - n:
        raise PotentialError(
            f"log-power family needs alpha1 > 1-N = {1 - n}, got {alpha1}")
    if alpha2 < 0 or alpha3 < 0:
        raise PotentialError("alpha2 and alpha3 must be nonnegative")
    a1, a2, a3, a4 = float(alpha1), float(alpha2), float(alpha3), float(alpha4)

    def v(r: float) -> float:
        return a1 * math.log(r) + a2 * r ** a3 + a4

    def vp(r: float) -> float:
        return a1 / r + (a2 * a3 * r ** (a3 - 1.0) if a2 != 0.0 else 0.0)

    def vpp(r: float) -> float:
        out = -a1 / (r * r)
        if a2 != 0.0:
            out += a2 * a3 * (a3 - 1.0) * r ** (a3 - 2.0)
        return out

    return Potential("log_power", {"alpha1": a1, "alpha2": a2, "alpha3": a3,
                                   "alpha4": a4},
                     n, v, vp, vpp, singular_at_origin=(a1 != 0.0))


def inverted_harmonic(mu: float, dimension: int = 3) -> Potential:
    """V(r) = -mu r^2; for mu in (0, 1/4) the problem has multiple solutions."""
    n = int(dimension)
    if n < 2:
        raise PotentialError(f"dimension must be >= 2, got {n}")
    m = float(mu)
    return Potential("inverted_harmonic", {"mu": m}, n,
                     lambda r: -m * r * r,
                     lambda r: -2.0 * m * r,
                     lambda r: -2.0 * m)


def constant(c: float = 0.0, dimension: int = 3) -> Potential:
    n = int(dimension)
    if n < 2:
        raise PotentialError(f"dimension must be >= 2, got {n}")
    cc = float(c)
    return Potential("constant", {"c": cc}, n,
                     lambda r: cc, lambda r: 0.0, lambda r: 0.0)


def from_table(r_values, v_values, dimension: int = 3) -> Potential:
    """User-supplied (r, V) table; monotone-r required, PCHIP interpolation."""
    n = int(dimension)
    r_arr = np.asarray(r_values, dtype=float)
    v_arr = np.asarray(v_values, dtype=float)
    if r_arr.ndim != 1 or r_arr.size < 4:
        raise PotentialError("table needs at least 4 rows")
    if not np.all(np.diff(r_arr) > 0):
        raise PotentialError("table radii must be strictly increasing")
    if not (np.all(np.isfinite(r_arr)) and np.all(np.isfinite(v_arr))):
        raise PotentialError("table contains non-finite entries")
    interp = PchipInterpolator(r_arr, v_arr, extrapolate=False)
    dinterp = interp.derivative()
    lo, hi = float(r_arr[0]), float(r_arr[-1])

    def v(r: float) -> float:
        if r < lo or r > hi:
            raise PotentialError(
                f"table potential queried at r={r:g} outside [{lo:g}, {hi:g}]")
        return float(interp(r))

    return Potential("table", {"r_min": lo, "r_max": hi}, n, v,
                     lambda r: float(dinterp(r)), None,
                     singular_at_origin=False)


# --- compact perturbation pair (a, b) -------------------------------------

def _smoothstep7(x: float) -> float:
    # C^3 transition on [0, 1]
    return x ** 4 * (35.0 + x * (-84.0 + x * (70.0 - 20.0 * x)))


def _smoothstep7_d1(x: float) -> float:
    return 140.0 * x ** 3 * (1.0 - x) ** 3


def _smoothstep7_d2(x: float) -> float:
    return 420.0 * x ** 2 * (1.0 - x) ** 2 * (1.0 - 2.0 * x)


def _smoothstep7_d3(x: float) -> float:
    return 840.0 * x * (1.0 - x) * ((1.0 - 2.0 * x) ** 2 - x * (1.0 - x))


@dataclass(frozen=True)
class PerturbationPair:
    """Compactly supported pair (a, b) with b == 1 near the origin.

    b is a C^3 plateau bump: 1 on [0, plateau], polynomial transition on
    [plateau, support], 0 beyond.  a defaults to a_scale * b, which keeps a
    in C^2 with compact support.  B = 1 + delta*b >= 1 and K = 1/B in (0, 1].
    """

    delta: float = 0.0
    plateau: float = 1.0
    support: float = 2.0
    a_scale: float = 0.0

    def __post_init__(self):
        if self.delta < 0:
            raise PotentialError("delta must be >= 0")
        if not (0 < self.plateau < self.support):
            raise PotentialError("need 0 < plateau < support")

    def b(self, r: float) -> float:
        if r <= self.plateau:
            return 1.0
        if r >= self.support:
            return 0.0
        x = (r - self.plateau) / (self.support - self.plateau)
        return 1.0 - _smoothstep7(x)

    def b1(self, r: float) -> float:
        if r <= self.plateau or r >= self.support:
            return 0.0
        width = self.support - self.plateau
        return -_smoothstep7_d1((r - self.plateau) / width) / width

    def b2(self, r: float) -> float:
        if r <= self.plateau or r >= self.support:
            return 0.0
        width = self.support - self.plateau
        return -_smoothstep7_d2((r - self.plateau) / width) / width ** 2

    def b3(self, r: float) -> float:
        if r <= self.plateau or r >= self.support:
            return 0.0
        width = self.support - self.plateau
        return -_smoothstep7_d3((r - self.plateau) / width) / width ** 3

    def a(self, r: float) -> float:
        return self.a_scale * self.b(r)

    def a1(self, r: float) -> float:
        return self.a_scale * self.b1(r)

    # B = 1 + delta b and K = 1/B with derivatives up to K'''

    def big_b(self, r: float) -> float:
        return 1.0 + self.delta * self.b(r)

    def k(self, r: float) -> float:
        return 1.0 / self.big_b(r)

    def k1(self, r: float) -> float:
        bb = self.big_b(r)
        return -self.delta * self.b1(r) / bb ** 2

    def k2(self, r: float) -> float:
        bb = self.big_b(r)
        d = self.delta
        return (-d * self.b2(r) / bb ** 2
                + 2.0 * d * d * self.b1(r) ** 2 / bb ** 3)

    def k3(self, r: float) -> float:
        bb = self.big_b(r)
        d = self.delta
        b1, b2, b3 = self.b1(r), self.b2(r), self.b3(r)
        return (-d * b3 / bb ** 2
                + 6.0 * d * d * b1 * b2 / bb ** 3
                - 6.0 * d ** 3 * b1 ** 3 / bb ** 4)


NO_PERTURBATION = PerturbationPair(delta=0.0)


# --- transformed (Liouville) potential -------------------------------------

def liouville_potential(pot: Potential, r: float,
                        pair: PerturbationPair | None = None) -> float:
    """Potential of the first-derivative-free radial form.

    With pair=None (or delta=0) this is
    V(r) + (N-1)(N-3)/(4 r^2) + (N-1) log r; the perturbed variant carries
    the K-derivative corrections listed in the module docstring.
    """
    if r <= 0:
        raise PotentialError(f"r must be positive, got {r}")
    n = pot.dimension
    base = (n - 1) * (n - 3) / (4.0 * r * r)
    if pair is None or pair.delta == 0.0:
        return pot.v(r) + base + (n - 1) * math.log(r)
    k = pair.k(r)
    v_eff = pot.v(r) + pair.delta * pair.a(r)
    return (k * v_eff
            - pair.k2(r) / 4.0
            + 3.0 * pair.k1(r) ** 2 / (16.0 * k)
            + base * k
            - math.log(k) / 2.0
            + (n - 1) * math.log(r))


def liouville_potential_slope(pot: Potential, r: float,
                              pair: PerturbationPair | None = None) -> float:
    """d/dr of liouville_potential; analytic when V' is available."""
    if r <= 0:
        raise PotentialError(f"r must be positive, got {r}")
    n = pot.dimension
    if pair is None or pair.delta == 0.0:
        vp = pot.slope(r)
        return vp - (n - 1) * (n - 3) / (2.0 * r ** 3) + (n - 1) / r
    if pot.vp is None:
        return _fd5(lambda s: liouville_potential(pot, s, pair), r)
    k, k1, k2, k3 = pair.k(r), pair.k1(r), pair.k2(r), pair.k3(r)
    v_eff = pot.v(r) + pair.delta * pair.a(r)
    v_eff_p = pot.slope(r) + pair.delta * pair.a1(r)
    base = (n - 1) * (n - 3)
    return (k1 * v_eff + k * v_eff_p
            - k3 / 4.0
            + (3.0 / 16.0) * (2.0 * k1 * k2 / k - k1 ** 3 / k ** 2)
            + base * (k1 / (4.0 * r * r) - k / (2.0 * r ** 3))
            - k1 / (2.0 * k)
            + (n - 1) / r)


# --- admissibility checks ---------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    passed: bool
    witness: float | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.passed


def default_check_grid(r_min: float = 1e-4, r_max: float = 1e4,
                       n: int = 1024) -> np.ndarray:
    return np.geomspace(r_min, r_max, n)


# secant slope of r^3 G' across its sign change must exceed this to count
# as a simple zero
_SIMPLE_ZERO_SLOPE = 1e-8
# near-origin liminf proxy: r*G'(r) on the first decade of the grid
_ORIGIN_MARGIN = 1e-6


def check_uniqueness_condition(pot: Potential,
                               r_grid: np.ndarray | None = None,
                               pair: PerturbationPair | None = None
                               ) -> CheckResult:
    """Sign test on the slope of the transformed potential.

    N in {2, 3}: pass iff G' > 0 on the whole grid and r*G' keeps a positive
    margin on the near-origin decade.  N >= 4: pass iff r^3 G' starts
    negative, changes sign exactly once (a simple zero), and stays positive
    after.  Fail carries the violating radius.
    """
    grid = default_check_grid() if r_grid is None else np.asarray(r_grid, float)
    if grid.size < 64:
        raise PotentialError("check grid too coarse: need at least 64 points")
    n = pot.dimension
    gp = np.array([liouville_potential_slope(pot, float(r), pair)
                   for r in grid])
    if n in (2, 3):
        bad = np.nonzero(gp <= 0)[0]
        if bad.size:
            return CheckResult(False, float(grid[bad[0]]),
                               "G' not positive")
        near = grid <= grid[0] * 10.0
        margin = float(np.min(grid[near] * gp[near]))
        if margin < _ORIGIN_MARGIN:
            return CheckResult(False, float(grid[near][np.argmin(grid[near] * gp[near])]),
                               f"near-origin margin {margin:.3g} below {_ORIGIN_MARGIN:g}")
        return CheckResult(True)
    # N >= 4: study y = r^3 G'
    y = grid ** 3 * gp
    if y[0] >= 0:
        return CheckResult(False, float(grid[0]), "r^3 G' not negative near origin")
    signs = np.sign(y)
    flips = np.nonzero(np.diff(signs) != 0)[0]
    if flips.size == 0:
        return CheckResult(False, float(grid[-1]), "r^3 G' never changes sign")
    if flips.size > 1:
        return CheckResult(False, float(grid[flips[1]]),
                           "r^3 G' changes sign more than once")
    i = flips[0]
    secant = (y[i + 1] - y[i]) / (grid[i + 1] - grid[i])
    if secant <= _SIMPLE_ZERO_SLOPE:
        return CheckResult(False, float(grid[i]),
                           f"zero of r^3 G' not simple (secant {secant:.3g})")
    if np.any(y[i + 1:] <= 0):
        j = i + 1 + int(np.nonzero(y[i + 1:] <= 0)[0][0])
        return CheckResult(False, float(grid[j]), "r^3 G' dips back below zero")
    return CheckResult(True)


def power_admissible(alpha: float, sigma: float, dimension: int) -> CheckResult:
    """Admissibility of the power family -Lap u + r^{alpha*sigma} u = u^{2 sigma + 1}.

    Requires -sigma*alpha < 2 min(1, N-1+alpha) and -sigma*alpha < 1.
    """
    n = int(dimension)
    if n < 2:
        raise PotentialError(f"dimension must be >= 2, got {n}")
    if not alpha > 1 - n:
        raise PotentialError(f"alpha must exceed 1-N = {1 - n}, got {alpha}")
    sigma_max = 2.0 / (n - 2) if n > 2 else math.inf
    if not (0 < sigma < sigma_max):
        raise PotentialError(
            f"sigma must lie in (0, {sigma_max:g}) for N={n}, got {sigma}")
    lhs = -sigma * alpha
    if not lhs < 2.0 * min(1.0, n - 1 + alpha):
        return CheckResult(False, None,
                           "support-exponent bound -sigma*alpha < 2 min(1, N-1+alpha) fails")
    if not lhs < 1.0:
        return CheckResult(False, None, "regularity bound -sigma*alpha < 1 fails")
    return CheckResult(True)


def potential_growth_advisory(pot: Potential, q: float | None = None) -> dict:
    """Heuristic, non-blocking report on growth/integrability of V.

    Samples V(r)/log r on a geometric grid up to 1e6 as a liminf proxy and
    integrates |V|^q r^{N-1} near the origin (q = N+1 by default).  Purely
    advisory: asymptotic conditions cannot be certified from samples.
    """
    n = pot.dimension
    qq = float(q) if q is not None else float(n + 1)
    tail = np.geomspace(10.0, 1e6, 200)
    try:
        ratios = np.array([pot.v(float(r)) / math.log(r) for r in tail])
        ratio_min = float(np.min(ratios))
    except PotentialError:
        ratio_min = math.nan
    # local integrability of |V|^q near 0 on (0, 1]
    rs = np.geomspace(1e-8, 1.0, 400)
    try:
        vals = np.array([abs(pot.v(float(r))) ** qq * r ** (n - 1) for r in rs])
        integ = float(np.trapezoid(vals, rs))
        integrable = bool(np.isfinite(integ))
    except (PotentialError, OverflowError):
        integ, integrable = math.nan, False
    ok = ratio_min > (1 - n) if math.isfinite(ratio_min) else False
    if not ok:
        warnings.warn("potential growth advisory: sampled V/log r ratio "
                      f"minimum {ratio_min:.4g} not above {1 - n}", stacklevel=2)
    return {"ratio_liminf_proxy": ratio_min,
            "ratio_bound": float(1 - n),
            "ratio_ok": ok,
            "local_integrability_q": qq,
            "local_integral": integ,
            "locally_integrable": integrable}
