"""Pointwise energy diagnostics and tail/ratio checks for decaying profiles.

For v = K^{-1/4} r^{(N-1)/2} u the quantity

    E(r) = 1/2 K (v')^2 - 1/2 G_delta(r) v^2 + 1/2 (v^2 log v^2 - v^2)

satisfies E'(r) = -1/2 G_delta'(r) v^2 along solutions, so under the
uniqueness condition (G' > 0 for N <= 3, single sign change of r^3 G' for
N >= 4) E is positive, tends to zero, and is monotone in the pattern
checked by ``energy_pattern_check``.  The module also provides the decay
certificates (Gaussian-weighted monotone tail, vanishing flux r^{N-1}u')
and the two-solution ratio monotonicity count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .potential import (NO_PERTURBATION, CheckResult, PerturbationPair,
                        Potential, check_uniqueness_condition,
                        liouville_potential, liouville_potential_slope)
from .variational import fornberg_weights


class DiagnosticsError(ValueError):
    pass


def liouville_transform(r, u, du, pair: PerturbationPair | None,
                        dimension: int):
    """v = K^{-1/4} r^{(N-1)/2} u and its product-rule derivative."""
    pr = pair if pair is not None else NO_PERTURBATION
    rr = np.asarray(r, dtype=float)
    uu = np.asarray(u, dtype=float)
    dd = np.asarray(du, dtype=float)
    n = dimension
    k = np.array([pr.k(float(s)) for s in rr])
    k1 = np.array([pr.k1(float(s)) for s in rr])
    v = k ** (-0.25) * rr ** ((n - 1) / 2.0) * uu
    dv = (-0.25 * k ** (-1.25) * k1 * rr ** ((n - 1) / 2.0) * uu
          + (n - 1) / 2.0 * k ** (-0.25) * rr ** ((n - 3) / 2.0) * uu
          + k ** (-0.25) * rr ** ((n - 1) / 2.0) * dd)
    return v, dv


@dataclass
class EnergyProfile:
    """E(r) along a profile with both slope evaluations.

    deriv_formula is -G'/2 v^2; deriv_diff is a centered difference of E on
    the sampling grid.  Their agreement is the consistency certificate.
    """

    radii: np.ndarray
    v: np.ndarray
    dv: np.ndarray
    energy: np.ndarray
    deriv_formula: np.ndarray
    deriv_diff: np.ndarray
    g_slope: np.ndarray
    dimension: int


def _default_grid(epsilon0: float, r_max: float, dimension: int) -> np.ndarray:
    # start at 10*epsilon0: E may blow up at the origin for N = 2.  The
    # geometric ratio is sized so the 5-point slope difference stays within
    # the 1e-5*max|E| agreement budget; the N = 2 blow-up E ~ 1/r forces a
    # much finer ratio there (error ~ |E'| (q-1)^4 against tol ~ E(r_min)).
    n_geo = 3600 if dimension == 2 else 640
    lo = np.geomspace(10.0 * epsilon0, 1.0, n_geo, endpoint=False)
    hi = np.linspace(1.0, r_max, 1200)
    return np.concatenate([lo, hi])


def _slope_by_differences(r: np.ndarray, e: np.ndarray) -> np.ndarray:
    # 5-point centered differences in log radius: dE/dr = (dE/dx)/r with
    # x = log r.  Near-origin blow-ups E ~ r^{-p} are exponentials in x, so
    # the stencil stays accurate on the geometric part of the grid.
    x = np.log(r)
    m = r.size
    out = np.empty(m)
    for i in range(m):
        lo = min(max(i - 2, 0), m - 5)
        sl = slice(lo, lo + 5)
        out[i] = np.dot(fornberg_weights(x[i], x[sl]), e[sl])
    return out / r


def pointwise_energy(ground, pot: Potential,
                     pair: PerturbationPair | None = None,
                     r_grid: np.ndarray | None = None) -> EnergyProfile:
    """Evaluate E and both variants of E' along an assembled profile."""
    pr = pair if pair is not None else NO_PERTURBATION
    n = pot.dimension
    grid = (_default_grid(ground.config.epsilon0, ground.r_max * 0.999, n)
            if r_grid is None else np.asarray(r_grid, dtype=float))
    u = ground.u_of(grid)
    du = ground.du_of(grid)
    logu = ground.logu_of(grid)
    v, dv = liouville_transform(grid, u, du, pr, n)
    k = np.array([pr.k(float(s)) for s in grid])
    g = np.array([liouville_potential(pot, float(s), pr) for s in grid])
    gp = np.array([liouville_potential_slope(pot, float(s), pr) for s in grid])
    # v^2 log v^2 through logs: log v^2 = -log K / 2 + (N-1) log r + 2 log u
    logv2 = -0.5 * np.log(k) + (n - 1) * np.log(grid) + 2.0 * logu
    v2 = v * v
    energy = 0.5 * k * dv * dv - 0.5 * g * v2 + 0.5 * v2 * (logv2 - 1.0)
    deriv_formula = -0.5 * gp * v2
    deriv_diff = _slope_by_differences(grid, energy)
    return EnergyProfile(radii=grid, v=v, dv=dv, energy=energy,
                         deriv_formula=deriv_formula, deriv_diff=deriv_diff,
                         g_slope=gp, dimension=n)


# slack absorbing quadrature noise in strict-monotonicity checks
_MONOTONE_SLACK = 1e-9


def energy_pattern_check(ep: EnergyProfile, pot: Potential,
                         pair: PerturbationPair | None = None) -> CheckResult:
    """Monotonicity pattern of E under the uniqueness condition.

    N in {2, 3}: strictly decreasing over the sampled range.  N >= 4: one
    interior maximum, increase before and decrease after.  Refuses to run
    when the uniqueness condition itself fails.
    """
    gate = check_uniqueness_condition(pot, pair=pair)
    if not gate.passed:
        raise DiagnosticsError(
            "energy pattern check not applicable: uniqueness condition "
            f"fails at r={gate.witness} ({gate.reason})")
    e = ep.energy
    slack = _MONOTONE_SLACK * float(np.max(np.abs(e)))
    diffs = np.diff(e)
    if ep.dimension in (2, 3):
        bad = np.nonzero(diffs > slack)[0]
        if bad.size:
            return CheckResult(False, float(ep.radii[bad[0]]),
                               "E not strictly decreasing")
        return CheckResult(True)
    i_max = int(np.argmax(e))
    if i_max in (0, len(e) - 1):
        return CheckResult(False, float(ep.radii[i_max]),
                           "no interior maximum of E")
    if np.any(diffs[:i_max] < -slack):
        j = int(np.nonzero(diffs[:i_max] < -slack)[0][0])
        return CheckResult(False, float(ep.radii[j]),
                           "E not increasing before its maximum")
    if np.any(diffs[i_max:] > slack):
        j = i_max + int(np.nonzero(diffs[i_max:] > slack)[0][0])
        return CheckResult(False, float(ep.radii[j]),
                           "E not decreasing after its maximum")
    return CheckResult(True)


# --- decay certificates -------------------------------------------------------

@dataclass
class TailReport:
    weighted_monotone: bool     # u e^{0.45 r^2} decreasing on the last decade
    weighted_final: float       # its value at the end radius
    flux_peak: float            # max |r^{N-1} u'| over the whole profile
    flux_tail_max: float        # max |r^{N-1} u'| over the last decade
    flux_end: float             # |r^{N-1} u'| at the end radius
    flux_vanishes: bool         # end flux fell 1e6 below the peak
    negative_slope_radius: float  # u' < 0 for every sampled r beyond this

    @property
    def passed(self) -> bool:
        return self.weighted_monotone and self.flux_vanishes


GAUSS_WEIGHT_TAU = 0.45
_FLUX_DROP = 1e-6


def tail_checks(ground) -> TailReport:
    """Decay certificates over the final decade of radii."""
    n = ground.problem.dim
    r_end = ground.r_max
    decade = np.linspace(r_end / 10.0, r_end, 400)
    m = ground.logu_of(decade) + GAUSS_WEIGHT_TAU * decade ** 2
    monotone = bool(np.all(np.diff(m) < 0))
    weighted_final = float(math.exp(m[-1]))

    full = np.geomspace(ground.config.epsilon0 * 10, r_end, 800)
    flux_full = np.abs(full ** (n - 1) * ground.du_of(full))
    flux_peak = float(np.max(flux_full))
    flux_tail = np.abs(decade ** (n - 1) * ground.du_of(decade))
    flux_tail_max = float(np.max(flux_tail))
    flux_end = float(flux_tail[-1])
    vanishes = flux_end <= _FLUX_DROP * flux_peak

    du = ground.du_of(full)
    nonneg = np.nonzero(du >= 0)[0]
    neg_radius = float(full[nonneg[-1]]) if nonneg.size else float(full[0])
    return TailReport(weighted_monotone=monotone,
                      weighted_final=weighted_final,
                      flux_peak=flux_peak, flux_tail_max=flux_tail_max,
                      flux_end=flux_end, flux_vanishes=vanishes,
                      negative_slope_radius=neg_radius)


@dataclass
class RatioReport:
    crossings: int
    crossing_radii: list
    monotone: bool
    constant: bool


def ratio_monotonicity(ground_low, ground_high,
                       r_grid: np.ndarray | None = None) -> RatioReport:
    """Intersections of two profiles and monotonicity of their ratio.

    Expects ground_low.beta < ground_high.beta; the ratio low/high should be
    strictly increasing with a single intersection for distinct decaying
    solutions of one potential.  A constant ratio (same solution up to
    scale) is reported as the constant special case with monotone False.
    """
    if ground_low.beta >= ground_high.beta:
        raise DiagnosticsError("pass the lower-height profile first")
    lo = max(ground_low.config.epsilon0, ground_high.config.epsilon0) * 10
    hi = min(ground_low.r_max, ground_high.r_max) * 0.999
    grid = (np.linspace(lo, hi, 2000) if r_grid is None
            else np.asarray(r_grid, dtype=float))
    diff_log = ground_low.logu_of(grid) - ground_high.logu_of(grid)
    ratio = np.exp(diff_log)
    signs = np.sign(diff_log)
    flips = np.nonzero(np.diff(signs) != 0)[0]
    radii = [float(0.5 * (grid[i] + grid[i + 1])) for i in flips]
    spread = float(np.max(ratio) - np.min(ratio))
    if spread <= 1e-9 * float(np.mean(ratio)):
        return RatioReport(crossings=len(radii), crossing_radii=radii,
                           monotone=False, constant=True)
    monotone = bool(np.all(np.diff(ratio) > 0))
    return RatioReport(crossings=len(radii), crossing_radii=radii,
                       monotone=monotone, constant=False)


def uniqueness_defect(ep_low: EnergyProfile, ep_high: EnergyProfile) -> np.ndarray:
    """The comparison quantity (v_high/v_low)^2 E_low - E_high on a shared grid.

    For two distinct solutions of a potential violating the uniqueness
    condition this is strictly decreasing: the numerical witness that the
    monotonicity mechanism fails there.  Both profiles must share the grid.
    """
    if ep_low.radii.shape != ep_high.radii.shape or \
            not np.allclose(ep_low.radii, ep_high.radii):
        raise DiagnosticsError("energy profiles must share one grid")
    ratio2 = (ep_high.v / ep_low.v) ** 2
    return ratio2 * ep_low.energy - ep_high.energy
