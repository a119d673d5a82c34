"""Radial initial value problem with origin startup and event classification.

The IVP

    u'' + (N-1)/r u' - V_eff(r) u + g(r, u) = 0,   u(0) = beta > 0, u'(0) = 0

is integrated in logarithmic variables (w, phi) = (log u, u'/u):

    w' = phi,   phi' = -phi^2 - (N-1)/r phi + V_eff(r) - g(r, u)/u,

which stays smooth while u > 0 and resolves minima far below the floating
point scale of beta (a dip to u ~ 1e-40 is just w ~ -92).  A genuine zero
crossing appears as a finite-radius blow-up phi -> -inf and is certified by
phi falling below a dominance threshold; the actual root is then located by
a short linear-variable continuation.  Trajectories are classified by the
first of: rebound (phi upcrosses 0: the trajectory turns back up), growth
past grow_factor*beta, certified crossing, or reaching r_max.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .potential import NO_PERTURBATION, PerturbationPair, Potential

CROSSES_ZERO = "crosses_zero"
GROWS = "grows"
UNDETERMINED = "undetermined"

# the rebound event triggers on phi = u'/u upcrossing this level instead of
# exactly zero, so float jitter on a stationary trajectory (phi == 0) cannot
# fire it; genuine rebounds sweep past it with phi' = O(1)
_REBOUND_SHIFT = 1e-8


class IntegrationError(RuntimeError):
    """Integration failed (startup quadrature, NaN state, step underflow)."""


@dataclass(frozen=True)
class IVPConfig:
    """Integrator knobs; defaults match the shooting pipelines."""

    epsilon0: float = 1e-6
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    r_max: float = 20.0
    grow_factor: float = 10.0
    floor_u: float = 1e-300
    # phi must fall below -dive_coef*sqrt(1+|V|+|g/u|) to certify a crossing
    dive_coef: float = 10.0

    def __post_init__(self):
        if not (0 < self.epsilon0 < 1e-2):
            raise ValueError("epsilon0 must lie in (0, 1e-2)")
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.r_max <= 1:
            raise ValueError("r_max must exceed 1")


@dataclass(frozen=True)
class Classification:
    """Terminal event of a shooting trajectory.

    tag is one of crosses_zero / grows / undetermined; mechanism records
    what fired (zero-crossing, rebound, growth-threshold, r-max, clamp).
    depth is min log(u/beta) seen before termination: the saddle-hug depth.
    """

    tag: str
    radius: float
    mechanism: str
    depth: float

    @property
    def decisive(self) -> bool:
        return self.tag in (CROSSES_ZERO, GROWS)


class LogProblem:
    """u'' + (N-1)/r u' - (V + delta a) u + (1 + delta b) u log u^2 = 0."""

    kind = "log"

    def __init__(self, pot: Potential, pair: PerturbationPair | None = None):
        self.pot = pot
        self.pair = pair if pair is not None else NO_PERTURBATION
        self.dim = pot.dimension

    def v_eff(self, r: float) -> float:
        if self.pair.delta == 0.0:
            return self.pot.v(r)
        return self.pot.v(r) + self.pair.delta * self.pair.a(r)

    def nl_over_u(self, r: float, w: float) -> float:
        # (B u log u^2)/u in log variables
        return self.pair.big_b(r) * 2.0 * w

    def nl_linear(self, r: float, u: float, floor_u: float) -> float:
        au = abs(u)
        if au < floor_u:
            return 0.0
        return self.pair.big_b(r) * 2.0 * u * math.log(au)

    def large_amplitude_coefficient(self) -> float:
        # coefficient b0 of the limiting oscillator as beta -> infinity
        return 2.0 * self.pair.big_b(0.0)

    # decaying tails behave like exp(-lam r^2 + c log r): quadratic in r
    tail_power = 2.0


class PowerProblem:
    """u'' + (N-1)/r u' - r^{alpha sigma} u + |u|^{2 sigma} u = 0."""

    kind = "power"

    def __init__(self, alpha: float, sigma: float, dimension: int):
        self.alpha = float(alpha)
        self.sigma = float(sigma)
        self.dim = int(dimension)
        self._p = self.alpha * self.sigma

    def v_eff(self, r: float) -> float:
        return r ** self._p if self._p != 0.0 else 1.0

    def nl_over_u(self, r: float, w: float) -> float:
        return math.exp(2.0 * self.sigma * w)

    def nl_linear(self, r: float, u: float, floor_u: float) -> float:
        return abs(u) ** (2.0 * self.sigma) * u

    @property
    def tail_power(self) -> float:
        # WKB decay exponent: u ~ exp(-c r^{(alpha sigma + 2)/2})
        return self._p / 2.0 + 1.0


RadialProblem = LogProblem | PowerProblem


# --- origin startup --------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


def _integrate_cells(f, a: float, b: float, n_cells_per_decade: int = 1) -> float:
    """Composite Gauss-Legendre over geometric cells of (0-ish, b].

    The integrand may carry an integrable log r singularity at 0; geometric
    cells keep it smooth per cell.  The region below b*1e-12 is dropped.
    """
    lo = max(a, b * 1e-12)
    edges = np.geomspace(lo, b, 13)
    total = 0.0
    for left, right in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (left + right)
        half = 0.5 * (right - left)
        xs = mid + half * _GL_NODES
        total += half * float(np.sum(_GL_WEIGHTS * np.array([f(x) for x in xs])))
    return total


def startup(problem: RadialProblem, beta: float, epsilon0: float,
            floor_u: float = 1e-300, iterations: int = 2):
    """Series startup: Picard iterations of the integral form at r = epsilon0.

    u(r) = beta + int_0^r s^{1-N} int_0^s t^{N-1} (V_eff u - g(u)) dt ds,
    collapsed to a single integral with kernel kappa(t, r).  Two iterations
    give u(eps) with error O(eps^4 log^2 eps); u'(eps) comes from the last
    iterate's flux integral.
    """
    if beta <= 0:
        raise IntegrationError(f"startup needs beta > 0, got {beta}")
    n = problem.dim
    eps = float(epsilon0)

    def kappa(t: float, r: float) -> float:
        if n == 2:
            return math.log(r / t)
        return (r ** (2 - n) - t ** (2 - n)) / (2.0 - n)

    def source(t: float, u: float) -> float:
        try:
            return problem.v_eff(t) * u - problem.nl_linear(t, u, floor_u)
        except (OverflowError, ValueError) as exc:
            raise IntegrationError(
                f"startup quadrature failed near r={t:.3g}: {exc}") from exc

    def sweep(inner: Callable[[float], float]) -> Callable[[float], float]:
        def nxt(t: float) -> float:
            return beta + _integrate_cells(
                lambda s: s ** (n - 1) * kappa(s, t) * source(s, inner(s)),
                0.0, t)
        return nxt

    u_prev: Callable[[float], float] = lambda t: beta
    n_sweeps = max(1, iterations) - 1
    if n_sweeps == 1:
        u_prev = sweep(u_prev)
    elif n_sweeps > 1:
        # deeper iterates are tabulated per sweep so the cost stays linear
        # in the iteration count instead of nesting exponentially
        from scipy.interpolate import PchipInterpolator
        ts = np.geomspace(eps * 1e-12, eps, 400)
        for _ in range(n_sweeps):
            stepped = sweep(u_prev)
            vals = np.array([stepped(t) for t in ts])
            pch = PchipInterpolator(np.log(ts), vals)

            def u_prev(t, p=pch, t0=ts[0], v0=vals[0]):
                return float(p(math.log(t))) if t >= t0 else float(v0)

    u_eps = beta + _integrate_cells(
        lambda t: t ** (n - 1) * kappa(t, eps) * source(t, u_prev(t)), 0.0, eps)
    flux = _integrate_cells(
        lambda t: t ** (n - 1) * source(t, u_prev(t)), 0.0, eps)
    du_eps = eps ** (1 - n) * flux
    if not (math.isfinite(u_eps) and math.isfinite(du_eps)):
        raise IntegrationError("startup produced non-finite state "
                               f"(u={u_eps}, u'={du_eps})")
    if u_eps <= 0:
        raise IntegrationError(f"startup left the positive cone: u(eps)={u_eps}")
    return u_eps, du_eps


# --- main integration -------------------------------------------------------

@dataclass
class IVPSolution:
    """Dense trajectory on [epsilon0, r_end] with a terminal classification.

    Carries the log-variable dense output; u and u' are recovered as
    exp(w) and phi*exp(w), so evaluation never underflows to literal zero.
    """

    beta: float
    problem: RadialProblem
    config: IVPConfig
    classification: Classification
    r_end: float
    nodes: np.ndarray
    u_values: np.ndarray
    du_values: np.ndarray
    _dense: Callable  # OdeSolution over (w, phi)
    _dense_end: float
    clamped: bool = False
    clamp_state: tuple | None = None  # (r_c, w_c, phi_c)

    def _wp(self, r):
        rr = np.asarray(r, dtype=float)
        if np.any(rr < self.config.epsilon0 - 1e-15) or np.any(rr > self._dense_end * (1 + 1e-12)):
            raise ValueError(
                f"dense evaluation outside [{self.config.epsilon0:g}, {self._dense_end:g}]")
        out = self._dense(np.clip(rr, self.config.epsilon0, self._dense_end))
        return out[0], out[1]

    def logu_of(self, r):
        return self._wp(r)[0]

    def u_of(self, r):
        return np.exp(self._wp(r)[0])

    def du_of(self, r):
        w, phi = self._wp(r)
        return phi * np.exp(w)

    def phi_of(self, r):
        return self._wp(r)[1]


def _make_rhs(problem: RadialProblem):
    n = problem.dim

    def rhs(r, y):
        w, phi = y
        return (phi,
                -phi * phi - (n - 1) / r * phi + problem.v_eff(r)
                - problem.nl_over_u(r, w))

    return rhs


def integrate(problem: RadialProblem, beta: float,
              config: IVPConfig | None = None,
              stop_at_u_rel: float | None = None) -> IVPSolution:
    """Integrate the radial IVP from epsilon0, terminating at the first event.

    stop_at_u_rel, when given, adds a terminal stop at u = stop_at_u_rel*beta
    on the way down (used to assemble clamped decaying profiles); a run that
    ends there is classified undetermined with mechanism "clamp".
    """
    cfg = config if config is not None else IVPConfig()
    u0, du0 = startup(problem, beta, cfg.epsilon0, cfg.floor_u)
    w0 = math.log(u0)
    phi0 = du0 / u0
    log_beta = math.log(beta)
    rhs = _make_rhs(problem)
    n = problem.dim

    def ev_rebound(r, y):
        return y[1] + _REBOUND_SHIFT
    ev_rebound.terminal = True
    ev_rebound.direction = 1

    w_grow = math.log(cfg.grow_factor) + log_beta

    def ev_grow(r, y):
        return y[0] - w_grow
    ev_grow.terminal = True
    ev_grow.direction = 1

    coef = cfg.dive_coef

    def ev_dive(r, y):
        w, phi = y
        thr = coef * math.sqrt(1.0 + abs(problem.v_eff(r))
                               + abs(problem.nl_over_u(r, w)))
        return phi + thr
    ev_dive.terminal = True
    ev_dive.direction = -1

    events = [ev_rebound, ev_grow, ev_dive]
    if stop_at_u_rel is not None:
        w_stop = log_beta + math.log(stop_at_u_rel)

        def ev_clamp(r, y):
            return y[0] - w_stop
        ev_clamp.terminal = True
        ev_clamp.direction = -1
        events.append(ev_clamp)

    sol = solve_ivp(rhs, (cfg.epsilon0, cfg.r_max), [w0, phi0],
                    method="DOP853", rtol=cfg.rel_tol, atol=cfg.abs_tol,
                    events=events, dense_output=True)
    if not sol.success and sol.status < 0:
        raise IntegrationError(f"integrator failed at r={sol.t[-1]:.6g}: "
                               f"{sol.message} (last w={sol.y[0, -1]:.3g})")
    if np.any(~np.isfinite(sol.y)):
        raise IntegrationError(
            f"non-finite state detected near r={sol.t[-1]:.6g}")

    depth = float(np.min(sol.y[0]) - log_beta)
    dense_end = float(sol.t[-1])

    clamped = False
    clamp_state = None
    if sol.t_events[0].size:
        r_ev = float(sol.t_events[0][0])
        cls = Classification(GROWS, r_ev, "rebound", depth)
    elif sol.t_events[1].size:
        r_ev = float(sol.t_events[1][0])
        cls = Classification(GROWS, r_ev, "growth-threshold", depth)
    elif sol.t_events[2].size:
        r_c = float(sol.t_events[2][0])
        w_c, phi_c = (float(v) for v in sol.y_events[2][0])
        r0 = _locate_zero(problem, cfg, r_c, w_c, phi_c)
        cls = Classification(CROSSES_ZERO, r0, "zero-crossing", depth)
    elif stop_at_u_rel is not None and sol.t_events[3].size:
        r_c = float(sol.t_events[3][0])
        w_c, phi_c = (float(v) for v in sol.y_events[3][0])
        clamped = True
        clamp_state = (r_c, w_c, phi_c)
        cls = Classification(UNDETERMINED, r_c, "clamp", depth)
    else:
        cls = Classification(UNDETERMINED, cfg.r_max, "r-max", depth)

    nodes = sol.t
    u_vals = np.exp(sol.y[0])
    du_vals = sol.y[1] * u_vals
    return IVPSolution(beta=beta, problem=problem, config=cfg,
                       classification=cls, r_end=dense_end,
                       nodes=nodes, u_values=u_vals, du_values=du_vals,
                       _dense=sol.sol, _dense_end=dense_end,
                       clamped=clamped, clamp_state=clamp_state)


def _locate_zero(problem: RadialProblem, cfg: IVPConfig,
                 r_c: float, w_c: float, phi_c: float) -> float:
    """Continue in linear variables from the certified dive to find u = 0."""
    u_c = math.exp(w_c)
    n = problem.dim

    def rhs_lin(r, y):
        u, du = y
        return (du, -(n - 1) / r * du + problem.v_eff(r) * u
                - problem.nl_linear(r, u, cfg.floor_u))

    def ev_cross(r, y):
        return y[0]
    ev_cross.terminal = True
    ev_cross.direction = -1

    # phi ~ -1/(r0 - r): the root sits about -1/phi_c ahead
    span = min(cfg.r_max - r_c, max(8.0 / abs(phi_c), 1e-6))
    sol = solve_ivp(rhs_lin, (r_c, r_c + span), [u_c, phi_c * u_c],
                    method="DOP853", rtol=cfg.rel_tol,
                    atol=max(u_c * 1e-12, 5e-324),
                    events=[ev_cross])
    if sol.t_events[0].size:
        return float(sol.t_events[0][0])
    # certified blow-up but the window missed the root: use the asymptote
    return r_c - 1.0 / phi_c


# --- reference oscillator profile ------------------------------------------

@dataclass(frozen=True)
class BesselProfile:
    """Normalized solution of w'' + (N-1)/r w' + b0 w = 0, w(0)=1, w'(0)=0."""

    dimension: int
    b0: float
    first_zero: float
    _coeffs: np.ndarray
    _switch: float
    _dense: Callable | None

    def __call__(self, r):
        rr = np.asarray(r, dtype=float)
        out = np.empty_like(rr)
        inside = rr <= self._switch
        if np.any(inside):
            out[inside] = self._series(rr[inside])
        if np.any(~inside):
            if self._dense is None:
                raise ValueError("profile evaluated beyond its range")
            out[~inside] = self._dense(rr[~inside])[0]
        return out if out.shape else float(out)

    def _series(self, rr):
        x = rr * rr
        out = np.zeros_like(rr)
        for a in self._coeffs[::-1]:
            out = out * x + a
        return out


def bessel_mode(dimension: int, b0: float, r_hi: float | None = None) -> BesselProfile:
    """Power series plus continuation for the constant-coefficient mode.

    Returns the profile together with its first zero r1; the series
    a_k = -b0 a_{k-1} / (2k (2k + N - 2)) converges everywhere and is used
    up to sqrt(b0) r = 12, with an ODE continuation beyond.
    """
    if b0 <= 0:
        raise ValueError(f"b0 must be positive, got {b0}")
    n = int(dimension)
    coeffs = [1.0]
    for k in range(1, 200):
        coeffs.append(-b0 * coeffs[-1] / (2.0 * k * (2.0 * k + n - 2.0)))
        if abs(coeffs[-1]) < 1e-300:
            break
    coeffs = np.array(coeffs)
    switch = 12.0 / math.sqrt(b0)

    # generous sampling range: first zero scales like 1/sqrt(b0)
    r_end = r_hi if r_hi is not None else 8.0 / math.sqrt(b0)

    dense = None
    if r_end > switch:
        def rhs(r, y):
            return (y[1], -(n - 1) / r * y[1] - b0 * y[0])

        x = switch
        w_sw = float(np.polynomial.polynomial.polyval(x * x, coeffs))
        dw_sw = float(np.polynomial.polynomial.polyval(
            x * x, coeffs[1:] * np.arange(1, coeffs.size)) * 2 * x)
        sol = solve_ivp(rhs, (switch, r_end), [w_sw, dw_sw], method="DOP853",
                        rtol=1e-12, atol=1e-14, dense_output=True)
        dense = sol.sol

    prof = BesselProfile(n, b0, math.nan, coeffs, switch, dense)
    # bracket the first zero by marching, then polish
    step = 0.05 / math.sqrt(b0)
    r_prev, w_prev = step, float(prof(step))
    r1 = None
    k = 2
    while r_prev < r_end:
        r_next = min(k * step, r_end)
        w_next = float(prof(r_next))
        if w_prev > 0 >= w_next:
            r1 = brentq(lambda s: float(prof(s)), r_prev, r_next,
                        xtol=1e-14, rtol=1e-15)
            break
        r_prev, w_prev = r_next, w_next
        k += 1
    if r1 is None:
        raise IntegrationError("first zero not found; enlarge r_hi")
    object.__setattr__(prof, "first_zero", float(r1))
    return prof
