"""Shooting for decaying radial profiles: scan, refine, validate, assemble.

A decaying solution sits where trajectories switch between crossing zero and
rebounding.  Two root signatures occur in practice:

* flip roots: the classification changes across the root (crosses_zero on
  one side, grows on the other) and the saddle-hug depth min log(u/beta)
  diverges as beta approaches the root.  Located by classification bisection.
* peak roots: trajectories cross zero on BOTH sides, but the hug depth still
  diverges exactly at the root (seen for the inverted-harmonic family, whose
  slow-decaying solution never flips the first event).  Located by golden
  search on the depth.

Classification boundaries whose depth stays bounded are folds (a local
minimum of u degenerating at positive height) and are discarded: they are
not solutions.  Every confirmed root is re-integrated with a stop at
u = clamp_ratio*beta and extended by a matched decaying tail; the assembled
profile is the object downstream modules consume.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .radial_ivp import (CROSSES_ZERO, GROWS, UNDETERMINED, Classification,
                         IVPConfig, IVPSolution, IntegrationError,
                         LogProblem, PowerProblem, RadialProblem, bessel_mode,
                         integrate)


class ShootingError(RuntimeError):
    """Scan or refinement failed structurally."""


# confirmed roots must hug the zero saddle at least this deep (in log units
# relative to beta); folds observed so far stay above -7
DEPTH_CONFIRM = -10.0
# scan samples this deep that are local depth maxima become peak candidates
PEAK_TRIGGER = -8.0
# re-integration stop level for assembling the final profile
CLAMP_RATIO = 1e-4


# --- tails ------------------------------------------------------------------

@dataclass(frozen=True)
class QuadraticTail:
    """log u = w_c - lam (r^2 - r_c^2) + c log(r/r_c), matched at the clamp.

    lam and c come from matching phi and phi' at r_c; for the logarithmic
    problem every decaying branch is asymptotically of this Gaussian-power
    form (lam solves the local rate equation, c the power correction).
    """

    r_c: float
    w_c: float
    lam: float
    c: float

    def logu(self, r):
        rr = np.asarray(r, dtype=float)
        return (self.w_c - self.lam * (rr * rr - self.r_c * self.r_c)
                + self.c * np.log(rr / self.r_c))

    def phi(self, r):
        rr = np.asarray(r, dtype=float)
        return -2.0 * self.lam * rr + self.c / rr


@dataclass(frozen=True)
class RiccatiTail:
    """Stable-branch continuation for power-law tails.

    Integrates dw/dr on the decaying branch
    phi_hat = -(N-1)/(2r) - sqrt(((N-1)/(2r))^2 + V(r) - g/u), which removes
    the growing mode that forbids direct forward integration.  Used where
    the nonlinearity decays too slowly (small sigma) for a frozen-form tail.
    """

    r_c: float
    _dense: object
    _phi: object

    def logu(self, r):
        rr = np.asarray(r, dtype=float)
        return self._dense(rr)[0]

    def phi(self, r):
        rr = np.asarray(r, dtype=float)
        out = np.array([self._phi(float(s), float(w))
                        for s, w in zip(np.atleast_1d(rr),
                                        np.atleast_1d(self.logu(rr)))])
        return out.reshape(rr.shape) if rr.shape else float(out[0])


def _fit_quadratic_tail(problem: RadialProblem, r_c, w_c, phi_c) -> QuadraticTail:
    # phi' from the ODE itself at the clamp point
    n = problem.dim
    dphi = (-phi_c * phi_c - (n - 1) / r_c * phi_c + problem.v_eff(r_c)
            - problem.nl_over_u(r_c, w_c))
    c = r_c * (phi_c - r_c * dphi) / 2.0
    lam = (c / r_c - phi_c) / (2.0 * r_c)
    if lam <= 0:
        raise ShootingError(
            f"tail match produced non-decaying rate lam={lam:.3g} at r={r_c:.3g}")
    return QuadraticTail(r_c, w_c, lam, c)


def _fit_riccati_tail(problem: RadialProblem, cfg: IVPConfig,
                      r_c, w_c, r_max) -> RiccatiTail:
    n = problem.dim

    def phi_hat(r: float, w: float) -> float:
        fr = (n - 1) / (2.0 * r)
        rad = fr * fr + problem.v_eff(r) - problem.nl_over_u(r, w)
        return -fr - math.sqrt(max(rad, 0.0))

    sol = solve_ivp(lambda r, y: [phi_hat(r, y[0])], (r_c, r_max), [w_c],
                    method="DOP853", rtol=1e-10, atol=1e-12, dense_output=True)
    if not sol.success:
        raise ShootingError(f"tail continuation failed: {sol.message}")
    return RiccatiTail(r_c, sol.sol, phi_hat)


# --- assembled decaying profile ----------------------------------------------

@dataclass
class GroundProfile:
    """Decaying solution profile on [epsilon0, r_max].

    The integrated trajectory is kept up to the clamp radius (where
    u = clamp_ratio*beta); beyond it the matched tail model takes over.
    Tail values are a controlled reconstruction, reported separately via
    tail_start.  The whole assembly classifies undetermined: it decays to
    r_max without any event.
    """

    beta: float
    problem: RadialProblem
    config: IVPConfig
    solution: IVPSolution
    tail: QuadraticTail | RiccatiTail
    tail_start: float
    r_max: float

    @property
    def classification(self) -> Classification:
        return Classification(UNDETERMINED, self.r_max, "assembled-decay",
                              self.solution.classification.depth)

    def logu_of(self, r):
        rr = np.asarray(r, dtype=float)
        scalar = rr.ndim == 0
        rr = np.atleast_1d(rr).astype(float)
        out = np.empty_like(rr)
        head = rr <= self.tail_start
        if np.any(head):
            out[head] = self.solution.logu_of(rr[head])
        if np.any(~head):
            out[~head] = self.tail.logu(rr[~head])
        return float(out[0]) if scalar else out

    def u_of(self, r):
        return np.exp(self.logu_of(r))

    def phi_of(self, r):
        rr = np.asarray(r, dtype=float)
        scalar = rr.ndim == 0
        rr = np.atleast_1d(rr).astype(float)
        out = np.empty_like(rr)
        head = rr <= self.tail_start
        if np.any(head):
            out[head] = self.solution.phi_of(rr[head])
        if np.any(~head):
            out[~head] = self.tail.phi(rr[~head])
        return float(out[0]) if scalar else out

    def du_of(self, r):
        return self.phi_of(r) * self.u_of(r)

    def gaussian_envelope(self, tau: float = 0.49):
        """Comparison barrier 2 u(r_c) e^{tau r_c^2} e^{-tau r^2} params."""
        u_c = float(self.u_of(self.tail_start))
        amp = 2.0 * u_c * math.exp(tau * self.tail_start ** 2)
        return {"tau": tau, "amplitude": amp, "anchor": self.tail_start}

    def sample_mesh(self, n_tail: int = 200) -> np.ndarray:
        head = self.solution.nodes[self.solution.nodes <= self.tail_start]
        tail = np.linspace(self.tail_start, self.r_max, n_tail + 1)[1:]
        return np.concatenate([head, tail])

    def export_arrays(self):
        r = self.sample_mesh()
        return r, self.u_of(r), self.du_of(r)


@dataclass
class GroundState:
    """Confirmed decaying initial height with its assembled profile."""

    beta_star: float
    bracket: tuple
    method: str            # "flip-bisection" or "depth-peak"
    depth: float           # deepest saddle hug seen while refining
    profile: GroundProfile
    residual_tail: float   # u at r_max from the assembled profile

    @property
    def bracket_width(self) -> float:
        return abs(self.bracket[1] - self.bracket[0])


def build_profile(problem: RadialProblem, beta: float, cfg: IVPConfig,
                  clamp_ratio: float = CLAMP_RATIO) -> GroundProfile:
    """Integrate at beta with a clamp stop and attach the matched tail.

    The final profile feeds pointwise diagnostics whose slope differencing
    amplifies dense-output noise, so it is integrated tighter than the
    bisection probes need.
    """
    cfg = replace(cfg, rel_tol=min(cfg.rel_tol, 1e-12),
                  abs_tol=min(cfg.abs_tol, 1e-13))
    sol = integrate(problem, beta, cfg, stop_at_u_rel=clamp_ratio)
    if sol.clamped:
        r_c, w_c, phi_c = sol.clamp_state
    else:
        # no clamp event: trajectory never sank that low before its event;
        # match the tail at the deepest point above the event radius
        target = math.log(beta) + math.log(clamp_ratio)
        w_nodes = np.log(sol.u_values)
        if np.min(w_nodes) > target:
            raise ShootingError(
                f"trajectory at beta={beta:.12g} never reached the clamp level "
                f"(min log u/beta = {sol.classification.depth:.3g}); "
                "not a decaying solution")
        idx = int(np.argmax(w_nodes <= target))
        r_c = brentq(lambda r: float(sol.logu_of(r)) - target,
                     sol.nodes[max(idx - 1, 0)], sol.nodes[idx], xtol=1e-13)
        w_c = float(sol.logu_of(r_c))
        phi_c = float(sol.phi_of(r_c))
    if problem.kind == "log":
        tail = _fit_quadratic_tail(problem, r_c, w_c, phi_c)
    else:
        tail = _fit_riccati_tail(problem, cfg, r_c, w_c, cfg.r_max)
    return GroundProfile(beta=beta, problem=problem, config=cfg, solution=sol,
                         tail=tail, tail_start=float(r_c), r_max=cfg.r_max)


# --- scan -------------------------------------------------------------------

@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float
    kind: str  # "flip" or "peak"


@dataclass
class ShootingResult:
    scan: list                 # [(beta, Classification)]
    brackets: list             # validated Brackets, one per confirmed root
    roots: list                # [GroundState]
    discarded: list            # folds: (lo, hi, max depth seen)
    multiplicity: int = 0

    def summary_rows(self):
        return [(b, c.tag, c.radius, c.depth) for b, c in self.scan]


def _classify_one(problem, beta, cfg):
    return integrate(problem, beta, cfg).classification


def scan_classifications(problem: RadialProblem, betas, cfg: IVPConfig,
                         threads: int = 0) -> list:
    """Classify each beta; thread pool only changes wall time, never output."""
    betas = list(betas)
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            classes = list(pool.map(lambda b: _classify_one(problem, b, cfg),
                                    betas))
    else:
        classes = [_classify_one(problem, b, cfg) for b in betas]
    return list(zip(betas, classes))


def scan_beta(problem: RadialProblem, beta_lo: float, beta_hi: float,
              n_samples: int = 32, config: IVPConfig | None = None,
              threads: int = 0, refine_tol: float = 1e-12) -> ShootingResult:
    """Geometric classification scan plus root confirmation.

    Flip brackets are bisected and kept only if the hug depth diverges
    (discarding folds); interior depth peaks are refined by golden search.
    """
    if not (0 < beta_lo < beta_hi):
        raise ShootingError("need 0 < beta_lo < beta_hi")
    if n_samples < 8:
        raise ShootingError("need at least 8 scan samples")
    cfg = config if config is not None else IVPConfig()
    betas = np.geomspace(beta_lo, beta_hi, int(n_samples))
    scan = scan_classifications(problem, betas, cfg, threads)

    tags = [c.tag for _, c in scan]
    depths = np.array([c.depth for _, c in scan])
    if all(t == UNDETERMINED for t in tags):
        raise ShootingError(
            "every sample classified undetermined: r_max too small or "
            "tolerances too loose for this potential")

    flip_cells = [i for i in range(len(scan) - 1)
                  if {tags[i], tags[i + 1]} == {CROSSES_ZERO, GROWS}]
    near_flip = set()
    for i in flip_cells:
        near_flip.update((i - 1, i, i + 1, i + 2))
    peak_cells = [i for i in range(1, len(scan) - 1)
                  if depths[i] <= PEAK_TRIGGER
                  and depths[i] < depths[i - 1] and depths[i] < depths[i + 1]
                  and i not in near_flip]

    roots, brackets, discarded = [], [], []
    for i in flip_cells:
        state = _refine_flip(problem, float(betas[i]), float(betas[i + 1]),
                             tags[i], tags[i + 1], refine_tol, cfg)
        if state is None:
            discarded.append((float(betas[i]), float(betas[i + 1]), "fold"))
        else:
            roots.append(state)
            brackets.append(Bracket(state.bracket[0], state.bracket[1], "flip"))
    for i in peak_cells:
        state = _refine_peak(problem, float(betas[i - 1]), float(betas[i + 1]),
                             refine_tol, cfg)
        if state is None:
            discarded.append((float(betas[i - 1]), float(betas[i + 1]),
                              "shallow peak"))
        else:
            roots.append(state)
            brackets.append(Bracket(state.bracket[0], state.bracket[1], "peak"))

    order = np.argsort([s.beta_star for s in roots])
    roots = [roots[k] for k in order]
    brackets = [brackets[k] for k in order]
    return ShootingResult(scan=scan, brackets=brackets, roots=roots,
                          discarded=discarded, multiplicity=len(roots))


def find_ground(problem: RadialProblem, bracket, tol: float = 1e-12,
                config: IVPConfig | None = None) -> GroundState:
    """Refine one bracket (endpoints must classify differently) to a root."""
    cfg = config if config is not None else IVPConfig()
    lo, hi = float(bracket[0]), float(bracket[1])
    c_lo = _classify_one(problem, lo, cfg)
    c_hi = _classify_one(problem, hi, cfg)
    if {c_lo.tag, c_hi.tag} != {CROSSES_ZERO, GROWS}:
        state = _refine_peak(problem, lo, hi, tol, cfg)
        if state is None:
            raise ShootingError(
                f"bracket ({lo:g}, {hi:g}) has no classification flip "
                f"({c_lo.tag}/{c_hi.tag}) and no confirmed depth peak")
        return state
    state = _refine_flip(problem, lo, hi, c_lo.tag, c_hi.tag, tol, cfg)
    if state is None:
        raise ShootingError(
            f"bracket ({lo:g}, {hi:g}) refined to a fold, not a solution "
            "(saddle-hug depth stayed bounded)")
    return state


def _refine_flip(problem, lo, hi, tag_lo, tag_hi, tol, cfg):
    depth_best = 0.0
    iters = 0
    while (hi - lo) > tol * hi:
        iters += 1
        if iters > 200:
            raise ShootingError(
                f"bisection failed to contract on ({lo:.6g}, {hi:.6g}); "
                "re-run scan with more samples")
        mid = 0.5 * (lo + hi)
        c = _classify_one(problem, mid, cfg)
        depth_best = min(depth_best, c.depth)
        if c.tag == tag_lo:
            lo = mid
        elif c.tag == tag_hi:
            hi = mid
        else:
            # undetermined probe: the trajectory tracked the decaying branch
            # to r_max; treat as the non-crossing side
            if tag_lo == GROWS:
                lo = mid
            else:
                hi = mid
    if depth_best > DEPTH_CONFIRM:
        return None
    beta = 0.5 * (lo + hi)
    profile = build_profile(problem, beta, cfg)
    return GroundState(beta_star=beta, bracket=(lo, hi),
                       method="flip-bisection", depth=depth_best,
                       profile=profile,
                       residual_tail=float(profile.u_of(cfg.r_max)))


_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _refine_peak(problem, lo, hi, tol, cfg):
    """Golden-section maximization of the saddle-hug depth.

    The depth is unimodal around a root and diverges there; the search stops
    at the requested width or when both probes sit on the integrator's
    noise plateau (both very deep and nearly equal).
    """
    def depth(b):
        return _classify_one(problem, b, cfg).depth

    width_stop = max(tol, 1e-10) * hi
    a, b = lo, hi
    x1 = b - _INV_GOLDEN * (b - a)
    x2 = a + _INV_GOLDEN * (b - a)
    d1, d2 = depth(x1), depth(x2)
    depth_best = min(d1, d2)
    while (b - a) > width_stop:
        if d1 <= -30.0 and d2 <= -30.0 and abs(d1 - d2) < 0.2:
            break  # noise plateau: both probes hug to the resolution limit
        if d1 < d2:  # deeper (more negative) is better
            b, x2, d2 = x2, x1, d1
            x1 = b - _INV_GOLDEN * (b - a)
            d1 = depth(x1)
        else:
            a, x1, d1 = x1, x2, d2
            x2 = a + _INV_GOLDEN * (b - a)
            d2 = depth(x2)
        depth_best = min(depth_best, d1, d2)
    if depth_best > DEPTH_CONFIRM:
        return None
    beta = 0.5 * (a + b)
    # depth noise near the divergence limits how precisely the argmax can be
    # placed; report a bracket padded to that resolution so it is certain to
    # contain the root
    pad = max(b - a, 1e-7 * beta)
    profile = build_profile(problem, beta, cfg)
    return GroundState(beta_star=beta, bracket=(beta - pad, beta + pad),
                       method="depth-peak", depth=depth_best, profile=profile,
                       residual_tail=float(profile.u_of(cfg.r_max)))


def find_all_roots(problem: RadialProblem, beta_lo: float, beta_hi: float,
                   n_samples: int = 32, tol: float = 1e-12,
                   config: IVPConfig | None = None,
                   threads: int = 0) -> ShootingResult:
    """Scan + refine: the one-call entry point used by the CLI."""
    return scan_beta(problem, beta_lo, beta_hi, n_samples, config,
                     threads=threads, refine_tol=tol)


# --- large-amplitude asymptotics ---------------------------------------------

@dataclass(frozen=True)
class LargeBetaReport:
    beta: float
    sup_deviation: float
    first_zero_scaled: float   # first zero of u times sqrt(log beta)
    reference_zero: float      # first zero of the limiting oscillator mode


def large_beta_check(problem: LogProblem, beta: float,
                     config: IVPConfig | None = None) -> LargeBetaReport:
    """Compare v(r) = u(r/sqrt(log beta))/beta against the limiting mode.

    For beta -> infinity the rescaled trajectory approaches the solution of
    w'' + (N-1)/r w' + b0 w = 0 with b0 = 2 B(0); the report carries the sup
    deviation on [0, first zero] and the scaled first-zero location.
    """
    if beta < 10.0:
        raise ShootingError("large-amplitude check needs beta >= 10")
    cfg = config if config is not None else IVPConfig()
    scale = math.sqrt(math.log(beta))
    mode = bessel_mode(problem.dim, problem.large_amplitude_coefficient())
    sol = integrate(problem, beta, cfg)
    if sol.classification.tag != CROSSES_ZERO:
        raise ShootingError(
            f"trajectory at beta={beta:g} did not cross zero before r_max")
    r0_scaled = sol.classification.radius * scale
    hi = min(mode.first_zero, sol.r_end * scale) * (1.0 - 1e-9)
    rs = np.linspace(1e-3, hi, 600)
    v = np.exp(sol.logu_of(rs / scale)) / beta
    dev = float(np.max(np.abs(v - mode(rs))))
    return LargeBetaReport(beta=beta, sup_deviation=dev,
                           first_zero_scaled=float(r0_scaled),
                           reference_zero=mode.first_zero)
