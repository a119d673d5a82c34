"""Power-nonlinearity family and its small-exponent limit.

Solves -Lap u + |x|^{alpha sigma} u = |u|^{2 sigma} u radially by the same
classification shooting, checks the stretched-exponential decay and the
amplitude bound, and rescales

    v_sigma(r) = sigma^{alpha/(4+2 alpha sigma)} u_sigma(sigma^{-1/(2+alpha sigma)} r)

toward the logarithmic problem with V = alpha log r as sigma -> 0+.  The
elementary bound sigma^{-1}(s^{t sigma} - 1) >= t log s underlies the limit
and is exposed for property tests.  Reference logarithmic solutions are
cached on disk (override the location with LOGSCHROED_CACHE).
"""

from __future__ import annotations

import hashlib
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator

from .potential import CheckResult, log_power, power_admissible
from .radial_ivp import IVPConfig, LogProblem, PowerProblem
from .shooting import GroundState, ShootingError, find_all_roots


class PowerLawError(RuntimeError):
    pass


@dataclass
class PowerRun:
    """One solved member of the power family."""

    alpha: float
    sigma: float
    dimension: int
    admissibility: CheckResult
    state: GroundState

    @property
    def beta_star(self) -> float:
        return self.state.beta_star

    @property
    def profile(self):
        return self.state.profile


def _power_config(config: IVPConfig | None) -> IVPConfig:
    # slower-than-Gaussian tails need a longer box than the log problem
    if config is not None:
        return config
    return IVPConfig(r_max=30.0)


def solve_power(alpha: float, sigma: float, dimension: int,
                config: IVPConfig | None = None,
                beta_range: tuple = (1e-3, 1e3),
                tol: float = 1e-12) -> PowerRun:
    """Shooting ground state of the power problem; admissibility gated."""
    adm = power_admissible(alpha, sigma, dimension)
    if not adm.passed:
        raise PowerLawError(f"inadmissible (alpha={alpha}, sigma={sigma}, "
                            f"N={dimension}): {adm.reason}")
    cfg = _power_config(config)
    problem = PowerProblem(alpha, sigma, dimension)
    result = find_all_roots(problem, beta_range[0], beta_range[1],
                            n_samples=40, tol=tol, config=cfg)
    if not result.roots:
        raise PowerLawError(
            f"no decaying height found in [{beta_range[0]:g}, {beta_range[1]:g}] "
            f"for alpha={alpha}, sigma={sigma}")
    return PowerRun(alpha=float(alpha), sigma=float(sigma),
                    dimension=int(dimension), admissibility=adm,
                    state=result.roots[0])


@dataclass
class DecayFit:
    exponent: float      # (alpha sigma + 2)/2
    rate: float          # fitted c in log u ~ -c r^exponent
    max_residual: float  # sup |fit - data| over the window
    window: tuple


def decay_bound_check(run: PowerRun) -> DecayFit:
    """Fit the tail against C exp(-c r^{(alpha sigma + 2)/2}).

    The amplitude prefactor r^{-(N-1)/2 - alpha sigma/4} is divided out
    first so the fitted rate is the exponent coefficient itself.
    """
    p = (run.alpha * run.sigma + 2.0) / 2.0
    pref = (run.dimension - 1) / 2.0 + run.alpha * run.sigma / 4.0
    return fit_stretched_tail(run.profile, p, prefactor_power=pref)


def fit_stretched_tail(prof, p: float, prefactor_power: float = 0.0) -> DecayFit:
    # window: integrated region from u/beta <= e^-3 to the clamp
    log_beta = math.log(prof.beta)
    lo_candidates = np.linspace(prof.config.epsilon0 * 10, prof.tail_start, 600)
    rel = prof.logu_of(lo_candidates) - log_beta
    below = np.nonzero(rel <= -3.0)[0]
    if below.size < 10:
        raise PowerLawError("profile has no usable tail window for the fit")
    window = lo_candidates[below]
    x = window ** p
    y = prof.logu_of(window) + prefactor_power * np.log(window)
    coef = np.polyfit(x, y, 1)
    fit = np.polyval(coef, x)
    return DecayFit(exponent=p, rate=float(-coef[0]),
                    max_residual=float(np.max(np.abs(fit - y))),
                    window=(float(window[0]), float(window[-1])))


@dataclass
class RadialBound:
    constant: float         # sup u r^{(N-1)/2 + alpha sigma/4} / ||u||_sigma
    norm_sigma: float
    sup_radius: float


def radial_bound_check(run: PowerRun, r_min: float = 0.1) -> RadialBound:
    """Amplitude bound sup u(r) r^{(N-1)/2 + alpha sigma/4} over the norm."""
    from .variational import RadialProfile  # local import avoids a cycle
    prof = run.profile
    n = run.dimension
    mesh = RadialProfile.build_mesh(n, prof.r_max, 512)
    u = prof.u_of(mesh.nodes)
    du = prof.du_of(mesh.nodes)
    vpow = mesh.nodes ** (run.alpha * run.sigma)
    norm2 = mesh.integrate(du * du) + mesh.integrate(vpow * u * u)
    norm = math.sqrt(norm2)
    rs = np.geomspace(r_min, prof.r_max, 2000)
    weighted = np.exp(prof.logu_of(rs)
                      + ((n - 1) / 2.0 + run.alpha * run.sigma / 4.0) * np.log(rs))
    idx = int(np.argmax(weighted))
    return RadialBound(constant=float(weighted[idx] / norm),
                       norm_sigma=float(norm), sup_radius=float(rs[idx]))


def power_log_bound(t: float, s: float, sigma: float) -> float:
    """sigma^{-1}(s^{t sigma} - 1) - t log s, nonnegative for s, sigma > 0."""
    return (s ** (t * sigma) - 1.0) / sigma - t * math.log(s)


# --- scaling toward the logarithmic problem ----------------------------------

def rescaled_profile(run: PowerRun):
    """Callable v_sigma(r) on [0, r_max * sigma^{1/(2+as)}]."""
    a, s = run.alpha, run.sigma
    expo = a / (4.0 + 2.0 * a * s)
    stretch = s ** (-1.0 / (2.0 + a * s))
    amp = s ** expo
    prof = run.profile
    eps = prof.config.epsilon0

    def v_of(r):
        rr = np.atleast_1d(np.asarray(r, dtype=float)) * stretch
        rr = np.clip(rr, eps, None)
        out = amp * np.exp(prof.logu_of(rr))
        return out if out.shape != (1,) else float(out[0])

    return v_of, stretch


@dataclass
class LimitRow:
    sigma: float
    beta_star: float
    sup_error: float
    tail_rate: float


@dataclass
class LimitStudy:
    alpha: float
    dimension: int
    rows: list
    monotone: bool
    reference_beta: float


def _cache_dir(explicit: str | None) -> Path:
    if explicit:
        return Path(explicit)
    env = os.environ.get("LOGSCHROED_CACHE")
    if env:
        return Path(env)
    return Path(".logschroed_cache")


def _reference_key(alpha: float, dimension: int, cfg: IVPConfig) -> str:
    payload = (f"ref|a={alpha!r}|N={dimension}|eps={cfg.epsilon0!r}"
               f"|rt={cfg.rel_tol!r}|at={cfg.abs_tol!r}|rmax={cfg.r_max!r}")
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def reference_log_solution(alpha: float, dimension: int,
                           config: IVPConfig | None = None,
                           cache_dir: str | None = None):
    """Shooting solution of the V = alpha log r problem, disk cached.

    Returns (beta_star, logu interpolant callable); the cache stores sampled
    log u on a fixed mesh, written atomically (write-then-rename).
    """
    cfg = config if config is not None else IVPConfig()
    cdir = _cache_dir(cache_dir)
    key = _reference_key(alpha, dimension, cfg)
    path = cdir / f"reference_{key}.csv"
    if path.exists():
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        beta = float(data[0, 2])
        interp = PchipInterpolator(data[:, 0], data[:, 1], extrapolate=True)
        return beta, interp
    pot = log_power(alpha, dimension=dimension) if alpha != 0.0 \
        else log_power(0.0, dimension=dimension)
    problem = LogProblem(pot)
    found = find_all_roots(problem, 0.5, 50.0, n_samples=24, config=cfg)
    if not found.roots:
        raise PowerLawError(f"reference problem alpha={alpha} has no root "
                            "in the default scan window")
    state = found.roots[0]
    rs = np.concatenate([np.geomspace(cfg.epsilon0, 1.0, 200, endpoint=False),
                         np.linspace(1.0, cfg.r_max, 1200)])
    logu = state.profile.logu_of(rs)
    cdir.mkdir(parents=True, exist_ok=True)
    rows = np.column_stack([rs, logu, np.full_like(rs, state.beta_star)])
    fd, tmp = tempfile.mkstemp(dir=cdir, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write("r,log_u,beta_star\n")
            for r, lu, b in rows:
                fh.write(f"{r:.17g},{lu:.17g},{b:.17g}\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    interp = PchipInterpolator(rs, logu, extrapolate=True)
    return state.beta_star, interp


def limit_study(alpha: float, sigma_list, dimension: int,
                config: IVPConfig | None = None,
                cache_dir: str | None = None,
                compare_radius: float = 8.0,
                threads: int = 0) -> LimitStudy:
    """Sup-norm distances of v_sigma to the logarithmic solution.

    sigma_list must be decreasing; the distance table should decrease too
    (flagged via monotone=False when it does not, which is diagnostic, not
    fatal).
    """
    sigmas = [float(s) for s in sigma_list]
    if any(b >= a for a, b in zip(sigmas, sigmas[1:])):
        raise PowerLawError("sigma_list must be strictly decreasing")
    cfg_log = config if config is not None else IVPConfig()
    ref_beta, ref_logu = reference_log_solution(alpha, dimension, cfg_log,
                                                cache_dir)
    rs = np.linspace(0.0, compare_radius, 801)
    rs_eval = np.clip(rs, cfg_log.epsilon0, None)
    ref_u = np.exp(ref_logu(rs_eval))

    def run_one(s: float) -> LimitRow:
        run = solve_power(alpha, s, dimension)
        v_of, _ = rescaled_profile(run)
        v_vals = np.array([v_of(float(r)) for r in rs_eval])
        sup = float(np.max(np.abs(v_vals - ref_u)))
        fit = decay_bound_check(run)
        return LimitRow(sigma=s, beta_star=run.beta_star, sup_error=sup,
                        tail_rate=fit.rate)

    if threads and threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(run_one, sigmas))
    else:
        rows = [run_one(s) for s in sigmas]
    sups = [row.sup_error for row in rows]
    monotone = all(b < a for a, b in zip(sups, sups[1:]))
    return LimitStudy(alpha=float(alpha), dimension=int(dimension),
                      rows=rows, monotone=monotone, reference_beta=ref_beta)
