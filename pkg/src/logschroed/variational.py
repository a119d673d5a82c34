"""Radial quadrature profiles and the energy/Nehari functionals.

All integrals are over R^N restricted to radial functions:

    I(u) = 1/2 int |grad u|^2 + (V_eff + B) u^2  -  1/2 int B u^2 log u^2
    J(u) =     int |grad u|^2 + V_eff u^2        -      int B u^2 log u^2

realized as omega_N int_0^R f(r) r^{N-1} dr with a composite Gauss-Legendre
rule whose per-cell node count makes polynomials of degree <= 4 times
r^{N-1} exact.  The multiplicative shift e^{t/2} u moves J by
J(e^{t/2}u) = e^t (J(u) - t int B u^2), so the projection onto J = 0 has
the closed form t_u = J(u) / int B u^2.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .potential import NO_PERTURBATION, PerturbationPair, Potential


class ProfileError(ValueError):
    pass


def sphere_area(n: int) -> float:
    """Surface area of the unit sphere in R^N."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def fornberg_weights(x0: float, xs: np.ndarray, m: int = 1) -> np.ndarray:
    """Finite-difference weights for the m-th derivative at x0 on nodes xs."""
    n = xs.size
    c = np.zeros((n, m + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = xs[0] - x0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = xs[i] - x0
        for j in range(i):
            c3 = xs[i] - xs[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


@dataclass
class RadialProfile:
    """Samples of a radial function on a weighted quadrature mesh.

    nodes/weights realize int_0^R f r^{N-1} omega_N dr; the first cell
    starts at 0 and the r^{N-1} factor is absorbed exactly into the weights
    (the rule is exact for degree <= 4 polynomials times r^{N-1} per cell,
    validated at construction).
    """

    dimension: int
    r_cut: float
    nodes: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    cell_edges: np.ndarray
    nodes_per_cell: int

    @classmethod
    def build_mesh(cls, dimension: int, r_cut: float, n_cells: int = 512,
                   nodes_per_cell: int | None = None):
        n = int(dimension)
        if n < 2:
            raise ProfileError("dimension must be >= 2")
        npc = nodes_per_cell or max(4, math.ceil((n + 4) / 2))
        gl_x, gl_w = np.polynomial.legendre.leggauss(npc)
        edges = np.linspace(0.0, r_cut, n_cells + 1)
        mids = 0.5 * (edges[:-1] + edges[1:])
        halves = 0.5 * np.diff(edges)
        nodes = (mids[:, None] + halves[:, None] * gl_x[None, :]).ravel()
        wN = sphere_area(n)
        weights = (halves[:, None] * gl_w[None, :]).ravel() * wN * nodes ** (n - 1)
        prof = cls(dimension=n, r_cut=float(r_cut), nodes=nodes,
                   weights=weights, values=np.zeros_like(nodes),
                   cell_edges=edges, nodes_per_cell=npc)
        prof._validate_exactness()
        return prof

    def _validate_exactness(self):
        # per-cell moments of r^k r^{N-1}, k = 0..4, against the closed form
        n = self.dimension
        npc = self.nodes_per_cell
        wN = sphere_area(n)
        nodes = self.nodes.reshape(-1, npc)
        weights = self.weights.reshape(-1, npc)
        for k in range(5):
            quad = np.sum(weights * nodes ** k, axis=1)
            p = k + n
            exact = wN * (self.cell_edges[1:] ** p - self.cell_edges[:-1] ** p) / p
            err = np.max(np.abs(quad - exact) / np.maximum(exact, 1e-300))
            if err > 1e-12:
                raise ProfileError(
                    f"quadrature exactness check failed at degree {k}: {err:.3g}")

    def with_values(self, values: np.ndarray) -> "RadialProfile":
        vals = np.asarray(values, dtype=float)
        if vals.shape != self.nodes.shape:
            raise ProfileError("value array does not match the mesh")
        return RadialProfile(self.dimension, self.r_cut, self.nodes,
                             self.weights, vals, self.cell_edges,
                             self.nodes_per_cell)

    @classmethod
    def from_callable(cls, fun, dimension: int, r_cut: float,
                      n_cells: int = 512):
        mesh = cls.build_mesh(dimension, r_cut, n_cells)
        return mesh.with_values(np.asarray(fun(mesh.nodes), dtype=float))

    @classmethod
    def from_samples(cls, r_samples, u_samples, dimension: int,
                     r_cut: float | None = None, n_cells: int = 512):
        """Resample onto the quadrature mesh by monotone cubic interpolation."""
        r_arr = np.asarray(r_samples, dtype=float)
        u_arr = np.asarray(u_samples, dtype=float)
        cut = float(r_cut) if r_cut is not None else float(r_arr[-1])
        interp = PchipInterpolator(r_arr, u_arr, extrapolate=True)
        mesh = cls.build_mesh(dimension, cut, n_cells)
        vals = interp(mesh.nodes)
        # constant extension below the first sample (radial symmetry: u'(0)=0)
        vals[mesh.nodes < r_arr[0]] = u_arr[0]
        return mesh.with_values(np.asarray(vals, dtype=float))

    def integrate(self, integrand_values: np.ndarray) -> float:
        return float(np.dot(self.weights, integrand_values))

    def gradient_values(self) -> np.ndarray:
        """du/dr at the nodes by 5-point centered differences on the mesh."""
        r, u = self.nodes, self.values
        m = r.size
        out = np.empty(m)
        for i in range(m):
            lo = min(max(i - 2, 0), m - 5)
            sl = slice(lo, lo + 5)
            out[i] = np.dot(fornberg_weights(r[i], r[sl]), u[sl])
        return out


def profile_from_ground(ground, n_cells: int = 512,
                        r_cut: float | None = None) -> RadialProfile:
    """Quadrature profile sampled from an assembled decaying solution."""
    cut = float(r_cut) if r_cut is not None else float(ground.r_max)
    mesh = RadialProfile.build_mesh(ground.problem.dim, cut, n_cells)
    return mesh.with_values(ground.u_of(mesh.nodes))


# --- functionals -------------------------------------------------------------

# cells with |u| at or below this contribute zero to int u^2 log u^2
U_LOG_FLOOR = 1e-150
# a profile should have decayed below this at the cut radius
TRUNCATION_WARN = 1e-12


def _terms(profile: RadialProfile, pot: Potential, pair: PerturbationPair):
    r, u = profile.nodes, profile.values
    du = profile.gradient_values()
    v_eff = np.empty_like(r)
    bad = 0
    for i, rr in enumerate(r):
        val = pot.v(float(rr)) + pair.delta * pair.a(float(rr))
        if not math.isfinite(val):
            val, bad = 0.0, bad + 1
        v_eff[i] = val
    if bad:
        warnings.warn(f"{bad} node(s) had non-finite V and were skipped",
                      stacklevel=3)
    b_vals = np.array([pair.big_b(float(rr)) for rr in r])
    grad2 = profile.integrate(du * du)
    v_u2 = profile.integrate(v_eff * u * u)
    b_u2 = profile.integrate(b_vals * u * u)
    au = np.abs(u)
    logterm = np.where(au > U_LOG_FLOOR,
                       2.0 * u * u * np.log(np.maximum(au, U_LOG_FLOOR)), 0.0)
    b_u2_log = profile.integrate(b_vals * logterm)
    return grad2, v_u2, b_u2, b_u2_log


def _check_truncation(profile: RadialProfile):
    edge = abs(profile.values[-1])
    if edge > TRUNCATION_WARN:
        warnings.warn(
            f"profile has not decayed at the cut radius (|u(R)|={edge:.3g}); "
            "functional values carry truncation error", stacklevel=3)


def energy_I(profile: RadialProfile, pot: Potential,
             pair: PerturbationPair | None = None) -> float:
    """Action functional; on solutions 2 I equals int B u^2."""
    pr = pair if pair is not None else NO_PERTURBATION
    _check_truncation(profile)
    grad2, v_u2, b_u2, b_u2_log = _terms(profile, pot, pr)
    return 0.5 * (grad2 + v_u2 + b_u2) - 0.5 * b_u2_log


def nehari_J(profile: RadialProfile, pot: Potential,
             pair: PerturbationPair | None = None) -> float:
    """Nehari functional J(u) = I'(u)u; zero on solutions."""
    pr = pair if pair is not None else NO_PERTURBATION
    _check_truncation(profile)
    grad2, v_u2, _, b_u2_log = _terms(profile, pot, pr)
    return grad2 + v_u2 - b_u2_log


def nehari_project(profile: RadialProfile, pot: Potential,
                   pair: PerturbationPair | None = None):
    """Unique multiplicative shift onto the Nehari manifold.

    Returns (t_u, projected profile) with t_u = J(u)/int B u^2; the
    projection e^{t_u/2} u satisfies J = 0 up to roundoff in the fixed
    quadrature.
    """
    pr = pair if pair is not None else NO_PERTURBATION
    u = profile.values
    if float(np.max(np.abs(u))) == 0.0:
        raise ProfileError("cannot project the zero profile")
    grad2, v_u2, b_u2, b_u2_log = _terms(profile, pot, pr)
    t_u = (grad2 + v_u2 - b_u2_log) / b_u2
    projected = profile.with_values(math.exp(t_u / 2.0) * u)
    return t_u, projected


def truncation_bound(profile: RadialProfile, ground=None) -> float:
    """Crude bound on the mass beyond the cut from the Gaussian envelope."""
    r_cut = profile.r_cut
    n = profile.dimension
    if ground is not None:
        env = ground.gaussian_envelope()
        amp, tau = env["amplitude"], env["tau"]
        u_cut = amp * math.exp(-tau * r_cut ** 2)
    else:
        u_cut = abs(float(profile.values[-1]))
    scale = 1.0 + abs(2.0 * math.log(max(u_cut, 1e-300)))
    return sphere_area(n) * r_cut ** (n - 1) * u_cut ** 2 * scale
