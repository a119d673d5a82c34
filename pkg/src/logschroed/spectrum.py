"""Linearization around a decaying profile and its low radial spectrum.

The linearized operator psi -> -Lap psi + V psi - (log w^2 + 2) psi acts on
radial functions; substituting psi = r^{-(N-1)/2} chi removes the first
derivative and leaves the half-line Schroedinger form

    -chi'' + q(r) chi,   q = V - log w^2 - 2 + (N-1)(N-3)/(4 r^2),

discretized by second-order central differences on a uniform mesh with
Dirichlet ends.  The matrix is symmetric tridiagonal, so the lowest
eigenvalues come from LAPACK's Sturm-sequence bisection; three mesh levels
feed Richardson extrapolation.  w solves the equation, so chi = r^{(N-1)/2} w
is always an eigenvector with eigenvalue -2: the sharpest whole-pipeline
consistency check.  Nondegeneracy asks that no extrapolated eigenvalue sits
near zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .potential import Potential


class SpectrumError(ValueError):
    pass


@dataclass(frozen=True)
class LinearizedOperator:
    """Symmetric tridiagonal discretization of -d^2/dr^2 + q on [eps, R]."""

    dimension: int
    mesh: np.ndarray       # interior nodes, uniform
    h: float
    diagonal: np.ndarray   # 2/h^2 + q_i
    off_diagonal: np.ndarray  # -1/h^2

    @property
    def q(self) -> np.ndarray:
        return self.diagonal - 2.0 / self.h ** 2

    def rayleigh(self, x: np.ndarray) -> float:
        ax = self.diagonal * x
        ax[:-1] += self.off_diagonal * x[1:]
        ax[1:] += self.off_diagonal * x[:-1]
        return float(np.dot(x, ax) / np.dot(x, x))


def _mesh(n: int, r_cut: float, eps_inner: float) -> tuple:
    h = (r_cut - eps_inner) / (n + 1)
    return eps_inner + h * np.arange(1, n + 1), h


def assemble(ground, pot: Potential, n: int, r_cut: float = 12.0,
             eps_inner: float | None = None) -> LinearizedOperator:
    """Build the tridiagonal operator around an assembled profile.

    For N = 2 the 1/(4r^2) well is attractive, so the inner Dirichlet cut
    is tied to the mesh width (8h) and refined jointly with it; for N >= 3
    the default inner cut is the integration origin offset.
    """
    dim = pot.dimension
    if eps_inner is None:
        h0 = (r_cut) / (n + 1)
        eps_inner = 8.0 * h0 if dim == 2 else ground.config.epsilon0
    r, h = _mesh(n, r_cut, eps_inner)
    logw2 = 2.0 * ground.logu_of(r)
    if not np.all(np.isfinite(logw2)):
        raise SpectrumError("profile is not positive on the mesh interior")
    v_vals = np.array([pot.v(float(s)) for s in r])
    q = v_vals - logw2 - 2.0 + (dim - 1) * (dim - 3) / (4.0 * r * r)
    return LinearizedOperator(dimension=dim, mesh=r, h=h,
                              diagonal=2.0 / h ** 2 + q,
                              off_diagonal=-np.ones(n - 1) / h ** 2)


def operator_from_arrays(dimension: int, mesh: np.ndarray,
                         q: np.ndarray) -> LinearizedOperator:
    """Assemble directly from a potential array (synthetic/negative controls)."""
    mesh = np.asarray(mesh, dtype=float)
    h = float(mesh[1] - mesh[0])
    return LinearizedOperator(dimension=dimension, mesh=mesh, h=h,
                              diagonal=2.0 / h ** 2 + np.asarray(q, float),
                              off_diagonal=-np.ones(mesh.size - 1) / h ** 2)


def lowest_of(op: LinearizedOperator, k: int, vectors: bool = False):
    """k smallest eigenvalues (Sturm bisection) and optionally vectors."""
    if k > 10:
        raise SpectrumError("k is capped at 10")
    if vectors:
        vals, vecs = eigh_tridiagonal(op.diagonal, op.off_diagonal,
                                      select="i", select_range=(0, k - 1))
        return vals, vecs
    vals = eigh_tridiagonal(op.diagonal, op.off_diagonal, select="i",
                            select_range=(0, k - 1), eigvals_only=True)
    return vals


@dataclass
class SpectrumResult:
    """Eigenvalues per mesh level plus Richardson limits."""

    levels: list              # [(n, h, eigenvalues array)]
    extrapolated: np.ndarray
    min_abs: float
    eigenvector_samples: np.ndarray   # lowest eigenvector at finest level
    eigenvector_mesh: np.ndarray
    converged: bool
    sign_stable: bool
    eps_sensitivity: float | None = None


def lowest_eigenvalues(ground, pot: Potential, k: int = 6,
                       base_n: int = 1500, r_cut: float = 12.0) -> SpectrumResult:
    """Eigenvalues on meshes n, 2n, 4n with second-order Richardson limits."""
    sizes = [base_n, 2 * base_n, 4 * base_n]
    levels = []
    for n in sizes:
        op = assemble(ground, pot, n, r_cut)
        vals = lowest_of(op, k)
        if np.any(np.diff(vals) <= 0):
            raise SpectrumError("eigenvalues not strictly increasing")
        levels.append((n, op.h, vals))
    l1, l2, l3 = (lv[2] for lv in levels)
    r12 = (4.0 * l2 - l1) / 3.0
    r23 = (4.0 * l3 - l2) / 3.0
    extrap = (16.0 * r23 - r12) / 15.0
    converged = bool(np.all(np.abs(r23 - r12) < 1e-4 * np.maximum(1.0, np.abs(extrap))))
    sign_stable = bool(np.all(np.sign(l1) == np.sign(l3)) and
                       np.all(np.sign(l3) == np.sign(extrap)))
    op_fine = assemble(ground, pot, sizes[-1], r_cut)
    _, vecs = lowest_of(op_fine, 1, vectors=True)
    eps_sens = None
    if pot.dimension == 2:
        # doubled inner cut at the finest level: reported sensitivity
        op_alt = assemble(ground, pot, sizes[-1], r_cut,
                          eps_inner=16.0 * r_cut / (sizes[-1] + 1))
        alt = lowest_of(op_alt, k)
        eps_sens = float(np.max(np.abs(alt - l3)))
    return SpectrumResult(levels=levels, extrapolated=extrap,
                          min_abs=float(np.min(np.abs(extrap))),
                          eigenvector_samples=vecs[:, 0],
                          eigenvector_mesh=op_fine.mesh,
                          converged=converged, sign_stable=sign_stable,
                          eps_sensitivity=eps_sens)


@dataclass(frozen=True)
class NondegeneracyVerdict:
    nondegenerate: bool
    gap: float
    offending_eigenvalue: float | None = None
    offending_vector: np.ndarray | None = None

    @property
    def label(self) -> str:
        return "Nondegenerate" if self.nondegenerate else "Degenerate"


def nondegeneracy_check(result: SpectrumResult,
                        tol_zero: float = 1e-2) -> NondegeneracyVerdict:
    """Nondegenerate iff no extrapolated eigenvalue is within tol_zero of 0."""
    if not result.converged:
        raise SpectrumError("spectrum has not converged across mesh levels")
    gap = result.min_abs
    if gap > tol_zero and result.sign_stable:
        return NondegeneracyVerdict(True, gap)
    idx = int(np.argmin(np.abs(result.extrapolated)))
    return NondegeneracyVerdict(False, gap,
                                float(result.extrapolated[idx]),
                                result.eigenvector_samples)


def universal_pair_rayleigh(ground, pot: Potential, n: int = 6000,
                            r_cut: float = 12.0) -> float:
    """Rayleigh quotient of chi = r^{(N-1)/2} w: equals -2 for true solutions."""
    op = assemble(ground, pot, n, r_cut)
    r = op.mesh
    chi = np.exp(0.5 * (pot.dimension - 1) * np.log(r) + ground.logu_of(r))
    return op.rayleigh(chi)
