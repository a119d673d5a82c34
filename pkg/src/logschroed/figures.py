"""Optional matplotlib rendering of run artifacts to PNG files.

Figures sit beside the delimited outputs and are never load-bearing; every
number they show is also in the CSV/JSON record.  Import of matplotlib is
local so headless numeric runs never touch it unless asked.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np


def _mpl():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _save(fig, outdir, name) -> Path:
    path = Path(outdir) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    import matplotlib.pyplot as plt
    plt.close(fig)
    return path


def trajectory_figure(outdir, ground, title="decaying profile") -> Path:
    plt = _mpl()
    r, u, du = ground.profile.export_arrays()
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.4))
    ax1.plot(r, u, lw=1.2)
    ax1.axvline(ground.profile.tail_start, color="gray", ls=":", lw=0.8)
    ax1.set_xlabel("r")
    ax1.set_ylabel("u")
    ax1.set_title(f"{title}, beta*={ground.beta_star:.6g}")
    ax2.plot(r, ground.profile.logu_of(r), lw=1.2)
    ax2.axvline(ground.profile.tail_start, color="gray", ls=":", lw=0.8,
                label="tail model start")
    ax2.set_xlabel("r")
    ax2.set_ylabel("log u")
    ax2.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    return _save(fig, outdir, "trajectory.png")


def scan_figure(outdir, result) -> Path:
    plt = _mpl()
    betas = [b for b, _ in result.scan]
    depths = [c.depth for _, c in result.scan]
    tags = [c.tag for _, c in result.scan]
    colors = {"crosses_zero": "tab:red", "grows": "tab:blue",
              "undetermined": "tab:gray"}
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    for tag in colors:
        xs = [b for b, t in zip(betas, tags) if t == tag]
        ys = [d for d, t in zip(depths, tags) if t == tag]
        if xs:
            ax.semilogx(xs, ys, "o", ms=4, color=colors[tag], label=tag)
    for st in result.roots:
        ax.axvline(st.beta_star, color="k", lw=0.8, ls="--")
    ax.set_xlabel("initial height beta")
    ax.set_ylabel("min log(u/beta)")
    ax.legend(fontsize=8)
    ax.set_title(f"classification scan, {result.multiplicity} root(s)")
    fig.tight_layout()
    return _save(fig, outdir, "scan.png")


def energy_sweep_figure(outdir, t_values, i_values, t_u) -> Path:
    plt = _mpl()
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    ax.plot(t_values, i_values, lw=1.2)
    ax.axvline(t_u, color="tab:red", ls=":", label=f"t_u = {t_u:.3g}")
    ax.set_xlabel("log-scale shift t")
    ax.set_ylabel("I(e^{t/2} u)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, outdir, "energy_sweep.png")


def diagnose_figure(outdir, ep) -> Path:
    plt = _mpl()
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.4))
    ax1.plot(ep.radii, ep.energy, lw=1.2)
    ax1.set_xlabel("r")
    ax1.set_ylabel("E(r)")
    ax2.plot(ep.radii, ep.deriv_formula, lw=1.2, label="slope formula")
    ax2.plot(ep.radii, ep.deriv_diff, lw=0.9, ls="--", label="differenced")
    ax2.set_xlabel("r")
    ax2.set_ylabel("E'(r)")
    ax2.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, outdir, "energy_diagnostic.png")


def spectrum_figure(outdir, result) -> Path:
    plt = _mpl()
    fig, ax = plt.subplots(figsize=(5.6, 3.6))
    for n, h, vals in result.levels:
        ax.plot(np.arange(vals.size), vals, "o-", ms=3, lw=0.7,
                label=f"n={n}")
    ax.plot(np.arange(result.extrapolated.size), result.extrapolated, "k*--",
            ms=8, lw=0.8, label="extrapolated")
    ax.axhline(0.0, color="gray", lw=0.6)
    ax.set_xlabel("index")
    ax.set_ylabel("eigenvalue")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, outdir, "spectrum.png")


def powerlimit_figure(outdir, study) -> Path:
    plt = _mpl()
    sigmas = [row.sigma for row in study.rows]
    sups = [row.sup_error for row in study.rows]
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    ax.loglog(sigmas, sups, "o-", lw=1.1)
    ax.set_xlabel("sigma")
    ax.set_ylabel("sup |v_sigma - reference|")
    ax.set_title(f"alpha = {study.alpha:g}")
    fig.tight_layout()
    return _save(fig, outdir, "powerlimit.png")


def checkv2_figure(outdir, pot, pair, result) -> Path:
    plt = _mpl()
    from .potential import liouville_potential_slope
    rs = np.geomspace(1e-3, 100.0, 400)
    gp = [liouville_potential_slope(pot, float(r), pair) for r in rs]
    fig, ax = plt.subplots(figsize=(5.6, 3.4))
    ax.semilogx(rs, gp, lw=1.2)
    ax.axhline(0.0, color="gray", lw=0.6)
    if result.witness is not None:
        ax.axvline(result.witness, color="tab:red", ls=":",
                   label=f"witness r = {result.witness:.4g}")
        ax.legend(fontsize=8)
    ax.set_xlabel("r")
    ax.set_ylabel("slope of transformed potential")
    ax.set_title("pass" if result.passed else "fail")
    fig.tight_layout()
    return _save(fig, outdir, "uniqueness_condition.png")
