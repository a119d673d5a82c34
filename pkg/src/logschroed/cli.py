"""Command line interface: one subcommand per pipeline, reproducible artifacts.

Every run writes a JSON record embedding the fully resolved configuration
plus CSV data files; exit status is 0 for pass-type verdicts, 1 for fail
verdicts, and 2 for errors.  --figures additionally renders PNG plots next
to the delimited output.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import figures
from .config import (ConfigError, RunConfig, build_ivp_config, build_pair,
                     build_potential, load_config)
from .diagnostics import (DiagnosticsError, energy_pattern_check,
                          pointwise_energy, ratio_monotonicity, tail_checks)
from .potential import PotentialError, check_uniqueness_condition
from .powerlaw import PowerLawError, limit_study
from .radial_ivp import IntegrationError, LogProblem
from .records import RecordError, write_csv, write_record
from .shooting import ShootingError, find_all_roots
from .spectrum import (SpectrumError, lowest_eigenvalues, nondegeneracy_check,
                       universal_pair_rayleigh)
from .variational import energy_I, nehari_J, nehari_project, profile_from_ground

KNOWN_ERRORS = (ConfigError, PotentialError, IntegrationError, ShootingError,
                DiagnosticsError, SpectrumError, PowerLawError, RecordError,
                OSError)


def _auto_threads(n: int) -> int:
    if n == 0:
        return min(8, os.cpu_count() or 1)
    return max(1, n)


def _say(quiet: bool, msg: str):
    if not quiet:
        print(msg)


def _base_record(cfg: RunConfig, subcommand: str) -> dict:
    return {"subcommand": subcommand, "config": cfg.resolved()}


def _export_profile_csv(outdir: Path, name: str, ground) -> Path:
    r, u, du = ground.profile.export_arrays()
    return write_csv(outdir / name, ["r", "u", "du"], zip(r, u, du))


def _solve_problem(cfg: RunConfig):
    pot = build_potential(cfg)
    pair = build_pair(cfg)
    return pot, pair, LogProblem(pot, pair), build_ivp_config(cfg)


def cmd_solve(cfg: RunConfig, outdir: Path, opts) -> int:
    pot, pair, problem, ivp = _solve_problem(cfg)
    result = find_all_roots(problem, cfg["task.beta_lo"], cfg["task.beta_hi"],
                            cfg["task.n_samples"], tol=cfg["task.tol"],
                            config=ivp, threads=opts.threads)
    record = _base_record(cfg, "solve")
    record["roots"] = [{
        "beta_star": st.beta_star,
        "bracket": list(st.bracket),
        "bracket_width": st.bracket_width,
        "method": st.method,
        "hug_depth": st.depth,
        "residual_tail": st.residual_tail,
        "tail_start": st.profile.tail_start,
    } for st in result.roots]
    record["multiplicity"] = result.multiplicity
    record["classification_table"] = [
        {"beta": b, "tag": c.tag, "radius": c.radius, "depth": c.depth}
        for b, c in result.scan]
    artifacts = []
    if not result.roots:
        record["beta_star"] = None
        write_record(outdir / "record.json", record)
        _say(opts.quiet, "solve: no decaying height found")
        return 1
    # the reported ground state minimizes the action among found roots
    if len(result.roots) > 1:
        levels = []
        for st in result.roots:
            prof = profile_from_ground(st.profile, n_cells=256)
            levels.append(energy_I(prof, pot, pair))
        pick = int(np.argmin(levels))
        record["action_levels"] = levels
    else:
        pick = 0
    ground = result.roots[pick]
    record["beta_star"] = ground.beta_star
    record["bracket"] = list(ground.bracket)
    record["residual"] = ground.residual_tail
    for i, st in enumerate(result.roots):
        artifacts.append(_export_profile_csv(outdir, f"profile_{i}.csv", st).name)
    scan_rows = [(b, c.tag, c.radius, c.depth) for b, c in result.scan]
    artifacts.append(write_csv(outdir / "scan.csv",
                                   ["beta", "tag", "radius", "depth"],
                                   scan_rows).name)
    record["artifacts"] = artifacts
    write_record(outdir / "record.json", record)
    if opts.figures:
        figures.trajectory_figure(outdir, ground)
        figures.scan_figure(outdir, result)
    _say(opts.quiet, f"solve: beta* = {ground.beta_star:.12g} "
                     f"({result.multiplicity} root(s))")
    return 0


def cmd_scan(cfg: RunConfig, outdir: Path, opts) -> int:
    _, _, problem, ivp = _solve_problem(cfg)
    result = find_all_roots(problem, cfg["task.beta_lo"], cfg["task.beta_hi"],
                            cfg["task.n_samples"], tol=cfg["task.tol"],
                            config=ivp, threads=opts.threads)
    record = _base_record(cfg, "scan")
    record["multiplicity"] = result.multiplicity
    record["roots"] = [{"beta_star": st.beta_star, "bracket": list(st.bracket),
                        "method": st.method} for st in result.roots]
    record["discarded_brackets"] = [list(map(str, d)) for d in result.discarded]
    record["classification_table"] = [
        {"beta": b, "tag": c.tag, "radius": c.radius, "depth": c.depth}
        for b, c in result.scan]
    scan_rows = [(b, c.tag, c.radius, c.depth) for b, c in result.scan]
    artifacts = [write_csv(outdir / "scan.csv",
                           ["beta", "tag", "radius", "depth"], scan_rows).name]
    record["artifacts"] = artifacts
    write_record(outdir / "record.json", record)
    if opts.figures:
        figures.scan_figure(outdir, result)
    _say(opts.quiet, f"scan: multiplicity = {result.multiplicity}")
    return 0 if result.multiplicity > 0 else 1


def _ground_for(cfg: RunConfig, opts):
    pot, pair, problem, ivp = _solve_problem(cfg)
    result = find_all_roots(problem, cfg["task.beta_lo"], cfg["task.beta_hi"],
                            cfg["task.n_samples"], tol=cfg["task.tol"],
                            config=ivp, threads=opts.threads)
    if not result.roots:
        raise ShootingError("no decaying solution in the scan window")
    return pot, pair, result.roots[0]


def cmd_energy(cfg: RunConfig, outdir: Path, opts) -> int:
    pot, pair, ground = _ground_for(cfg, opts)
    prof = profile_from_ground(ground.profile, n_cells=cfg["task.mesh_cells"])
    i_val = energy_I(prof, pot, pair)
    j_val = nehari_J(prof, pot, pair)
    t_u, _ = nehari_project(prof, pot, pair)
    b_u2 = 2.0 * i_val - j_val  # int B u^2 on the manifold identity
    level_residual = abs(2.0 * i_val - b_u2)
    record = _base_record(cfg, "energy")
    record.update({"beta_star": ground.beta_star, "I": i_val, "J": j_val,
                   "t_u": t_u, "level_residual": level_residual,
                   "b_mass": b_u2})
    ts = np.linspace(-5.0, 5.0, 101)
    sweep = [energy_I(prof.with_values(math.exp(t / 2.0) * prof.values),
                      pot, pair) for t in ts]
    artifacts = [write_csv(outdir / "energy_sweep.csv", ["t", "I"],
                           zip(ts, sweep)).name]
    record["artifacts"] = artifacts
    write_record(outdir / "record.json", record)
    if opts.figures:
        figures.energy_sweep_figure(outdir, ts, sweep, t_u)
    verdict = abs(j_val) <= 1e-5 * abs(b_u2) and abs(t_u) <= 1e-5
    _say(opts.quiet, f"energy: I = {i_val:.10g}, J = {j_val:.3g}, "
                     f"t_u = {t_u:.3g}")
    return 0 if verdict else 1


def cmd_diagnose(cfg: RunConfig, outdir: Path, opts) -> int:
    pot, pair, ground = _ground_for(cfg, opts)
    ep = pointwise_energy(ground.profile, pot, pair)
    tail = tail_checks(ground.profile)
    record = _base_record(cfg, "diagnose")
    record["beta_star"] = ground.beta_star
    v2 = check_uniqueness_condition(pot, pair=pair)
    record["uniqueness_condition"] = {"passed": v2.passed,
                                      "witness": v2.witness,
                                      "reason": v2.reason}
    pattern_ok = None
    if v2.passed:
        pat = energy_pattern_check(ep, pot, pair)
        pattern_ok = pat.passed
        record["energy_pattern"] = {"passed": pat.passed,
                                    "witness": pat.witness,
                                    "reason": pat.reason}
    record["tail"] = {
        "weighted_monotone": tail.weighted_monotone,
        "weighted_final": tail.weighted_final,
        "flux_peak": tail.flux_peak,
        "flux_tail_max": tail.flux_tail_max,
        "flux_vanishes": tail.flux_vanishes,
        "negative_slope_radius": tail.negative_slope_radius,
    }
    rows = zip(ep.radii, ep.v, ep.energy, ep.deriv_formula, ep.deriv_diff,
               ep.g_slope)
    artifacts = [write_csv(outdir / "energy_profile.csv",
                           ["r", "v", "E", "dE_formula", "dE_diff",
                            "G_slope"], rows).name]
    record["artifacts"] = artifacts
    write_record(outdir / "record.json", record)
    if opts.figures:
        figures.diagnose_figure(outdir, ep)
    ok = tail.passed and (pattern_ok is not False)
    _say(opts.quiet, f"diagnose: tail {'ok' if tail.passed else 'FAIL'}, "
                     f"pattern {pattern_ok}")
    return 0 if ok else 1


def cmd_spectrum(cfg: RunConfig, outdir: Path, opts) -> int:
    pot, pair, ground = _ground_for(cfg, opts)
    result = lowest_eigenvalues(ground.profile, pot, k=cfg["task.eigen_count"],
                                base_n=cfg["task.eigen_base_n"],
                                r_cut=cfg["task.eigen_r_cut"])
    verdict = nondegeneracy_check(result, tol_zero=cfg["task.tol_zero"])
    rayleigh = universal_pair_rayleigh(ground.profile, pot,
                                       r_cut=cfg["task.eigen_r_cut"])
    record = _base_record(cfg, "spectrum")
    record.update({
        "beta_star": ground.beta_star,
        "eigenvalues_by_level": {str(n): vals.tolist()
                                 for n, _, vals in result.levels},
        "extrapolated": result.extrapolated.tolist(),
        "min_abs": result.min_abs,
        "universal_pair_rayleigh": rayleigh,
        "verdict": verdict.label,
        "gap": verdict.gap,
    })
    if result.eps_sensitivity is not None:
        record["inner_cut_sensitivity"] = result.eps_sensitivity
    rows = []
    for n, h, vals in result.levels:
        for i, v in enumerate(vals):
            rows.append((n, h, i, v))
    artifacts = [write_csv(outdir / "eigenvalues.csv",
                           ["n", "h", "index", "eigenvalue"], rows).name]
    record["artifacts"] = artifacts
    write_record(outdir / "record.json", record)
    if opts.figures:
        figures.spectrum_figure(outdir, result)
    _say(opts.quiet, f"spectrum: {verdict.label} (gap {verdict.gap:.4g}, "
                     f"universal pair {rayleigh:.6f})")
    return 0 if verdict.nondegenerate else 1


def cmd_powerlimit(cfg: RunConfig, outdir: Path, opts) -> int:
    study = limit_study(cfg["task.alpha"], cfg["task.sigma_list"],
                        cfg["potential.dimension"],
                        compare_radius=cfg["task.compare_radius"],
                        threads=opts.threads)
    record = _base_record(cfg, "powerlimit")
    record.update({
        "alpha": study.alpha,
        "reference_beta": study.reference_beta,
        "monotone_decreasing": study.monotone,
        "table": [{"sigma": r.sigma, "beta_star": r.beta_star,
                   "sup_error": r.sup_error, "tail_rate": r.tail_rate}
                  for r in study.rows],
    })
    rows = [(r.sigma, r.sup_error, r.tail_rate) for r in study.rows]
    artifacts = [write_csv(outdir / "powerlimit.csv",
                           ["sigma", "sup_error", "tail_rate"], rows).name]
    record["artifacts"] = artifacts
    write_record(outdir / "record.json", record)
    if opts.figures:
        figures.powerlimit_figure(outdir, study)
    _say(opts.quiet, "powerlimit: distances "
         + ", ".join(f"{r.sup_error:.4g}" for r in study.rows)
         + (" (monotone)" if study.monotone else " (NOT monotone)"))
    return 0 if study.monotone else 1


def cmd_checkv2(cfg: RunConfig, outdir: Path, opts) -> int:
    pot = build_potential(cfg)
    pair = build_pair(cfg)
    result = check_uniqueness_condition(pot, pair=pair)
    record = _base_record(cfg, "checkv2")
    record["passed"] = result.passed
    record["witness"] = result.witness
    record["reason"] = result.reason
    write_record(outdir / "record.json", record)
    if opts.figures:
        figures.checkv2_figure(outdir, pot, pair, result)
    _say(opts.quiet, f"checkv2: {'Pass' if result.passed else 'Fail'}"
         + (f" at r = {result.witness:.6g}" if result.witness else ""))
    return 0 if result.passed else 1


COMMANDS = {
    "solve": cmd_solve,
    "scan": cmd_scan,
    "energy": cmd_energy,
    "diagnose": cmd_diagnose,
    "spectrum": cmd_spectrum,
    "powerlimit": cmd_powerlimit,
    "checkv2": cmd_checkv2,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="logschroed",
        description="Radial solver and diagnostics for the logarithmic "
                    "Schroedinger equation")
    parser.add_argument("subcommand", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="key=value run config")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--threads", type=int, default=0,
                        help="worker threads (0 = auto); never affects results")
    parser.add_argument("--quiet", action="store_true")
    parser.add_argument("--figures", action="store_true",
                        help="render PNG figures beside the CSV output")
    opts = parser.parse_args(argv)
    opts.threads = _auto_threads(opts.threads)
    try:
        cfg = load_config(opts.config)
        outdir = Path(opts.out or cfg.get("output.dir")
                      or f"runs/{opts.subcommand}")
        outdir.mkdir(parents=True, exist_ok=True)
        return COMMANDS[opts.subcommand](cfg, outdir, opts)
    except KNOWN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
