"""Flat key=value run configuration with dotted sections.

The format is deliberately trivial: one `section.key = value` per line,
`#` comments, blank lines ignored.  Unknown keys are rejected with their
line number; every run record embeds the fully resolved (defaulted)
configuration so runs are reproducible from the record alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .potential import (PerturbationPair, Potential, constant, from_table,
                        inverted_harmonic, log_power)
from .radial_ivp import IVPConfig

import numpy as np


class ConfigError(ValueError):
    pass


def _as_bool(s: str) -> bool:
    low = s.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _as_float_list(s: str) -> list:
    return [float(tok) for tok in s.replace(";", ",").split(",") if tok.strip()]


# key -> (parser, default); None default means "no value unless given"
SCHEMA = {
    "potential.kind": (str, "log_power"),
    "potential.alpha1": (float, 0.0),
    "potential.alpha2": (float, 0.0),
    "potential.alpha3": (float, 0.0),
    "potential.alpha4": (float, 0.0),
    "potential.mu": (float, 0.1875),
    "potential.c": (float, 0.0),
    "potential.table": (str, None),
    "potential.dimension": (int, 3),
    "perturbation.delta": (float, 0.0),
    "perturbation.plateau": (float, 1.0),
    "perturbation.support": (float, 2.0),
    "perturbation.a_scale": (float, 0.0),
    "solver.epsilon0": (float, 1e-6),
    "solver.rel_tol": (float, 1e-10),
    "solver.abs_tol": (float, 1e-12),
    "solver.r_max": (float, 20.0),
    "solver.grow_factor": (float, 10.0),
    "solver.floor_u": (float, 1e-300),
    "task.beta_lo": (float, 0.5),
    "task.beta_hi": (float, 50.0),
    "task.n_samples": (int, 32),
    "task.tol": (float, 1e-12),
    "task.beta": (float, 1e6),
    "task.eigen_count": (int, 6),
    "task.eigen_base_n": (int, 1500),
    "task.eigen_r_cut": (float, 12.0),
    "task.tol_zero": (float, 1e-2),
    "task.mesh_cells": (int, 512),
    "task.alpha": (float, 0.0),
    "task.sigma": (float, 1.0),
    "task.sigma_list": (_as_float_list, [0.5, 0.25, 0.1, 0.05]),
    "task.compare_radius": (float, 8.0),
    "output.dir": (str, None),
    "output.deterministic": (_as_bool, True),
}


@dataclass
class RunConfig:
    entries: dict = field(default_factory=dict)
    source: str = "<defaults>"

    def __getitem__(self, key: str):
        return self.entries[key]

    def get(self, key: str, default=None):
        return self.entries.get(key, default)

    def resolved(self) -> dict:
        """Every schema key with its effective value, for run records."""
        out = {}
        for key, (_, default) in SCHEMA.items():
            val = self.entries.get(key, default)
            if isinstance(val, list):
                val = ",".join(f"{x:g}" for x in val)
            out[key] = val
        return dict(sorted(out.items()))


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', "
                              f"got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in SCHEMA:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        parser, _ = SCHEMA[key]
        try:
            entries[key] = parser(value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {exc}")
    cfg = RunConfig(entries=entries, source=source)
    # materialize defaults so downstream access is uniform
    for key, (_, default) in SCHEMA.items():
        cfg.entries.setdefault(key, default)
    return cfg


def load_config(path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}")
    return parse_config(text, source=str(p))


def build_potential(cfg: RunConfig) -> Potential:
    kind = cfg["potential.kind"]
    dim = cfg["potential.dimension"]
    if kind == "log_power":
        return log_power(cfg["potential.alpha1"], cfg["potential.alpha2"],
                         cfg["potential.alpha3"], cfg["potential.alpha4"],
                         dimension=dim)
    if kind == "inverted_harmonic":
        return inverted_harmonic(cfg["potential.mu"], dimension=dim)
    if kind == "constant":
        return constant(cfg["potential.c"], dimension=dim)
    if kind == "table":
        path = cfg["potential.table"]
        if not path:
            raise ConfigError("potential.kind=table needs potential.table")
        data = np.loadtxt(path, delimiter=",", ndmin=2)
        return from_table(data[:, 0], data[:, 1], dimension=dim)
    raise ConfigError(f"unknown potential.kind {kind!r}")


def build_pair(cfg: RunConfig) -> PerturbationPair:
    return PerturbationPair(delta=cfg["perturbation.delta"],
                            plateau=cfg["perturbation.plateau"],
                            support=cfg["perturbation.support"],
                            a_scale=cfg["perturbation.a_scale"])


def build_ivp_config(cfg: RunConfig) -> IVPConfig:
    return IVPConfig(epsilon0=cfg["solver.epsilon0"],
                     rel_tol=cfg["solver.rel_tol"],
                     abs_tol=cfg["solver.abs_tol"],
                     r_max=cfg["solver.r_max"],
                     grow_factor=cfg["solver.grow_factor"],
                     floor_u=cfg["solver.floor_u"])
