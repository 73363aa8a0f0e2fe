"""YAML experiment configuration: schema, defaults, and builders.

Sections (all optional unless noted):

potential:              # required for most subcommands
  family: pure_hardy | two_scale | table
  lambda1: float        # pure_hardy uses lambda1 only
  lambda2: float
  criticality: subcritical | critical     # two_scale flavor at infinity
  dim: int              # spatial dimension N >= 2 (default 3)
  path: str             # table family: two-column CSV (r, V)

modes:
  k: [0, 1]             # modes to build / evolve (default [0])

lorentz:
  p: 1.0                # float or "inf"
  q: inf
  sigma: 1.0
  theta: inf
  ell: 0
  j: 0

times:
  start: 0.1
  end: 1.0e4
  count: 33
  fit_window: [1.0e2, 1.0e4]

solver:
  nodes_per_decade: 48
  r_min: 1.0e-5
  local_tol: 1.0e-6
  profile_tol: 1.0e-10
  threads: 1

outputs:
  directory: out
  figures: true

data:
  family: bump | gaussian | ground_state
  center: 0.5
"""

from __future__ import annotations

import math
import platform
from math import inf
from pathlib import Path

import numpy as np
import yaml

from .decay import ExperimentConfig
from .potential import (PotentialSpec, make_pure_hardy, make_table,
                        make_two_scale)

DEFAULTS = {
    "potential": {"family": "pure_hardy", "lambda1": 0.0, "lambda2": None,
                  "criticality": "subcritical", "dim": 3, "path": None},
    "modes": {"k": [0]},
    "lorentz": {"p": 1.0, "q": "inf", "sigma": 1.0, "theta": "inf",
                "ell": 0, "j": 0},
    "times": {"start": 0.1, "end": 1.0e4, "count": 33,
              "fit_window": [1.0e2, 1.0e4]},
    "solver": {"nodes_per_decade": 48, "r_min": 1.0e-5,
               "local_tol": 1.0e-6, "profile_tol": 1.0e-10, "threads": 1},
    "outputs": {"directory": "out", "figures": True},
    "data": {"family": "bump", "center": 0.5},
}


def _as_index(x) -> float:
    if isinstance(x, str):
        if x.lower() in ("inf", "infinity", "oo"):
            return inf
        return float(x)
    return float(x)


def load_config(path=None) -> dict:
    """Read a YAML config and merge it over the documented defaults."""
    cfg = {k: dict(v) for k, v in DEFAULTS.items()}
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            user = yaml.safe_load(fh) or {}
        for section, values in user.items():
            if section not in cfg:
                raise KeyError(f"unknown config section {section!r}")
            if not isinstance(values, dict):
                raise TypeError(f"section {section!r} must be a mapping")
            for key, val in values.items():
                if key not in cfg[section]:
                    raise KeyError(f"unknown key {section}.{key}")
                cfg[section][key] = val
    return cfg


def build_potential(cfg: dict) -> PotentialSpec:
    pot = cfg["potential"]
    family = pot["family"]
    dim = int(pot["dim"])
    if family == "pure_hardy":
        return make_pure_hardy(float(pot["lambda1"]), dim)
    if family == "two_scale":
        lam2 = pot["lambda2"]
        if lam2 is None:
            raise KeyError("two_scale potential needs potential.lambda2")
        return make_two_scale(float(pot["lambda1"]), float(lam2), dim,
                              critical=pot["criticality"] == "critical")
    if family == "table":
        if not pot["path"]:
            raise KeyError("table potential needs potential.path")
        data = np.loadtxt(pot["path"], delimiter=",", comments="#")
        return make_table(data[:, 0], data[:, 1], dim)
    raise KeyError(f"unknown potential family {family!r}")


def build_experiment(cfg: dict, grid_scale: float = 1.0,
                     tol: float = None) -> ExperimentConfig:
    lz, tm, sv, dt = cfg["lorentz"], cfg["times"], cfg["solver"], cfg["data"]
    return ExperimentConfig(
        potential=build_potential(cfg),
        p=_as_index(lz["p"]), q=_as_index(lz["q"]),
        sigma=_as_index(lz["sigma"]), theta=_as_index(lz["theta"]),
        ell=int(lz["ell"]), j=int(lz["j"]),
        mode=int(cfg["modes"]["k"][0]),
        data=dt["family"], data_center=float(dt["center"]),
        t_start=float(tm["start"]), t_end=float(tm["end"]),
        n_times=int(tm["count"]),
        fit_window=tuple(float(x) for x in tm["fit_window"]),
        nodes_per_decade=max(4, int(round(sv["nodes_per_decade"] * grid_scale))),
        r_min=float(sv["r_min"]),
        local_tol=float(sv["local_tol"]),
        profile_tol=float(tol if tol is not None else sv["profile_tol"]),
    )


def write_manifest(path, cfg: dict, extra: dict = None):
    """Structured text file recording every resolved parameter."""
    from . import __version__

    lines = [f"tool_version = {__version__}",
             f"python = {platform.python_version()}",
             f"numpy = {np.__version__}"]
    for section in sorted(cfg):
        for key in sorted(cfg[section]):
            lines.append(f"{section}.{key} = {cfg[section][key]}")
    for key in sorted(extra or {}):
        lines.append(f"run.{key} = {extra[key]}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
