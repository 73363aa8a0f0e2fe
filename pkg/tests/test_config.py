"""Config parsing, potential builders, and manifests."""

import math

import numpy as np
import pytest

from hardyheat.config import (DEFAULTS, _as_index, build_experiment,
                              build_potential, load_config, write_manifest)


def test_defaults_without_file():
    cfg = load_config(None)
    assert cfg == DEFAULTS
    assert cfg is not DEFAULTS  # deep enough copy for per-run mutation


def test_load_config_merges_over_defaults(tmp_path):
    p = tmp_path / "cfg.yaml"
    p.write_text("potential:\n  family: two_scale\n  lambda1: 3.0\n"
                 "  lambda2: -0.1875\ntimes:\n  end: 100.0\n")
    cfg = load_config(p)
    assert cfg["potential"]["family"] == "two_scale"
    assert cfg["potential"]["lambda2"] == -0.1875
    assert cfg["times"]["end"] == 100.0
    assert cfg["times"]["start"] == DEFAULTS["times"]["start"]


def test_load_config_rejects_unknown_keys(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("potentail:\n  family: pure_hardy\n")
    with pytest.raises(KeyError):
        load_config(p)
    p.write_text("potential:\n  lambda3: 1.0\n")
    with pytest.raises(KeyError):
        load_config(p)


def test_as_index_handles_infinity():
    assert _as_index("inf") == math.inf
    assert _as_index("Infinity") == math.inf
    assert _as_index(2) == 2.0
    assert _as_index("1.5") == 1.5


def test_build_potential_families(tmp_path):
    cfg = load_config(None)
    assert build_potential(cfg).name.startswith("pure_hardy")

    cfg["potential"].update(family="two_scale", lambda1=3.0, lambda2=-0.1875)
    spec = build_potential(cfg)
    assert spec.lambda1 == 3.0 and spec.lambda2 == -0.1875

    cfg["potential"].update(family="two_scale", lambda2=None)
    with pytest.raises(KeyError):
        build_potential(cfg)

    r = np.geomspace(1e-3, 1e3, 200)
    path = tmp_path / "table.csv"
    np.savetxt(path, np.column_stack([r, 3.0 / r**2]), delimiter=",")
    cfg["potential"].update(family="table", path=str(path))
    table = build_potential(cfg)
    assert table(np.array([1.0]))[0] == pytest.approx(3.0, rel=1e-6)
    assert table.lambda1 == pytest.approx(3.0)
    assert table.lambda2 == pytest.approx(3.0)


def test_build_experiment_mapping():
    cfg = load_config(None)
    cfg["lorentz"].update(p=2.0, q="inf", sigma=2.0, theta="inf")
    cfg["times"].update(start=1.0, end=100.0, count=9)
    exp = build_experiment(cfg, grid_scale=0.5)
    assert exp.p == 2.0 and exp.q == math.inf
    assert exp.t_start == 1.0 and exp.n_times == 9
    assert exp.nodes_per_decade == 24  # default 48 scaled by 0.5
    exp2 = build_experiment(cfg, tol=1e-8)
    assert exp2.profile_tol == 1e-8


def test_write_manifest_records_everything(tmp_path):
    cfg = load_config(None)
    path = tmp_path / "manifest.txt"
    write_manifest(path, cfg, {"subcommand": "test", "alpha": 1.5})
    text = path.read_text()
    assert "tool_version" in text
    assert "solver.nodes_per_decade = 48" in text
    assert "run.alpha = 1.5" in text
