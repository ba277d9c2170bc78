import math
import pathlib

import pytest

import fsilab

ROOT = pathlib.Path(__file__).resolve().parents[2]

SMALL = """
[geometry]
nx = 5
ny = 5
nz = 4

[physics]
nu = 1
mu = 0.3

[numerics]
dt = 0.01
t_end = 0.1
"""


def test_parse_and_hash():
    a = fsilab.parse_config(SMALL)
    b = fsilab.parse_config(SMALL)
    assert a.hash() == b.hash()
    assert a.nu == 1.0
    assert a.mu == pytest.approx(0.3)
    a.t_end = 0.2
    assert a.hash() != b.hash()


def test_config_error_names_field():
    with pytest.raises(fsilab.ConfigError, match="physics.nu"):
        fsilab.parse_config("[physics]\nmu = 0.3\n")


def test_rest_state():
    out = fsilab.simulate(fsilab.parse_config(SMALL))
    cols = out["columns"]
    assert len(cols["t"]) == 11
    assert max(abs(e) for e in cols["E_total"]) == 0.0
    assert out["summary"]["kind"] == "simulate"
    assert out["audits_passed"]


def test_free_decay(tmp_path):
    cfg = fsilab.load_config(str(ROOT / "configs" / "decay.ini"))
    cfg.t_end = 0.2
    res = fsilab.write_simulation(cfg, tmp_path)
    assert res["exit_code"] == 0
    assert (tmp_path / "diagnostics.csv").exists()
    summary = res["report"]
    assert summary["E_final"] < summary["E0"]
    assert summary["decay"]["rate"] > 0.0


def test_unknown_suite_is_config_error(tmp_path):
    res = fsilab.verify(fsilab.parse_config(SMALL), "nonsense", tmp_path)
    assert res["exit_code"] == 2
    assert "stokes" in fsilab.suite_names()


def test_stationary_probe(tmp_path):
    res = fsilab.probe(fsilab.parse_config(SMALL), "stationary", tmp_path)
    assert res["exit_code"] == 0
    assert res["report"]["max_abs_w"] == 0.0


def test_decay_fit():
    t = [0.1 * k for k in range(40)]
    y = [2.0 * math.exp(-1.5 * s) + 0.25 for s in t]
    fit = fsilab.decay_fit(t, y, True)
    assert fit["rate"] == pytest.approx(1.5, rel=1e-6)
    assert fit["offset"] == pytest.approx(0.25, rel=1e-6)
