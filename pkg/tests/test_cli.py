"""CLI config validation, mode runners, manifests, determinism, exit codes."""

import json
import os

import numpy as np
import pytest

from mkdv.cli import ConfigError, parse_config, run, main
from mkdv.grid import make_grid, read_snapshot, airy_propagate, write_snapshot
from mkdv.evolve import initial_data


def _write(tmp_path, name, cfg):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def test_parse_config_missing_mode():
    with pytest.raises(ConfigError, match="mode missing"):
        parse_config("{}")


def test_parse_config_malformed():
    with pytest.raises(ConfigError, match="malformed"):
        parse_config("{not json")


def test_parse_config_minimal_painleve():
    cfg = parse_config(json.dumps({"mode": "painleve", "W": 0.1, "sigma": 1}))
    assert cfg["mode"] == "painleve"


def test_parse_config_rejects_bad_sigma():
    with pytest.raises(ConfigError, match="sigma"):
        parse_config(json.dumps({"mode": "painleve", "W": 0.1, "sigma": 2}))


def test_parse_config_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="unknown key frobnicate"):
        parse_config(json.dumps({"mode": "painleve", "W": 0.1, "sigma": 1,
                                 "frobnicate": True}))
    with pytest.raises(ConfigError, match="grid.spacing"):
        parse_config(json.dumps({"mode": "evolve", "sigma": 1, "t0": 0.0, "t1": 1.0,
                                 "dt": 0.1, "grid": {"L": 10.0, "n": 64,
                                                     "spacing": 0.1},
                                 "initial": {"kind": "gaussian", "amplitude": 0.1}}))


def test_parse_config_field_paths_in_errors():
    with pytest.raises(ConfigError, match="probe_times.count"):
        parse_config(json.dumps({
            "mode": "probe", "sigma": 1, "t0": 1.0, "t1": 10.0, "dt": 0.1,
            "grid": {"L": 100.0, "n": 256},
            "initial": {"kind": "gaussian", "amplitude": 0.1},
            "velocities": [0.25],
            "probe_times": {"start": 2.0, "stop": 8.0, "count": 1}}))


def test_painleve_mode_outputs(tmp_path):
    cfg = {"mode": "painleve", "W": 0.1, "sigma": 1, "y_min": -8.0, "y_max": 4.0,
           "dy": 5e-3}
    rc = run(parse_config(json.dumps(cfg)), str(tmp_path / "out"))
    assert rc == 0
    out = tmp_path / "out"
    assert (out / "painleve_solution.csv").exists()
    rep = json.loads((out / "match.json").read_text())
    assert rep["sigma"] == 1 and rep["q_expected"] > 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest["files"]) == {"painleve_solution.csv", "match.json"}


def test_evolve_mode_and_manifest_determinism(tmp_path):
    cfg = {"mode": "evolve", "sigma": 1, "t0": 0.0, "t1": 1.0, "dt": 0.05,
           "grid": {"L": 30.0, "n": 256},
           "initial": {"kind": "gaussian", "amplitude": 0.3, "width": 1.0},
           "snapshot_times": [0.5, 1.0]}
    parsed = parse_config(json.dumps(cfg))
    run(parsed, str(tmp_path / "a"))
    run(parsed, str(tmp_path / "b"))
    ma = json.loads((tmp_path / "a" / "manifest.json").read_text())
    mb = json.loads((tmp_path / "b" / "manifest.json").read_text())
    assert ma == mb  # byte-identical outputs for identical configs
    names = set(ma["files"])
    assert "trace.csv" in names and "snapshot_t0.5.field" in names \
        and "snapshot_t1.field" in names
    f, t, sigma = read_snapshot(tmp_path / "a" / "snapshot_t1.field")
    assert t == 1.0 and sigma == 1 and f.grid.n == 256


def test_emit_plot_data_flag(tmp_path):
    cfg = {"mode": "evolve", "sigma": 1, "t0": 0.0, "t1": 0.5, "dt": 0.05,
           "grid": {"L": 30.0, "n": 256},
           "initial": {"kind": "gaussian", "amplitude": 0.3}}
    run(parse_config(json.dumps(cfg)), str(tmp_path / "out"), plot_data=True)
    text = (tmp_path / "out" / "plotdata_amplitude.csv").read_text()
    assert text.splitlines()[0] == "t,linf,linf_t13"


def test_linear_and_profile_modes(tmp_path):
    lin_cfg = {"mode": "linear", "grid": {"L": 20000.0, "n": 2 ** 17},
               "initial": {"kind": "gaussian", "amplitude": 0.2, "width": 1.0},
               "times": [100.0, 400.0, 1600.0, 4000.0]}
    run(parse_config(json.dumps(lin_cfg)), str(tmp_path / "lin"))
    snaps = [str(tmp_path / "lin" / f"snapshot_t{t:g}.field")
             for t in (100, 400, 1600, 4000)]
    prof_cfg = {"mode": "profile", "snapshots": snaps, "sigma": 1,
                "xi_min": 0.5, "xi_max": 1.5, "n_xi": 11}
    run(parse_config(json.dumps(prof_cfg)), str(tmp_path / "prof"))
    lines = (tmp_path / "prof" / "profile.csv").read_text().splitlines()
    assert lines[0] == "xi,re_W,im_W,abs_W,slope_consistency,fit_residual"
    xi, re_w = [float(lines[1].split(",")[i]) for i in (0, 1)]
    assert re_w == pytest.approx(0.2 * np.sqrt(np.pi) * np.exp(-xi ** 2 / 4), rel=1e-4)


def test_probe_mode(tmp_path):
    cfg = {"mode": "probe", "sigma": 1, "t0": 1.0, "t1": 120.0, "dt": 0.05,
           "grid": {"L": 400.0, "n": 4096},
           "initial": {"kind": "gaussian", "amplitude": 0.2, "width": 1.0},
           "velocities": [0.36], "probe_times": {"start": 40.0, "stop": 120.0,
                                                 "count": 8}}
    run(parse_config(json.dumps(cfg)), str(tmp_path / "out"))
    lines = (tmp_path / "out" / "gamma_v0.36.csv").read_text().splitlines()
    assert lines[0] == "t,re_gamma,im_gamma,abs_gamma,arg_unwrapped,residual_abs"
    assert len(lines) == 9


def test_selfsimilar_mode(tmp_path):
    g = make_grid(8000.0, 2 ** 15)
    f0, _ = initial_data("gaussian", g, amplitude=0.2, width=1.0)
    paths = []
    for t in (500.0, 1000.0):
        p = tmp_path / f"s{t:g}.field"
        write_snapshot(p, airy_propagate(f0, t), t, 0)
        paths.append(str(p))
    cfg = {"mode": "selfsimilar", "snapshots": paths, "sigma": 1}
    run(parse_config(json.dumps(cfg)), str(tmp_path / "out"))
    rep = json.loads((tmp_path / "out" / "selfsimilar.json").read_text())
    assert len(rep["cauchy"]) == 1


def test_appdata_and_complete_modes(tmp_path):
    base = {"z_grid": {"L": 16.0, "n": 512},
            "W": {"kind": "gaussian", "amplitude": 0.1, "width": 1.0},
            "sigma": 1, "table": {"w_max": 0.15, "dw": 0.015}}
    app_cfg = dict(base, mode="appdata", t=100.0, x_grid={"L": 1500.0, "n": 2 ** 13})
    run(parse_config(json.dumps(app_cfg)), str(tmp_path / "app"))
    f, t, sigma = read_snapshot(tmp_path / "app" / "u_app_t100.field")
    assert t == 100.0 and np.max(np.abs(f.values)) > 0
    comp_cfg = dict(base, mode="complete", T0=50.0, horizon_factor=1.5,
                    x_grid={"L": 1500.0, "n": 2 ** 13}, dt=0.2, n_samples=4)
    run(parse_config(json.dumps(comp_cfg)), str(tmp_path / "comp"))
    rep = json.loads((tmp_path / "comp" / "complete_report.json").read_text())
    assert rep["T0"] == 50.0 and len(rep["e_samples"]) == 3
    assert rep["e_samples"][-1]["e_l2"] < 0.2 * rep["e_samples"][-1]["model_l2"]


def test_sweep_mode(tmp_path):
    cfg = {"mode": "sweep", "configs": [
        {"mode": "painleve", "W": 0.1, "sigma": 1, "y_min": -8.0, "y_max": 4.0,
         "dy": 5e-3},
        {"mode": "painleve", "W": 0.2, "sigma": 1, "y_min": -8.0, "y_max": 4.0,
         "dy": 5e-3}]}
    run(parse_config(json.dumps(cfg)), str(tmp_path / "out"), workers=2)
    idx = json.loads((tmp_path / "out" / "sweep_index.json").read_text())
    assert idx["runs"] == ["run_0000", "run_0001"]
    for sub in idx["runs"]:
        assert (tmp_path / "out" / sub / "match.json").exists()


def test_main_exit_codes(tmp_path):
    bad = _write(tmp_path, "bad.json", {"mode": "painleve", "W": 0.1, "sigma": 2})
    assert main(["painleve", "--config", bad, "--out", str(tmp_path / "o1")]) == 2
    assert main(["painleve", "--config", str(tmp_path / "missing.json")]) == 4
    ok = _write(tmp_path, "ok.json", {"mode": "painleve", "W": 0.1, "sigma": 1,
                                      "y_min": -8.0, "y_max": 4.0, "dy": 5e-3})
    assert main(["painleve", "--config", ok, "--out", str(tmp_path / "o2")]) == 0
    assert main(["evolve", "--config", ok, "--out", str(tmp_path / "o3")]) == 2
    diverge = _write(tmp_path, "div.json", {
        "mode": "evolve", "sigma": -1, "t0": 0.0, "t1": 50.0, "dt": 2.0,
        "grid": {"L": 10.0, "n": 256},
        "initial": {"kind": "gaussian", "amplitude": 3.0, "width": 0.5}})
    assert main(["evolve", "--config", diverge, "--out", str(tmp_path / "o4")]) == 3


def test_main_workers_env(tmp_path, monkeypatch):
    ok = _write(tmp_path, "ok.json", {"mode": "painleve", "W": 0.05, "sigma": 1,
                                      "y_min": -8.0, "y_max": 3.5, "dy": 1e-2})
    monkeypatch.setenv("MKDV_WORKERS", "2")
    assert main(["painleve", "--config", ok, "--out", str(tmp_path / "o")]) == 0
