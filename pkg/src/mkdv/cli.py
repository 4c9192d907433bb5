"""Command-line entry points: config parsing, experiment orchestration, persistence.

Every run is reproducible from its JSON config alone; outputs are deterministic for a
fixed config and platform, and a manifest listing every written file with its sha256
digest is placed next to the outputs.

    mkdv <mode> --config cfg.json [--out DIR] [--emit-plot-data] [--workers N]

Exit codes: 0 success, 2 config error, 3 numerical divergence, 4 I/O failure.
"""

import argparse
import hashlib
import json
import os
import sys
from multiprocessing import Pool

import numpy as np

from .grid import Field, make_grid, airy_propagate, write_snapshot, read_snapshot
from .evolve import (EvolveConfig, SolverState, DivergenceError, PowerLawPerturbation,
                     evolve as run_evolution, initial_data, write_trace_csv)
from .painleve import (PainleveDivergence, solve_painleve, right_match,
                       write_solution_csv)
from .wavepacket import GammaProbe
from .asymptotics import extract_profile, selfsimilar_trace
from .completeness import prescribed_data, build_q_table, u_app, match_experiment

FORMAT_VERSION = 1
MODES = ("evolve", "linear", "probe", "profile", "painleve", "selfsimilar",
         "appdata", "complete", "sweep")


class ConfigError(Exception):
    pass


def _require(cfg, path, key, types, check=None, default=None, required=True):
    here = f"{path}.{key}" if path else key
    if key not in cfg:
        if required:
            raise ConfigError(f"{here} missing")
        return default
    val = cfg[key]
    if types is float and isinstance(val, int):
        val = float(val)
    if not isinstance(val, types if isinstance(types, tuple) else (types,)):
        raise ConfigError(f"{here}: expected {types}, got {type(val).__name__}")
    if check is not None and not check(val):
        raise ConfigError(f"{here}: invalid value {val!r}")
    return val


def _reject_unknown(cfg, path, allowed):
    for key in cfg:
        if key not in allowed:
            here = f"{path}.{key}" if path else key
            raise ConfigError(f"unknown key {here}")


def _parse_grid(cfg, path):
    _reject_unknown(cfg, path, {"L", "n"})
    L = _require(cfg, path, "L", float, lambda v: v > 0)
    n = _require(cfg, path, "n", int, lambda v: v >= 16 and (v & (v - 1)) == 0)
    return make_grid(L, n)


def _parse_initial(cfg, path):
    _reject_unknown(cfg, path, {"kind", "amplitude", "width", "center"})
    kind = _require(cfg, path, "kind", str,
                    lambda v: v in ("gaussian", "sech", "soliton"))
    return {"kind": kind,
            "amplitude": _require(cfg, path, "amplitude", float, required=False,
                                  default=0.0),
            "width": _require(cfg, path, "width", float, lambda v: v > 0,
                              required=False, default=1.0),
            "center": _require(cfg, path, "center", float, required=False,
                               default=0.0)}


def _parse_sigma(cfg, path=""):
    return _require(cfg, path, "sigma", int, lambda v: v in (1, -1))


def _parse_w_data(cfg, path, zgrid):
    _reject_unknown(cfg, path, {"kind", "amplitude", "width", "values"})
    kind = _require(cfg, path, "kind", str, lambda v: v in ("gaussian", "samples"))
    if kind == "gaussian":
        a = _require(cfg, path, "amplitude", float)
        w = _require(cfg, path, "width", float, lambda v: v > 0, required=False,
                     default=1.0)
        samples = a * np.exp(-(zgrid.x / w) ** 2)
    else:
        vals = _require(cfg, path, "values", list)
        if len(vals) != zgrid.n:
            raise ConfigError(f"{path}.values: need exactly {zgrid.n} samples")
        samples = np.asarray(vals, dtype=float)
    return samples


_COMMON_KEYS = {"version", "mode", "seed"}


def parse_config(text):
    """Parse and validate a JSON config; returns the validated dict."""
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    mode = _require(cfg, "", "mode", str, lambda v: v in MODES)
    _require(cfg, "", "version", int, lambda v: v == FORMAT_VERSION,
             required=False, default=FORMAT_VERSION)
    checker = _VALIDATORS[mode]
    checker(cfg)
    return cfg


def _validate_evolve(cfg, extra=()):
    allowed = _COMMON_KEYS | {"grid", "sigma", "t0", "t1", "dt", "dt_policy",
                              "initial", "snapshot_times", "callback_stride",
                              "perturbation", "sponge_strength"} | set(extra)
    _reject_unknown(cfg, "", allowed)
    _parse_grid(_require(cfg, "", "grid", dict), "grid")
    _parse_sigma(cfg)
    t0 = _require(cfg, "", "t0", float, lambda v: v >= 0)
    _require(cfg, "", "t1", float, lambda v: v > t0)
    _require(cfg, "", "dt", float, lambda v: v > 0)
    _require(cfg, "", "dt_policy", str, lambda v: v in ("fixed", "nonlinear-cfl"),
             required=False, default="fixed")
    _parse_initial(_require(cfg, "", "initial", dict), "initial")
    _require(cfg, "", "snapshot_times", list, required=False, default=[])
    _require(cfg, "", "callback_stride", int, lambda v: v > 0, required=False,
             default=100)
    pert = _require(cfg, "", "perturbation", dict, required=False)
    if pert is not None:
        _reject_unknown(pert, "perturbation", {"p", "c"})
        _require(pert, "perturbation", "p", float, lambda v: v > 3)
        _require(pert, "perturbation", "c", float)
    _require(cfg, "", "sponge_strength", float, lambda v: v >= 0, required=False,
             default=0.0)


def _validate_linear(cfg):
    allowed = _COMMON_KEYS | {"grid", "initial", "times"}
    _reject_unknown(cfg, "", allowed)
    _parse_grid(_require(cfg, "", "grid", dict), "grid")
    _parse_initial(_require(cfg, "", "initial", dict), "initial")
    times = _require(cfg, "", "times", list, lambda v: len(v) >= 1)
    if any(not isinstance(t, (int, float)) or t < 0 for t in times):
        raise ConfigError("times: entries must be nonnegative numbers")


def _validate_probe(cfg):
    _validate_evolve(cfg, extra=("velocities", "probe_times", "gate"))
    vels = _require(cfg, "", "velocities", list, lambda v: len(v) >= 1)
    if any(not isinstance(v, (int, float)) or v <= 0 for v in vels):
        raise ConfigError("velocities: entries must be positive numbers")
    pt = _require(cfg, "", "probe_times", dict)
    _reject_unknown(pt, "probe_times", {"start", "stop", "count"})
    start = _require(pt, "probe_times", "start", float, lambda v: v > 0)
    _require(pt, "probe_times", "stop", float, lambda v: v > start)
    _require(pt, "probe_times", "count", int, lambda v: v >= 3)
    _require(cfg, "", "gate", float, lambda v: v > 0, required=False, default=4.0)


def _validate_profile(cfg):
    allowed = _COMMON_KEYS | {"snapshots", "sigma", "xi_min", "xi_max", "n_xi", "gate"}
    _reject_unknown(cfg, "", allowed)
    _require(cfg, "", "snapshots", list, lambda v: len(v) >= 3)
    _parse_sigma(cfg)
    xi_min = _require(cfg, "", "xi_min", float, lambda v: v > 0)
    _require(cfg, "", "xi_max", float, lambda v: v > xi_min)
    _require(cfg, "", "n_xi", int, lambda v: v >= 2)
    _require(cfg, "", "gate", float, lambda v: v > 0, required=False, default=2.0)


def _validate_painleve(cfg):
    allowed = _COMMON_KEYS | {"W", "sigma", "y_min", "y_max", "dy", "refine"}
    _reject_unknown(cfg, "", allowed)
    _require(cfg, "", "W", float)
    _parse_sigma(cfg)
    _require(cfg, "", "y_min", float, lambda v: v <= -8, required=False, default=-40.0)
    _require(cfg, "", "y_max", float, lambda v: v >= 3, required=False, default=6.0)
    _require(cfg, "", "dy", float, lambda v: 0 < v <= 0.01, required=False,
             default=1e-3)
    _require(cfg, "", "refine", bool, required=False, default=True)


def _validate_selfsimilar(cfg):
    allowed = _COMMON_KEYS | {"snapshots", "sigma", "y_half", "residual_half"}
    _reject_unknown(cfg, "", allowed)
    _require(cfg, "", "snapshots", list, lambda v: len(v) >= 2)
    _parse_sigma(cfg)
    _require(cfg, "", "y_half", float, lambda v: v > 0, required=False, default=4.0)
    _require(cfg, "", "residual_half", float, lambda v: v > 0, required=False,
             default=2.0)


def _validate_appdata(cfg):
    allowed = _COMMON_KEYS | {"z_grid", "W", "sigma", "t", "x_grid", "table"}
    _reject_unknown(cfg, "", allowed)
    zg = _parse_grid(_require(cfg, "", "z_grid", dict), "z_grid")
    _parse_w_data(_require(cfg, "", "W", dict), "W", zg)
    _parse_sigma(cfg)
    _require(cfg, "", "t", float, lambda v: v >= 1)
    _parse_grid(_require(cfg, "", "x_grid", dict), "x_grid")
    _validate_table(cfg.get("table", {}))


def _validate_table(tbl):
    _reject_unknown(tbl, "table", {"w_max", "dw", "y_min", "y_max", "dy"})
    _require(tbl, "table", "w_max", float, lambda v: v > 0, required=False,
             default=0.4)
    _require(tbl, "table", "dw", float, lambda v: v > 0, required=False,
             default=0.005)


def _validate_complete(cfg):
    allowed = _COMMON_KEYS | {"z_grid", "W", "sigma", "T0", "horizon_factor",
                              "x_grid", "dt", "n_samples", "table"}
    _reject_unknown(cfg, "", allowed)
    zg = _parse_grid(_require(cfg, "", "z_grid", dict), "z_grid")
    _parse_w_data(_require(cfg, "", "W", dict), "W", zg)
    _parse_sigma(cfg)
    _require(cfg, "", "T0", float, lambda v: v >= 50)
    _require(cfg, "", "horizon_factor", float, lambda v: v > 1)
    _parse_grid(_require(cfg, "", "x_grid", dict), "x_grid")
    _require(cfg, "", "dt", float, lambda v: v > 0, required=False, default=0.1)
    _require(cfg, "", "n_samples", int, lambda v: v >= 2, required=False, default=17)
    _validate_table(cfg.get("table", {}))


def _validate_sweep(cfg):
    allowed = _COMMON_KEYS | {"configs"}
    _reject_unknown(cfg, "", allowed)
    subs = _require(cfg, "", "configs", list, lambda v: len(v) >= 1)
    for i, sub in enumerate(subs):
        if not isinstance(sub, dict):
            raise ConfigError(f"configs[{i}]: expected object")
        mode = _require(sub, f"configs[{i}]", "mode", str,
                        lambda v: v in MODES and v != "sweep")
        _VALIDATORS[mode](sub)


_VALIDATORS = {"evolve": _validate_evolve, "linear": _validate_linear,
               "probe": _validate_probe, "profile": _validate_profile,
               "painleve": _validate_painleve, "selfsimilar": _validate_selfsimilar,
               "appdata": _validate_appdata, "complete": _validate_complete,
               "sweep": _validate_sweep}


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(outdir, cfg, files):
    manifest = {"version": FORMAT_VERSION,
                "config_sha256": hashlib.sha256(
                    json.dumps(cfg, sort_keys=True).encode()).hexdigest(),
                "files": {os.path.basename(f): _sha256(f) for f in sorted(files)}}
    path = os.path.join(outdir, "manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    return path


def _json_dump(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)


def _make_initial(grid, spec, sigma):
    f, size = initial_data(spec["kind"], grid, amplitude=spec["amplitude"],
                           width=spec["width"], center=spec["center"], sigma=sigma)
    return f, size


def _run_evolve(cfg, outdir, plot_data):
    g = _parse_grid(cfg["grid"], "grid")
    sigma = cfg["sigma"]
    init = _parse_initial(cfg["initial"], "initial")
    f0, h11 = _make_initial(g, init, sigma)
    pert = None
    if cfg.get("perturbation"):
        pert = PowerLawPerturbation(p=float(cfg["perturbation"]["p"]),
                                    c=float(cfg["perturbation"]["c"]))
    state = SolverState.initial(f0, float(cfg["t0"]), sigma, pert)
    evcfg = EvolveConfig(
        sigma=sigma, t0=float(cfg["t0"]), t1=float(cfg["t1"]), dt=float(cfg["dt"]),
        dt_policy=cfg.get("dt_policy", "fixed"),
        perturbation=pert, snapshot_times=tuple(cfg.get("snapshot_times", ())),
        callback_stride=int(cfg.get("callback_stride", 100)),
        sponge_strength=float(cfg.get("sponge_strength", 0.0)))
    final, trace = run_evolution(state, evcfg)
    files = []
    for tkey, fld in sorted(final.snapshots.items()):
        path = os.path.join(outdir, f"snapshot_t{tkey:g}.field")
        write_snapshot(path, fld, tkey, sigma)
        files.append(path)
    trace_path = os.path.join(outdir, "trace.csv")
    write_trace_csv(trace, trace_path)
    files.append(trace_path)
    meta = {"h11_size": h11, "steps": final.steps, "max_drift": final.max_drift}
    meta_path = os.path.join(outdir, "run_meta.json")
    _json_dump(meta, meta_path)
    files.append(meta_path)
    if plot_data:
        pd_path = os.path.join(outdir, "plotdata_amplitude.csv")
        with open(pd_path, "w") as fh:
            fh.write("t,linf,linf_t13\n")
            for row in trace:
                fh.write(f"{row['t']:.17g},{row['Linf']:.17g},"
                         f"{row['Linf'] * row['t'] ** (1 / 3):.17g}\n")
        files.append(pd_path)
    return files


def _run_linear(cfg, outdir, plot_data):
    g = _parse_grid(cfg["grid"], "grid")
    init = _parse_initial(cfg["initial"], "initial")
    f0, h11 = _make_initial(g, init, sigma=1)
    files = []
    rows = []
    for t in cfg["times"]:
        ft = airy_propagate(f0, float(t))
        path = os.path.join(outdir, f"snapshot_t{t:g}.field")
        write_snapshot(path, ft, t, 0)
        files.append(path)
        rows.append({"t": float(t), "Linf": float(np.max(np.abs(ft.values)))})
    meta_path = os.path.join(outdir, "run_meta.json")
    _json_dump({"h11_size": h11, "rows": rows}, meta_path)
    files.append(meta_path)
    if plot_data:
        pd_path = os.path.join(outdir, "plotdata_amplitude.csv")
        with open(pd_path, "w") as fh:
            fh.write("t,linf,linf_t13\n")
            for r in rows:
                if r["t"] > 0:
                    fh.write(f"{r['t']:.17g},{r['Linf']:.17g},"
                             f"{r['Linf'] * r['t'] ** (1 / 3):.17g}\n")
        files.append(pd_path)
    return files


def _run_probe(cfg, outdir, plot_data):
    g = _parse_grid(cfg["grid"], "grid")
    sigma = cfg["sigma"]
    init = _parse_initial(cfg["initial"], "initial")
    f0, _ = _make_initial(g, init, sigma)
    state = SolverState.initial(f0, float(cfg["t0"]), sigma)
    pt = cfg["probe_times"]
    times = np.geomspace(pt["start"], pt["stop"], pt["count"])
    probe = GammaProbe(cfg["velocities"], times, sigma,
                       gate=float(cfg.get("gate", 4.0)))
    evcfg = EvolveConfig(
        sigma=sigma, t0=float(cfg["t0"]), t1=float(cfg["t1"]), dt=float(cfg["dt"]),
        dt_policy=cfg.get("dt_policy", "fixed"),
        snapshot_times=tuple(cfg.get("snapshot_times", ())),
        callback_stride=int(cfg.get("callback_stride", 100)))
    final, trace = run_evolution(state, evcfg, observers=[probe.observer()])
    files = []
    for tr in probe.traces():
        path = os.path.join(outdir, f"gamma_v{tr.v:g}.csv")
        tr.write_csv(path)
        files.append(path)
    trace_path = os.path.join(outdir, "trace.csv")
    write_trace_csv(trace, trace_path)
    files.append(trace_path)
    return files


def _run_profile(cfg, outdir, plot_data):
    snaps = []
    for path in cfg["snapshots"]:
        f, t, _ = read_snapshot(path)
        snaps.append((t, f))
    xi_grid = np.linspace(cfg["xi_min"], cfg["xi_max"], cfg["n_xi"])
    prof = extract_profile(snaps, xi_grid, cfg["sigma"],
                           gate=float(cfg.get("gate", 2.0)))
    path = os.path.join(outdir, "profile.csv")
    with open(path, "w") as fh:
        fh.write("xi,re_W,im_W,abs_W,slope_consistency,fit_residual\n")
        for j in range(len(prof.xi)):
            fh.write(f"{prof.xi[j]:.17g},{prof.W[j].real:.17g},{prof.W[j].imag:.17g},"
                     f"{abs(prof.W[j]):.17g},{prof.slope_consistency[j]:.17g},"
                     f"{prof.fit_residual[j]:.17g}\n")
    meta = {"sigma": cfg["sigma"], "t_window": list(prof.t_window),
            "gate": float(cfg.get("gate", 2.0)),
            "W0": [prof.W0.real if np.iscomplexobj(prof.W0) else float(prof.W0), 0.0]}
    meta_path = os.path.join(outdir, "profile_meta.json")
    _json_dump(meta, meta_path)
    return [path, meta_path]


def _run_painleve(cfg, outdir, plot_data):
    sol = solve_painleve(float(cfg["W"]), cfg["sigma"],
                         y_min=float(cfg.get("y_min", -40.0)),
                         y_max=float(cfg.get("y_max", 6.0)),
                         dy=float(cfg.get("dy", 1e-3)),
                         refine=bool(cfg.get("refine", True)))
    sol_path = os.path.join(outdir, "painleve_solution.csv")
    write_solution_csv(sol, sol_path)
    rep = right_match(sol)
    rep_path = os.path.join(outdir, "match.json")
    _json_dump(rep, rep_path)
    files = [sol_path, rep_path]
    if plot_data:
        from .special import airy_ai
        pd_path = os.path.join(outdir, "plotdata_ratio.csv")
        with open(pd_path, "w") as fh:
            fh.write("y,ratio\n")
            m = (sol.y >= 3.0) & (sol.y <= min(6.0, sol.y[-1]))
            for yv, qv in zip(sol.y[m][::20], sol.Q[m][::20]):
                fh.write(f"{yv:.17g},{qv / airy_ai(yv):.17g}\n")
        files.append(pd_path)
    return files


def _run_selfsimilar(cfg, outdir, plot_data):
    snaps = []
    sigma = cfg["sigma"]
    for path in cfg["snapshots"]:
        f, t, _ = read_snapshot(path)
        snaps.append((t, f))
    rep = selfsimilar_trace(snaps, sigma, y_half=float(cfg.get("y_half", 4.0)),
                            residual_half=float(cfg.get("residual_half", 2.0)))
    path = os.path.join(outdir, "selfsimilar.csv")
    with open(path, "w") as fh:
        fh.write("t,residual_sup\n")
        for t, r in rep["residual_sup"]:
            fh.write(f"{t:.17g},{r:.17g}\n")
    meta = {"cauchy": [[t, d] for t, d in rep["cauchy"]], "sigma": sigma}
    meta_path = os.path.join(outdir, "selfsimilar.json")
    _json_dump(meta, meta_path)
    return [path, meta_path]


def _build_table(cfg, sigma):
    tbl = cfg.get("table", {})
    return build_q_table(sigma, w_max=float(tbl.get("w_max", 0.4)),
                         dw=float(tbl.get("dw", 0.005)))


def _run_appdata(cfg, outdir, plot_data):
    zg = _parse_grid(cfg["z_grid"], "z_grid")
    samples = _parse_w_data(cfg["W"], "W", zg)
    pdata = prescribed_data(zg, samples)
    sigma = cfg["sigma"]
    qt = _build_table(cfg, sigma)
    xg = _parse_grid(cfg["x_grid"], "x_grid")
    t = float(cfg["t"])
    vals = u_app(t, xg.x, pdata, sigma, qt)
    path = os.path.join(outdir, f"u_app_t{t:g}.field")
    write_snapshot(path, Field(xg, vals), t, sigma)
    meta_path = os.path.join(outdir, "appdata_meta.json")
    _json_dump({"table_meta": qt.meta(), "y_norm": pdata.y_norm, "t": t}, meta_path)
    return [path, meta_path]


def _run_complete(cfg, outdir, plot_data):
    zg = _parse_grid(cfg["z_grid"], "z_grid")
    samples = _parse_w_data(cfg["W"], "W", zg)
    pdata = prescribed_data(zg, samples)
    sigma = cfg["sigma"]
    qt = _build_table(cfg, sigma)
    xg = _parse_grid(cfg["x_grid"], "x_grid")
    rep = match_experiment(pdata, sigma, float(cfg["T0"]),
                           float(cfg["horizon_factor"]), xg, qt,
                           dt=float(cfg.get("dt", 0.1)),
                           n_samples=int(cfg.get("n_samples", 17)))
    rep_path = os.path.join(outdir, "complete_report.json")
    _json_dump(rep, rep_path)
    return [rep_path]


def _sweep_worker(args):
    sub_cfg, sub_dir, plot_data = args
    os.makedirs(sub_dir, exist_ok=True)
    files = _RUNNERS[sub_cfg["mode"]](sub_cfg, sub_dir, plot_data)
    _write_manifest(sub_dir, sub_cfg, files)
    return sub_dir


def _run_sweep(cfg, outdir, plot_data, workers=1):
    jobs = []
    for i, sub in enumerate(cfg["configs"]):
        jobs.append((sub, os.path.join(outdir, f"run_{i:04d}"), plot_data))
    if workers > 1:
        with Pool(workers) as pool:
            dirs = pool.map(_sweep_worker, jobs)
    else:
        dirs = [_sweep_worker(j) for j in jobs]
    index_path = os.path.join(outdir, "sweep_index.json")
    _json_dump({"runs": [os.path.basename(d) for d in dirs]}, index_path)
    return [index_path]


_RUNNERS = {"evolve": _run_evolve, "linear": _run_linear, "probe": _run_probe,
            "profile": _run_profile, "painleve": _run_painleve,
            "selfsimilar": _run_selfsimilar, "appdata": _run_appdata,
            "complete": _run_complete}


def run(cfg, outdir, plot_data=False, workers=1):
    """Execute a validated config; writes outputs and the manifest into outdir."""
    os.makedirs(outdir, exist_ok=True)
    mode = cfg["mode"]
    if mode == "sweep":
        files = _run_sweep(cfg, outdir, plot_data, workers)
    else:
        files = _RUNNERS[mode](cfg, outdir, plot_data)
    _write_manifest(outdir, cfg, files)
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(prog="mkdv",
                                     description="mKdV simulation and diagnostics")
    parser.add_argument("mode", choices=MODES)
    parser.add_argument("--config", required=True)
    parser.add_argument("--out", default="out")
    parser.add_argument("--emit-plot-data", action="store_true")
    parser.add_argument("--workers", type=int,
                        default=int(os.environ.get("MKDV_WORKERS", "1")))
    args = parser.parse_args(argv)
    try:
        with open(args.config) as fh:
            text = fh.read()
    except OSError as exc:
        print(f"mkdv: cannot read config: {exc}", file=sys.stderr)
        return 4
    try:
        cfg = parse_config(text)
        if cfg["mode"] != args.mode:
            raise ConfigError(f"mode mismatch: CLI says {args.mode}, "
                              f"config says {cfg['mode']}")
        return run(cfg, args.out, plot_data=args.emit_plot_data, workers=args.workers)
    except ConfigError as exc:
        print(f"mkdv: config error: {exc}", file=sys.stderr)
        return 2
    except (DivergenceError, PainleveDivergence) as exc:
        print(f"mkdv: numerical divergence: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"mkdv: I/O failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
