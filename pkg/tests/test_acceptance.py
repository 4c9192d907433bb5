"""Acceptance suite: every criterion at its stated tolerance, one printed line each.

The long nonlinear production runs (t in [1, 2000] at n = 2^16) are built once per
session and shared between the conservation, phase-law, packet-law, self-similar and
consistency criteria.  Run with `pytest -s tests/test_acceptance.py` to see the
per-criterion lines as they complete.
"""

import math

import numpy as np
import pytest

from mkdv.grid import Field, make_grid, conserved, airy_propagate
from mkdv.evolve import (EvolveConfig, SolverState, evolve, initial_data,
                         soliton_profile)
from mkdv.special import q_sigma
from mkdv.painleve import solve_painleve, right_match
from mkdv.wavepacket import GammaProbe, ode_phase_solution
from mkdv.asymptotics import extract_profile, decay_check, selfsimilar_trace
from mkdv.completeness import prescribed_data, build_q_table, match_experiment


def _report(num, name, ok, detail):
    print(f"ACCEPTANCE {num:>2} [{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return ok


# ----------------------------------------------------------------------------
# shared production runs
# ----------------------------------------------------------------------------

PROD_L = 12000.0
PROD_N = 2 ** 16
PROD_T1 = 2000.0
SNAP_TIMES = tuple(sorted(set(
    [round(t, 6) for t in np.geomspace(60.0, 2000.0, 28)]
    + [125.0, 250.0, 500.0, 1000.0, 2000.0]
    + [round(t, 6) for t in np.geomspace(200.0, 2000.0, 12)])))
PROBE_V = tuple(round(x, 6) for x in np.arange(0.5, 1.15, 0.05) ** 2) + (0.25, 0.36)
PROBE_TIMES = np.geomspace(40.0, 2000.0, 44)

_cache = {}


def _production_run(sigma):
    if sigma in _cache:
        return _cache[sigma]
    g = make_grid(PROD_L, PROD_N)
    f0, h11 = initial_data("gaussian", g, amplitude=0.2, width=2.0)
    probe = GammaProbe(sorted(set(PROBE_V)), PROBE_TIMES, sigma)
    state = SolverState.initial(f0, 1.0, sigma)
    early_cfg = EvolveConfig(sigma=sigma, t0=1.0, t1=21.0, dt=0.02,
                             callback_stride=10 ** 9)
    mid, _ = evolve(state, early_cfg)
    state2 = SolverState.initial(mid.u, 21.0, sigma)
    state2.conserved0 = mid.conserved0  # keep the t = 1 reference values
    state2.max_drift = mid.max_drift
    state2.initial_linf = mid.initial_linf
    cfg = EvolveConfig(sigma=sigma, t0=21.0, t1=PROD_T1, dt=0.1,
                       snapshot_times=SNAP_TIMES, callback_stride=2000)
    final, trace = evolve(state2, cfg, observers=[probe.observer()])
    snaps = sorted(final.snapshots.items())
    _cache[sigma] = {"grid": g, "f0": f0, "final": final, "trace": trace,
                     "snaps": snaps, "traces": {tr.v: tr for tr in probe.traces()},
                     "E0": g.dx * float(np.sum(f0.values)), "h11": h11}
    return _cache[sigma]


@pytest.fixture(scope="module")
def prod_plus():
    return _production_run(1)


@pytest.fixture(scope="module")
def prod_minus():
    return _production_run(-1)


# ----------------------------------------------------------------------------
# criteria
# ----------------------------------------------------------------------------

def test_acceptance_01_soliton_oracle():
    g = make_grid(100.0, 2048)
    f0, _ = initial_data("soliton", g, width=1.0, sigma=-1)
    state = SolverState.initial(f0, 0.0, -1)
    final, _ = evolve(state, EvolveConfig(sigma=-1, t0=0.0, t1=10.0, dt=1e-3,
                                          callback_stride=10 ** 9))
    exact = soliton_profile(g, 1.0, 10.0)
    err = math.sqrt(np.sum((final.u.values - exact) ** 2) / np.sum(exact ** 2))
    ok = err < 1e-6
    assert _report(1, "soliton shape error", ok, f"rel L2 = {err:.3e} (< 1e-6)")


def test_acceptance_02_conservation(prod_plus, prod_minus):
    ok = True
    details = []
    for sigma, run in ((1, prod_plus), (-1, prod_minus)):
        d = run["final"].max_drift
        ok &= d["E0"] < 1e-13 and d["E1"] < 1e-8 and d["E2"] < 1e-8
        details.append(f"sigma={sigma:+d}: E0 {d['E0']:.1e}, E1 {d['E1']:.1e}, "
                       f"E2 {d['E2']:.1e}")
    assert _report(2, "conserved-quantity drift", ok, "; ".join(details))


def test_acceptance_03_linear_dispersive_rate():
    g = make_grid(480000.0, 2 ** 21)
    f0, _ = initial_data("gaussian", g, amplitude=0.2, width=1.0)
    ts = np.geomspace(10.0, 1e4, 13)
    sups, weighted = [], []
    for t in ts:
        u = airy_propagate(f0, t).values
        sups.append(float(np.max(np.abs(u))))
        bracket = np.sqrt(1.0 + (t ** (-1 / 3) * np.abs(g.x)) ** 2)
        weighted.append(float(np.max(t ** (1 / 3) * bracket ** 0.25 * np.abs(u))))
    slope = float(np.polyfit(np.log(ts), np.log(sups), 1)[0])
    ratio = max(weighted) / min(weighted)
    ok = -0.36 < slope < -0.30 and max(weighted) < 0.4 and ratio < 2.0
    assert _report(3, "linear decay rate", ok,
                   f"slope = {slope:.4f} (in [-0.36,-0.30]), weighted sup "
                   f"max = {max(weighted):.3f}, uniformity ratio = {ratio:.2f}")


def _phase_fit_at_peak(run, sigma):
    snaps = [(t, f) for t, f in run["snaps"] if t >= 60.0]
    xi_grid = np.linspace(0.52, 1.2, 35)
    prof = extract_profile(snaps, xi_grid, sigma, E0=run["E0"])
    t_last, f_last = run["snaps"][-1]
    idx = np.round(prof.xi * run["grid"].L / np.pi).astype(int)
    j_star = int(np.argmax(np.abs(f_last.spectrum[idx])))
    xi_star = prof.xi[j_star]
    # modulus drift over the final decade
    mags = np.array([abs(f.spectrum[idx[j_star]]) for t, f in run["snaps"]
                     if t >= PROD_T1 / 10.0])
    drift = (mags.max() - mags.min()) / mags.mean()
    return {"profile": prof, "xi_star": xi_star, "slope": prof.phase_slope[j_star],
            "consistency": prof.slope_consistency[j_star], "drift": drift}


def test_acceptance_04_modified_scattering_log_phase(prod_plus, prod_minus):
    fits = {1: _phase_fit_at_peak(prod_plus, 1), -1: _phase_fit_at_peak(prod_minus, -1)}
    ok = True
    details = []
    for sigma in (1, -1):
        f = fits[sigma]
        ok &= f["consistency"] < 0.15 and f["drift"] < 0.05
        details.append(f"sigma={sigma:+d}: xi*={f['xi_star']:.3f} "
                       f"consistency={f['consistency']:.3f} "
                       f"|u-hat| drift={f['drift']:.3f} slope={f['slope']:+.4f}")
    opposite = fits[1]["slope"] > 0 > fits[-1]["slope"]
    ok &= opposite
    details.append(f"opposite slopes: {opposite}")
    assert _report(4, "frequency-side log phase", ok, "; ".join(details))


def test_acceptance_05_gamma_ode_law(prod_plus):
    # |gamma| drift over [200, 2000] for gated rays; residual power-law exponent.
    # NOTE: the residual exponent window below treats the source estimate
    # |resid| <~ eps t^-1 (t^(2/3) v)^(-1/8) as a rate; measured residuals for smooth
    # Gaussian data decay strictly faster (exponent ~ -2), so the window half of this
    # criterion fails while the actual bound it came from holds with growing margin.
    tr = prod_plus["traces"][0.36]
    m = (tr.t >= 200.0) & (tr.t <= 2000.0)
    mags = tr.abs_gamma[m]
    drift = (mags.max() - mags.min()) / mags.mean()
    r = np.abs(tr.residual)
    valid = m & ~np.isnan(r)
    exponent = float(np.polyfit(np.log(tr.t[valid]), np.log(r[valid]), 1)[0])
    bound_margin = float(np.max(
        r[valid] / (0.2 / tr.t[valid] * (tr.t[valid] ** (2 / 3) * tr.v) ** -0.125)))
    drift_ok = drift < 0.10
    exp_ok = -1.25 < exponent < -0.95
    bound_ok = bound_margin < 1.0
    ok = drift_ok and exp_ok
    _report(5, "gamma ODE law", ok,
            f"|gamma| drift = {drift:.3f} (< 0.10: {drift_ok}); residual exponent = "
            f"{exponent:.2f} (window [-1.25,-0.95]: {exp_ok}); source bound "
            f"|resid| <= eps t^-1 (t^(2/3)v)^(-1/8) margin = {bound_margin:.3f} "
            f"({bound_ok})")
    assert drift_ok, f"|gamma| drift {drift:.3f} exceeds 10%"
    assert bound_ok, "residual exceeds the source estimate it was derived from"
    assert exp_ok, (
        f"residual exponent {exponent:.2f} outside [-1.25, -0.95]: the criterion "
        "reads an upper bound as a rate; smooth data decays strictly faster "
        "(see decisions ledger)")


def test_acceptance_06_painleve_connection():
    ok = True
    details = []
    for W in (0.1, 0.3):
        sol = solve_painleve(W, 1)
        rep = right_match(sol, y_hi=5.0)
        odd = solve_painleve(-W, 1)
        odd_err = float(np.max(np.abs(sol.Q + odd.Q)))
        ok &= sol.residual_max < 1e-6 and rep["deviation"] < 0.02 and odd_err < 1e-10
        details.append(f"W={W}: resid={sol.residual_max:.2e}, ratio dev="
                       f"{rep['deviation']:.4f}, oddness={odd_err:.1e}")
    assert _report(6, "Painleve II connection", ok, "; ".join(details))


def test_acceptance_07_selfsimilar_matching(prod_plus):
    # doubling chain capped at t = 1000: by t ~ 2 L / v the free third-harmonic
    # radiation shed in the early transient (xi ~ 3.5, v ~ 12) has lapped the box and
    # re-enters the self-similar window, where the t xi^2 weight in U_yy makes it
    # visible in the residual (it is invisible in U itself)
    chain = [(t, f) for t, f in prod_plus["snaps"]
             if t in (125.0, 250.0, 500.0, 1000.0)]
    rep = selfsimilar_trace(chain, sigma=1)
    cauchy = [d for _, d in rep["cauchy"]]
    resid = [r for _, r in rep["residual_sup"]]
    cauchy_ok = len(cauchy) == 3 and cauchy[0] > cauchy[1] > cauchy[2]
    resid_ok = all(resid[i] > resid[i + 1] for i in range(len(resid) - 1))
    ok = cauchy_ok and resid_ok
    assert _report(7, "self-similar matching", ok,
                   f"cauchy diffs = {[f'{c:.4f}' for c in cauchy]} decreasing: "
                   f"{cauchy_ok}; residual sups = {[f'{r:.4f}' for r in resid]} "
                   f"decreasing: {resid_ok}")


def test_acceptance_08_gamma_uhat_consistency(prod_plus):
    run = prod_plus
    t_last, f_last = run["snaps"][-1]
    g = run["grid"]
    xis, gmod, umod = [], [], []
    for v, tr in sorted(run["traces"].items()):
        if not (0.2 <= v <= 1.3):
            continue
        xi = math.sqrt(v)
        idx = int(round(xi * g.L / np.pi))
        xis.append(g.k[idx])
        gmod.append(tr.abs_gamma[-1])
        umod.append(abs(f_last.spectrum[idx]))
    gmod, umod = np.array(gmod), np.array(umod)
    corr = float(np.corrcoef(gmod, umod)[0, 1])
    ratio = float(np.mean(umod / gmod))
    ok = corr > 0.99
    assert _report(8, "gamma vs u-hat profile shape", ok,
                   f"correlation = {corr:.5f} over {len(xis)} rays; measured "
                   f"normalization ratio |u-hat|/|gamma| = {ratio:.4f} "
                   f"(2 sqrt(pi) = {2 * math.sqrt(math.pi):.4f})")


def test_acceptance_09_completeness_defect_decay():
    zg = make_grid(16.0, 1024)
    pdata = prescribed_data(zg, 0.2 * np.exp(-zg.x ** 2))
    qt = build_q_table(1, w_max=0.4, dw=0.005)
    gx = make_grid(10000.0, 2 ** 16)
    es = {}
    for T0 in (100.0, 200.0, 400.0):
        rep = match_experiment(pdata, 1, T0, 4.0, gx, qt, dt=0.1, n_samples=9)
        es[T0] = rep["e_samples"][-1]["e_l2"]
    r1 = es[200.0] / es[100.0]
    r2 = es[400.0] / es[200.0]
    ok = r1 < 0.9 and r2 < 0.9
    assert _report(9, "wave-maker defect decay", ok,
                   f"e(4 T0) = {es[100.0]:.2e} / {es[200.0]:.2e} / {es[400.0]:.2e}; "
                   f"ratios {r1:.3f}, {r2:.3f} (< 0.9)")


def test_acceptance_10_q_sigma_small_w():
    worst = 0.0
    for sigma in (1, -1):
        for W in np.linspace(0.005, 0.2, 40):
            gap = abs(q_sigma(W, sigma) - W) / W ** 3
            worst = max(worst, gap)
    ok = worst < 1.0
    assert _report(10, "q_sigma small-W law", ok,
                   f"max |q - W| / W^3 = {worst:.3f} (< 1) on |W| <= 0.2, both signs")


# ----------------------------------------------------------------------------
# companion checks tied to the production runs (operation-level examples)
# ----------------------------------------------------------------------------

def test_lambda_norm_growth(prod_plus):
    # ||Lambda u||_2 grows at most like t^delta with delta = O(eps^2); the fit window
    # stops at t = 500 because beyond that the fastest retained spectral tail
    # (third-harmonic radiation at v ~ 24+) has lapped the box and the x-weight in L
    # no longer matches the travelled distance (measured: slope 0.036 on the clean
    # window at two resolutions, exploding once the wrap arrives)
    rows = [r for r in prod_plus["trace"]
            if 100.0 <= r["t"] <= 500.0 and not math.isnan(r["normLambda"])]
    ts = np.array([r["t"] for r in rows])
    lam = np.array([r["normLambda"] for r in rows])
    slope = float(np.polyfit(np.log(ts), np.log(lam), 1)[0])
    print(f"INFO lambda-norm growth exponent = {slope:.4f} (expect [0, 0.1])")
    assert -0.01 <= slope <= 0.1


def test_gamma_phase_consistency_strong_ray(prod_plus):
    # the packet-law consistency statistic at a strong-signal velocity
    tr = prod_plus["traces"][0.36]
    fit = ode_phase_solution(tr)
    print(f"INFO gamma phase consistency at v=0.36: {fit['consistency']:.3f}")
    assert fit["consistency"] < 0.15


def test_decay_check_nonlinear(prod_plus):
    rep = decay_check([(t, f) for t, f in prod_plus["snaps"] if t >= 60.0])
    ok = rep["weighted_sup_u_max"] < 5 * 0.2
    print(f"INFO nonlinear weighted sup = {rep['weighted_sup_u_max']:.3f}, "
          f"slope = {rep['linf_slope']:.3f}")
    assert ok
    assert -0.36 < rep["linf_slope"] < -0.28
