"""Prescribed scattering data, regularization, zeta, Q table, u_app and matching."""

import math

import numpy as np
import pytest

from mkdv.grid import Field, make_grid, forward_transform
from mkdv.special import airy_ai, q_sigma
from mkdv.painleve import solve_painleve
from mkdv.completeness import (smoothstep, band_cutoff, spatial_cutoff, zeta,
                               dyadic_bands, prescribed_data, regularized_W,
                               build_q_table, u_app, match_experiment)


@pytest.fixture(scope="module")
def zgrid():
    return make_grid(16.0, 1024)


@pytest.fixture(scope="module")
def gaussian_data(zgrid):
    return prescribed_data(zgrid, 0.2 * np.exp(-zgrid.x ** 2))


@pytest.fixture(scope="module")
def qtable():
    return build_q_table(1, w_max=0.4, dw=0.01)


def test_smoothstep_and_cutoffs():
    s = np.linspace(-1, 2, 301)
    g = smoothstep(s)
    assert np.all(g[s <= 0] == 0) and np.all(g[s >= 1] == 1)
    assert np.all(np.diff(g) >= -1e-15)
    assert np.all(band_cutoff(np.linspace(-1, 1, 11), 1.0) == 1)
    assert np.all(band_cutoff(np.array([2.1, -3.0]), 1.0) == 0)
    assert np.all(spatial_cutoff(np.array([0.2, -0.5])) == 0)
    assert np.all(spatial_cutoff(np.array([1.0, -4.0])) == 1)


def test_zeta_prescribed_pieces():
    assert zeta(0.0) == 0.25
    assert zeta(4.0) == 2.0
    assert zeta(-9.0) == 3.0
    ys = np.linspace(-3, 3, 601)
    assert np.allclose(zeta(ys), zeta(-ys))
    inner = np.linspace(-0.5, 0.5, 101)
    assert np.allclose(zeta(inner), 0.25 * (1 + 256 * inner ** 2) ** 0.25)


def test_zeta_c2_joints():
    # one-sided second differences agree at the blend joints
    for y0 in (0.5, 1.0):
        h = 1e-5
        left = (zeta(y0 - 2 * h) - 2 * zeta(y0 - h) + zeta(y0)) / h ** 2
        right = (zeta(y0) - 2 * zeta(y0 + h) + zeta(y0 + 2 * h)) / h ** 2
        assert abs(left - right) < 1e-4


def test_dyadic_bands_reconstruct(zgrid, gaussian_data):
    total = sum(gaussian_data.bands.values())
    assert np.max(np.abs(total - gaussian_data.W)) < 1e-10
    # resolution of unity in the quadratic sense: sum_N <W_N, W> = ||W||^2
    dots = sum(zgrid.dx * np.sum(gaussian_data.bands[N] * gaussian_data.W)
               for N in gaussian_data.Ns)
    assert dots == pytest.approx(zgrid.dx * np.sum(gaussian_data.W ** 2), rel=1e-12)


def test_dyadic_bands_zero_and_single_octave(zgrid):
    Ns, bands = dyadic_bands(zgrid, np.zeros(zgrid.n))
    assert all(np.all(b == 0) for b in bands.values())
    # content strictly inside one octave lands in at most two adjacent bands
    spec = np.zeros(zgrid.n, dtype=complex)
    m = (np.abs(zgrid.k) >= 5.0) & (np.abs(zgrid.k) <= 7.0)
    spec[m] = 1.0
    from mkdv.grid import inverse_transform
    w = inverse_transform(zgrid, spec).real
    w = 0.5 * (w + w[(-np.arange(zgrid.n)) % zgrid.n])
    Ns, bands = dyadic_bands(zgrid, w)
    energies = {N: np.sum(bands[N] ** 2) for N in Ns}
    total = sum(energies.values())
    live = {N for N, e in energies.items() if e > 1e-6 * total}
    assert live <= {4, 8}


def test_prescribed_data_symmetrizes(zgrid):
    rng = np.random.default_rng(0)
    pd = prescribed_data(zgrid, rng.standard_normal(zgrid.n))
    idx = (-np.arange(zgrid.n)) % zgrid.n
    assert np.array_equal(pd.W, pd.W[idx])
    assert pd.y_norm > 0


def test_regularized_w_trivial_and_saturation(zgrid, gaussian_data):
    z = np.linspace(-3, 3, 101)
    zero = prescribed_data(zgrid, np.zeros(zgrid.n))
    assert np.all(regularized_W(zero, 100.0, z) == 0)
    full = sum(gaussian_data.band_at(N, z) for N in gaussian_data.Ns
               if N <= 1e6)
    assert np.max(np.abs(regularized_W(gaussian_data, 1e6, z) - full)) < 1e-14
    with pytest.raises(ValueError):
        regularized_W(gaussian_data, 0.5, z)


def test_regularized_w_cutoff_kills_high_band(zgrid):
    # band at N = 64 is zeroed near the origin while t^(2/3) <t^(1/3) z> < N^2 / 2
    spec = np.zeros(zgrid.n, dtype=complex)
    m = (np.abs(zgrid.k) >= 50.0) & (np.abs(zgrid.k) <= 70.0)
    spec[m] = 1.0
    from mkdv.grid import inverse_transform
    w = inverse_transform(zgrid, spec).real
    pd = prescribed_data(zgrid, w)
    assert abs(regularized_W(pd, 1000.0, np.array([0.0]))[0]) < 1e-14
    assert np.max(np.abs(pd.W)) > 1e-3


def test_regularized_w_eventually_constant(gaussian_data):
    z = np.array([0.7])
    vals = [regularized_W(gaussian_data, t, z)[0] for t in (1e4, 1e5, 1e6)]
    assert vals[0] == pytest.approx(vals[2], abs=1e-13)
    assert vals[1] == pytest.approx(vals[2], abs=1e-13)


def test_band_monotone_support(zgrid, gaussian_data):
    # at points where a band's spatial cutoff vanishes, dropping that band changes
    # nothing: evaluate at small z and early t where only low bands contribute
    t = 8.0
    z = np.array([0.05])
    low = sum(gaussian_data.band_at(N, z) * (1.0 if N == 1 else 0.0)
              for N in gaussian_data.Ns)
    # bands with N >= 4 have cutoff chi(t^(2/3) <t^(1/3) z> / N^2) = 0 here
    t23 = t ** (2 / 3)
    bracket = math.sqrt(1 + (t ** (1 / 3) * 0.05) ** 2)
    assert t23 * bracket / 16.0 < 0.5
    val = regularized_W(gaussian_data, t, z)[0]
    contrib_low = gaussian_data.band_at(1, z)[0] \
        + gaussian_data.band_at(2, z)[0] * spatial_cutoff(t23 * bracket / 4.0)
    assert val == pytest.approx(contrib_low, abs=1e-14)


def test_q_table_matches_direct_solve(qtable):
    sol = solve_painleve(0.137, 1)
    for y in (-17.3, -4.2, 0.37, 2.6):
        a = qtable.interp(np.array([y]), np.array([0.137]))[0]
        assert abs(a - sol.interp_Q(y)) < 1e-5


def test_u_app_trivial_and_odd(zgrid, gaussian_data, qtable):
    gx = make_grid(4000.0, 2 ** 14)
    zero = prescribed_data(zgrid, np.zeros(zgrid.n))
    assert np.max(np.abs(u_app(100.0, gx.x, zero, 1, qtable))) < 1e-30
    plus = u_app(100.0, gx.x, gaussian_data, 1, qtable)
    minus_data = prescribed_data(zgrid, -gaussian_data.W)
    minus = u_app(100.0, gx.x, minus_data, 1, qtable)
    assert np.max(np.abs(plus + minus)) < 1e-12


def test_u_app_oscillatory_envelope(zgrid, gaussian_data, qtable):
    from mkdv.completeness import regularized_W as regw
    gx = make_grid(4000.0, 2 ** 15)
    t = 200.0
    ua = u_app(t, gx.x, gaussian_data, 1, qtable)
    m = (gx.x > -1500) & (gx.x < -300)
    xs, vs = gx.x[m], np.abs(ua[m])
    checked = 0
    for i in range(2, len(vs) - 2):
        if vs[i] >= vs[i - 1] and vs[i] >= vs[i + 1] and vs[i] > 1e-3:
            x0 = xs[i]
            z = zeta(x0 * t ** (-1 / 3)) * t ** (-1 / 3)
            wv = regw(gaussian_data, t, np.array([z]))[0]
            env = np.pi ** -0.5 * t ** (-1 / 3) * (t ** (-1 / 3) * abs(x0)) ** -0.25 \
                * abs(wv)
            assert vs[i] <= env * 1.001
            assert vs[i] >= env * 0.9
            checked += 1
    assert checked > 10


def test_u_app_right_tail_is_airy(zgrid, gaussian_data, qtable):
    from mkdv.completeness import regularized_W as regw
    t = 200.0
    # just inside the table edge the solution must already ride the Airy decay
    for y in (4.5, 5.0, 5.5):
        x = y * t ** (1 / 3)
        val = u_app(t, np.array([x]), gaussian_data, 1, qtable)[0]
        z = zeta(y) * t ** (-1 / 3)
        wv = regw(gaussian_data, t, np.array([z]))[0]
        expect = q_sigma(wv, 1) * airy_ai(y) / t ** (1 / 3)
        assert val == pytest.approx(expect, rel=5e-3)


def test_u_app_w_range_gate(zgrid, qtable):
    big = prescribed_data(zgrid, 2.0 * np.exp(-zgrid.x ** 2))
    gx = make_grid(1000.0, 2 ** 12)
    with pytest.raises(ValueError):
        u_app(100.0, gx.x, big, 1, qtable)


def test_match_experiment_zero_data(zgrid, qtable):
    zero = prescribed_data(zgrid, np.zeros(zgrid.n))
    gx = make_grid(500.0, 2 ** 11)
    rep = match_experiment(zero, 1, 50.0, 1.5, gx, qtable, dt=0.25, n_samples=4)
    assert all(r["e_l2"] == 0 for r in rep["e_samples"])


def test_match_experiment_small_defect(zgrid, gaussian_data, qtable):
    gx = make_grid(3000.0, 2 ** 14)
    rep = match_experiment(gaussian_data, 1, 100.0, 2.0, gx, qtable,
                           dt=0.1, n_samples=5)
    final = rep["e_samples"][-1]
    assert final["e_l2"] < 0.05 * final["model_l2"]
    assert rep["T0"] == 100.0 and rep["horizon"] == 200.0
    with pytest.raises(ValueError):
        match_experiment(gaussian_data, 1, 20.0, 2.0, gx, qtable)
