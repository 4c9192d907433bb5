"""Space-time region partition, scattering-profile extraction from Fourier data,
asymptotic predictions, and the weighted error norms of the decay estimates.

The profile W is defined through the frequency-side asymptotic
u-hat(t, xi) = e^{i t xi^3 / 3 + (3 i sigma / 4 pi) |W|^2 log(t xi^3)} W(xi) + err:
its modulus is the late-time mean of |u-hat| and its argument the intercept of the
log-phase fit.  W extends to the line by W(-xi) = conj W(xi), W(0) = ∫u0.
"""

from dataclasses import dataclass, field as dfield
import math

import numpy as np
from scipy.interpolate import CubicSpline

from .grid import spectral_derivative

DEFAULT_FREQ_GATE = 2.0  # t^(1/3) xi >= gate before a frequency is trusted


@dataclass(frozen=True)
class RegionPartition:
    """Three-region split with exponent rho and per-region constants (default 1)."""
    rho: float = 0.0
    c_plus: float = 1.0
    c_zero: float = 1.0
    c_minus: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.rho <= 1.0 / 18.0):
            raise ValueError(f"rho must lie in [0, 1/18], got {self.rho}")

    def threshold(self, t, c):
        return c * t ** (2.0 * self.rho)


def classify(t, x, part):
    """Tag (t, x) as decaying / selfsimilar / oscillatory / boundary."""
    if not t >= 1:
        raise ValueError("region classification needs t >= 1")
    w = t ** (-1.0 / 3.0) * abs(x)
    osc = x < 0 and w >= part.threshold(t, part.c_minus)
    dec = x > 0 and w >= part.threshold(t, part.c_plus)
    ss = w <= part.threshold(t, part.c_zero)
    if ss and not (osc or dec):
        return "selfsimilar"
    if osc and not ss:
        return "oscillatory"
    if dec and not ss:
        return "decaying"
    if osc or dec or ss:
        return "boundary"
    return "boundary"


def region_masks(t, grid, part):
    """Factor-2 shrunk core regions plus the excluded boundary bands, as index masks."""
    w = t ** (-1.0 / 3.0) * np.abs(grid.x)
    osc = (grid.x < 0) & (w >= 2.0 * part.threshold(t, part.c_minus))
    dec = (grid.x > 0) & (w >= 2.0 * part.threshold(t, part.c_plus))
    ss = w <= 0.5 * part.threshold(t, part.c_zero)
    band = ~(osc | dec | ss)
    return {"oscillatory": osc, "decaying": dec, "selfsimilar": ss, "boundary": band}


@dataclass
class ScatteringProfile:
    xi: np.ndarray
    W: np.ndarray
    sigma: int
    W0: complex = 0.0
    slope_consistency: np.ndarray = dfield(default=None)
    fit_residual: np.ndarray = dfield(default=None)
    phase_slope: np.ndarray = dfield(default=None)
    t_window: tuple = ()

    def __post_init__(self):
        order = np.argsort(self.xi)
        self.xi = np.asarray(self.xi, dtype=float)[order]
        self.W = np.asarray(self.W, dtype=complex)[order]
        for name in ("slope_consistency", "fit_residual", "phase_slope"):
            val = getattr(self, name)
            if val is not None:
                setattr(self, name, np.asarray(val)[order])

    @property
    def xi_max(self):
        return self.xi[-1]

    def W_at(self, xi, zero_beyond=False):
        """Hermitian-extended linear interpolation; W(0) comes from the mean slot."""
        xi = np.asarray(xi, dtype=float)
        axi = np.abs(xi)
        if np.any(axi > self.xi_max) and not zero_beyond:
            raise ValueError("frequency outside the extracted profile band")
        knots = np.concatenate([[0.0], self.xi])
        vals = np.concatenate([[self.W0], self.W])
        re = np.interp(axi, knots, vals.real, right=0.0 if zero_beyond else None)
        im = np.interp(axi, knots, vals.imag, right=0.0 if zero_beyond else None)
        out = re + 1j * im
        out = np.where(xi < 0, np.conj(out), out)
        return out if out.ndim else complex(out)


def extract_profile(snapshots, xi_grid, sigma, gate=DEFAULT_FREQ_GATE, E0=None):
    """Fit W(xi) from a geometric ladder of (t, Field) snapshots.

    Per frequency: |W| is the mean of |u-hat| over the last decade of times; arg W is
    the intercept of the |u-hat|-weighted least-squares fit of the unwound phase of
    u-hat e^{-i t xi^3/3} against log(t xi^3).  The stored consistency statistic is
    |slope * 4 pi / (3 sigma) - |W|^2| / |W|^2.
    """
    snapshots = sorted(snapshots, key=lambda p: p[0])
    ts = np.array([p[0] for p in snapshots])
    if math.log10(ts[-1] / ts[0]) < 1.5:
        raise ValueError("snapshot times must span at least 1.5 decades")
    grid = snapshots[0][1].grid
    xi_grid = np.asarray(xi_grid, dtype=float)
    if np.any(ts[0] ** (1.0 / 3.0) * xi_grid < gate):
        bad = xi_grid[ts[0] ** (1.0 / 3.0) * xi_grid < gate]
        raise ValueError(f"frequencies {bad} outside the admitted region at t={ts[0]}")
    idx = np.round(xi_grid * grid.L / np.pi).astype(int)
    if np.any(idx < 1) or np.any(idx >= grid.n // 2):
        raise ValueError("requested frequencies fall off the wavenumber ladder")
    xi_snap = idx * np.pi / grid.L

    spectra = np.stack([f.spectrum[idx] for _, f in snapshots])  # (nt, nxi)
    last_decade = ts >= ts[-1] / 10.0
    mod = np.mean(np.abs(spectra[last_decade]), axis=0)

    Ws = np.empty(len(xi_snap), dtype=complex)
    cons = np.empty(len(xi_snap))
    fres = np.empty(len(xi_snap))
    slopes = np.zeros(len(xi_snap))
    for j, xi in enumerate(xi_snap):
        if mod[j] == 0.0:
            Ws[j] = 0.0
            cons[j] = 0.0
            fres[j] = 0.0
            continue
        ph = np.angle(spectra[:, j] * np.exp(-1j * ts * xi ** 3 / 3.0))
        ph = np.unwrap(ph)
        x = np.log(ts * xi ** 3)
        w = np.abs(spectra[:, j])
        wsum = np.sum(w)
        xb = np.sum(w * x) / wsum
        yb = np.sum(w * ph) / wsum
        denom = np.sum(w * (x - xb) ** 2)
        slope = np.sum(w * (x - xb) * (ph - yb)) / denom
        intercept = yb - slope * xb
        Ws[j] = mod[j] * np.exp(1j * intercept)
        slopes[j] = slope
        w2 = mod[j] ** 2
        cons[j] = abs(slope * 4.0 * math.pi / (3.0 * sigma) - w2) / w2 if w2 > 0 else np.inf
        resid = ph - (intercept + slope * x)
        fres[j] = math.sqrt(np.sum(w * resid ** 2) / wsum)

    W0 = E0 if E0 is not None else grid.dx * float(np.sum(snapshots[0][1].values))
    return ScatteringProfile(xi=xi_snap, W=Ws, sigma=sigma, W0=W0,
                             slope_consistency=cons, fit_residual=fres,
                             phase_slope=slopes, t_window=(float(ts[0]), float(ts[-1])))


def oscillatory_prediction(t, x, profile, sigma):
    """Leading oscillatory-region value at a single (t, x), x < 0."""
    if x >= 0:
        raise ValueError("oscillatory prediction needs x < 0")
    xi = math.sqrt(abs(x) / t)
    W = profile.W_at(xi)
    w = t ** (-1.0 / 3.0) * abs(x)
    phase = (-(2.0 / 3.0) / math.sqrt(t) * abs(x) ** 1.5 + math.pi / 4.0
             + (3.0 * sigma / (4.0 * math.pi)) * abs(W) ** 2
             * math.log(abs(x) ** 1.5 / math.sqrt(t)))
    return (np.pi ** -0.5) * t ** (-1.0 / 3.0) * w ** -0.25 * (np.exp(1j * phase) * W).real


def oscillatory_prediction_field(t, grid, profile, sigma, zero_beyond=True,
                                 log_phase=True):
    """Vectorized oscillatory prediction on the x < 0 half of the grid (0 elsewhere).

    Frequencies beyond the profile band contribute 0 when zero_beyond is set, which is
    legitimate once the band covers everything above the spectral floor.  log_phase
    turns off the cubic log correction, giving the plain linear-flow asymptotic.
    """
    out = np.zeros(grid.n)
    m = grid.x < 0
    xm = grid.x[m]
    xi = np.sqrt(-xm / t)
    W = profile.W_at(xi, zero_beyond=zero_beyond)
    w = t ** (-1.0 / 3.0) * (-xm)
    phase = -(2.0 / 3.0) / math.sqrt(t) * (-xm) ** 1.5 + math.pi / 4.0
    if log_phase:
        phase = phase + (3.0 * sigma / (4.0 * math.pi)) * np.abs(W) ** 2 \
            * np.log((-xm) ** 1.5 / math.sqrt(t))
    out[m] = (np.pi ** -0.5) * t ** (-1.0 / 3.0) * w ** -0.25 * (np.exp(1j * phase) * W).real
    return out


def selfsimilar_prediction(t, x, painleve_solution):
    """t^(-1/3) Q(t^(-1/3) x) interpolated from a solved Painleve II profile."""
    y = t ** (-1.0 / 3.0) * np.asarray(x, dtype=float)
    sol = painleve_solution
    if np.any(y < sol.y[0]) or np.any(y > sol.y[-1]):
        raise ValueError("selfsimilar prediction outside the Q solution window")
    return t ** (-1.0 / 3.0) * sol.interp_Q(y)


def region_error_norms(u_field, prediction, part, t, profile=None, sigma=None,
                       log_phase=True):
    """Weighted error norms per region (factor-2 boundary bands reported separately).

    prediction: array of the oscillatory-region model values on the grid.  When a
    profile is supplied, frequency-side norms of u-hat minus its prediction are added
    over the profile band (log_phase=False drops the cubic log correction there).
    """
    g = u_field.grid
    u = u_field.values
    pred = np.asarray(prediction, dtype=float)
    err = u - pred
    w = t ** (-1.0 / 3.0) * np.abs(g.x)
    masks = region_masks(t, g, part)
    report = {"t": float(t), "rho": part.rho}

    def sup(vals, mask):
        return float(np.max(vals[mask])) if np.any(mask) else 0.0

    def l2(vals, mask):
        return float(math.sqrt(g.dx * np.sum(vals[mask] ** 2))) if np.any(mask) else 0.0

    m = masks["oscillatory"]
    report["osc_linf"] = sup(t ** (1.0 / 3.0) * w ** 0.375 * np.abs(err), m)
    report["osc_l2"] = l2(t ** (1.0 / 6.0) * w ** 0.25 * np.abs(err), m)
    m = masks["decaying"]
    report["dec_linf"] = sup(t ** (1.0 / 3.0) * w ** 0.75 * np.abs(u), m)
    report["dec_l2"] = l2(t ** (1.0 / 6.0) * w * np.abs(u), m)
    m = masks["boundary"]
    report["band_linf"] = sup(t ** (1.0 / 3.0) * w ** 0.375 * np.abs(err), m)
    report["band_l2"] = l2(t ** (1.0 / 6.0) * w ** 0.25 * np.abs(err), m)

    if profile is not None:
        if sigma is None:
            sigma = profile.sigma
        spec = u_field.spectrum
        kpos = g.k > 0
        xi = g.k[kpos]
        gated = (t ** (1.0 / 3.0) * xi >= DEFAULT_FREQ_GATE * t ** part.rho) \
            & (xi <= profile.xi_max)
        xi = xi[gated]
        Wv = profile.W_at(xi)
        ph = t * xi ** 3 / 3.0
        if log_phase:
            ph = ph + (3.0 * sigma / (4.0 * math.pi)) * np.abs(Wv) ** 2 \
                * np.log(t * xi ** 3)
        pred_hat = np.exp(1j * ph) * Wv
        err_hat = np.abs(spec[kpos][gated] - pred_hat)
        dk = np.pi / g.L
        report["freq_linf"] = float(np.max((t ** (1.0 / 3.0) * xi) ** 0.25 * err_hat)) \
            if xi.size else 0.0
        report["freq_l2"] = float(t ** (1.0 / 6.0)
                                  * math.sqrt(dk * np.sum((t ** (1.0 / 3.0) * xi)
                                                          * err_hat ** 2))) if xi.size else 0.0
    return report


def decay_check(snapshots):
    """Fit the dispersive-decay exponents over a snapshot ladder.

    Reports the per-time weighted sups of the pointwise decay estimates, their maxima,
    and the log-log slope of the plain sup norm (target -1/3).
    """
    rows = []
    for t, f in sorted(snapshots, key=lambda p: p[0]):
        g = f.grid
        u = f.values
        ux = spectral_derivative(f, 1).values
        bracket = np.sqrt(1.0 + (t ** (-1.0 / 3.0) * np.abs(g.x)) ** 2)
        M = float(np.max(t ** (1.0 / 3.0) * bracket ** 0.25 * np.abs(u)))
        D = float(np.max(t ** (2.0 / 3.0) * bracket ** -0.25 * np.abs(ux)))
        rows.append({"t": float(t), "weighted_sup_u": M, "weighted_sup_ux": D,
                     "linf": float(np.max(np.abs(u)))})
    linfs = np.array([r["linf"] for r in rows])
    ts = np.array([r["t"] for r in rows])
    if np.all(linfs > 0) and len(rows) >= 3:
        slope = float(np.polyfit(np.log(ts), np.log(linfs), 1)[0])
    else:
        slope = float("nan")
    return {"rows": rows, "linf_slope": slope,
            "weighted_sup_u_max": max(r["weighted_sup_u"] for r in rows),
            "weighted_sup_ux_max": max(r["weighted_sup_ux"] for r in rows),
            "empty": bool(np.all(linfs == 0))}


def selfsimilar_trace(snapshots, sigma, y_half=4.0, ny=801, residual_half=2.0):
    """Self-similar profiles U(t, y) = t^(1/3) u(t, t^(1/3) y) on a fixed y grid.

    Reports the Cauchy differences ||U(2t) - U(t)||_inf and the Painleve residual
    ||y U - U_yy + 3 sigma U^3||_inf on |y| <= residual_half, both over snapshot pairs
    at time ratio 2 found in the ladder.
    """
    y = np.linspace(-y_half, y_half, ny)
    snapshots = sorted(snapshots, key=lambda p: p[0])
    U = {}
    resid = []
    for t, f in snapshots:
        g = f.grid
        xs = t ** (1.0 / 3.0) * y
        if xs[0] < g.x[0] or xs[-1] > g.x[-1]:
            raise ValueError("selfsimilar window leaves the box")
        lo = np.searchsorted(g.x, xs[0] - 5 * g.dx)
        hi = np.searchsorted(g.x, xs[-1] + 5 * g.dx)
        window = slice(max(lo, 0), min(hi, g.n))
        u_sp = CubicSpline(g.x[window], f.values[window])
        uxx_sp = CubicSpline(g.x[window], spectral_derivative(f, 2).values[window])
        Ut = t ** (1.0 / 3.0) * u_sp(xs)
        Uyy = t * uxx_sp(xs)
        U[t] = Ut
        m = np.abs(y) <= residual_half
        r = y[m] * Ut[m] - Uyy[m] + 3.0 * sigma * Ut[m] ** 3
        resid.append((float(t), float(np.max(np.abs(r)))))

    times = sorted(U)
    cauchy = []
    for t in times:
        t2 = next((s for s in times if abs(s - 2.0 * t) < 1e-6 * t), None)
        if t2 is not None:
            m = np.abs(y) <= residual_half
            cauchy.append((float(t), float(np.max(np.abs(U[t2][m] - U[t][m])))))
    return {"y": y, "U": U, "cauchy": cauchy, "residual_sup": resid}
