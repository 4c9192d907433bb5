"""Wave packets along the rays x + t v = 0, the packet coefficient gamma(t, v), and
the cubic log-phase law it obeys.

A packet of velocity v > 0 is a bump of width 1/lambda, lambda = t^(-1/2) v^(-1/4),
carried by the oscillatory phase phi(t,x) = -(2/3) t^(-1/2)|x|^(3/2) + pi/4 and
localized near frequency xi_v = sqrt(v).  The coefficient gamma(t,v) = ∫ u conj(Psi_v)
measures the solution along the ray; for mKdV it satisfies
gamma_dot = 3 i sigma t^{-1} |gamma|^2 gamma + err, so arg gamma grows like
3 sigma |gamma|^2 log t while |gamma| settles.
"""

from dataclasses import dataclass, field as dfield
import math

import numpy as np

from .grid import forward_transform

DEFAULT_GATE = 4.0  # membership threshold t^(2/3) v >= c before gamma is trusted


def phase_phi(t, x):
    """Oscillatory phase phi(t, x) = -(2/3) t^(-1/2) |x|^(3/2) + pi/4."""
    if not t > 0:
        raise ValueError("phase needs t > 0")
    return -(2.0 / 3.0) / math.sqrt(t) * np.abs(x) ** 1.5 + math.pi / 4.0


def envelope(s):
    """Normalized C^2 bump (35/32)(1 - s^2)^3 on [-1, 1]; integrates to 1."""
    s = np.asarray(s, dtype=np.float64)
    out = np.where(np.abs(s) < 1.0, (35.0 / 32.0) * (1.0 - s ** 2) ** 3, 0.0)
    return out


@dataclass(frozen=True)
class PacketSpec:
    v: float
    gate: float = DEFAULT_GATE

    def __post_init__(self):
        if not self.v > 0:
            raise ValueError("packet velocity must be positive")

    @property
    def xi(self):
        return math.sqrt(self.v)

    def lam(self, t):
        return t ** -0.5 * self.v ** -0.25

    def admitted(self, t):
        return t ** (2.0 / 3.0) * self.v >= self.gate

    def support(self, t):
        half = 1.0 / self.lam(t)
        return -t * self.v - half, -t * self.v + half


def packet(t, spec, grid):
    """Complex packet samples Psi_v(t, x) = chi(lambda (x + t v)) e^{i phi} on the grid.

    Raises if the membership gate fails or the support is clipped by the box.
    """
    if not spec.admitted(t):
        raise ValueError(f"gate t^(2/3) v >= {spec.gate} fails at t={t}, v={spec.v}")
    lo, hi = spec.support(t)
    if lo < -grid.L or hi > grid.L:
        raise ValueError(f"packet support [{lo:.1f}, {hi:.1f}] clipped by box [+-{grid.L}]")
    lam = spec.lam(t)
    chi = envelope(lam * (grid.x + t * spec.v))
    psi = chi.astype(complex)
    m = chi > 0
    psi[m] = chi[m] * np.exp(1j * phase_phi(t, grid.x[m]))
    return psi


def packet_spectrum(t, spec, grid):
    """Spectrum of the packet (continuum-normalized); concentrated near xi_v."""
    return forward_transform(grid, packet(t, spec, grid))


def gamma(u_field, t, spec):
    """Packet coefficient gamma(t, v) = dx * sum(u conj(Psi_v))."""
    g = u_field.grid
    psi = packet(t, spec, g)
    return g.dx * complex(np.sum(u_field.values * np.conj(psi)))


def _nonuniform_derivative(ts, fs):
    """Centered 3-point first derivative on a nonuniform ladder; NaN at the ends."""
    out = np.full(len(ts), np.nan + 0j if np.iscomplexobj(fs) else np.nan)
    for i in range(1, len(ts) - 1):
        h1 = ts[i] - ts[i - 1]
        h2 = ts[i + 1] - ts[i]
        out[i] = (-h2 / (h1 * (h1 + h2)) * fs[i - 1]
                  + (h2 - h1) / (h1 * h2) * fs[i]
                  + h1 / (h2 * (h1 + h2)) * fs[i + 1])
    return out


@dataclass
class GammaTrace:
    v: float
    sigma: int
    t: np.ndarray
    gamma: np.ndarray
    abs_gamma: np.ndarray = dfield(default=None)
    arg_unwrapped: np.ndarray = dfield(default=None)
    gamma_dot: np.ndarray = dfield(default=None)
    residual: np.ndarray = dfield(default=None)

    def finalize(self):
        self.abs_gamma = np.abs(self.gamma)
        raw = np.angle(self.gamma)
        if np.any(np.abs(np.diff(raw + 0.0)) >= np.pi):
            # sampling density contract: successive raw increments must stay below pi
            inc = float(np.max(np.abs(np.diff(raw))))
            raise ValueError(f"phase ladder too coarse for unwrapping (max step {inc:.2f})")
        self.arg_unwrapped = np.unwrap(raw)
        self.gamma_dot = _nonuniform_derivative(self.t, self.gamma)
        self.residual = self.gamma_dot - 3j * self.sigma / self.t * self.abs_gamma ** 2 * self.gamma
        return self

    def write_csv(self, path):
        with open(path, "w") as fh:
            fh.write("t,re_gamma,im_gamma,abs_gamma,arg_unwrapped,residual_abs\n")
            for i in range(len(self.t)):
                fh.write(f"{self.t[i]:.17g},{self.gamma[i].real:.17g},"
                         f"{self.gamma[i].imag:.17g},{self.abs_gamma[i]:.17g},"
                         f"{self.arg_unwrapped[i]:.17g},{np.abs(self.residual[i]):.17g}\n")


class GammaProbe:
    """Evolution observer collecting gamma(t, v) for a family of velocities.

    Velocities whose gate or box-support test fails at a sample time are skipped at
    that time, so each trace starts when its ray enters the admitted region.
    """

    def __init__(self, velocities, times, sigma, gate=DEFAULT_GATE):
        self.specs = [PacketSpec(v, gate) for v in velocities]
        self.times = np.asarray(sorted(times), dtype=float)
        self.sigma = sigma
        self._samples = {spec.v: [] for spec in self.specs}

    def observer(self):
        return self.times, self._collect

    def _collect(self, t, u_field):
        for spec in self.specs:
            if not spec.admitted(t):
                continue
            lo, hi = spec.support(t)
            if lo < -u_field.grid.L or hi > u_field.grid.L:
                continue
            self._samples[spec.v].append((t, gamma(u_field, t, spec)))

    def traces(self):
        out = []
        for spec in self.specs:
            pts = self._samples[spec.v]
            if len(pts) < 3:
                continue
            ts = np.array([p[0] for p in pts])
            gs = np.array([p[1] for p in pts])
            out.append(GammaTrace(v=spec.v, sigma=self.sigma, t=ts, gamma=gs).finalize())
        return out


def gamma_trace(run_evolve, velocities, times, sigma, gate=DEFAULT_GATE):
    """Run an evolution with a gamma probe attached; returns the list of GammaTrace.

    run_evolve: callable(observers) -> None performing the evolution with the extra
    observers; this keeps the probe decoupled from the solver configuration.
    """
    probe = GammaProbe(velocities, times, sigma, gate)
    run_evolve([probe.observer()])
    return probe.traces()


def ode_phase_solution(trace):
    """Fit the log-phase law on a trace spanning at least 1.5 decades.

    Weighted least squares of unwrap(arg gamma) against log(t xi_v^3) gives slope s;
    the ODE gamma_dot = 3 i sigma t^{-1} |gamma|^2 gamma predicts s = 3 sigma |gamma|^2,
    so the consistency statistic is |s - 3 sigma mean|gamma|^2| / |s|.
    """
    span = math.log10(trace.t[-1] / trace.t[0])
    if span < 1.5:
        raise ValueError(f"trace spans {span:.2f} decades; need >= 1.5")
    xv3 = trace.t * trace.v ** 1.5
    x = np.log(xv3)
    y = trace.arg_unwrapped
    w = trace.abs_gamma
    wsum = np.sum(w)
    xb = np.sum(w * x) / wsum
    yb = np.sum(w * y) / wsum
    slope = np.sum(w * (x - xb) * (y - yb)) / np.sum(w * (x - xb) ** 2)
    intercept = yb - slope * xb
    mean_sq = float(np.sum(w * trace.abs_gamma ** 2) / wsum)
    predicted = 3.0 * trace.sigma * mean_sq
    consistency = abs(slope - predicted) / abs(slope) if slope != 0 else float("inf")
    resid = y - (intercept + slope * x)
    return {"slope": float(slope), "intercept": float(intercept),
            "mean_abs_gamma_sq": mean_sq, "consistency": float(consistency),
            "fit_rms": float(np.sqrt(np.sum(w * resid ** 2) / wsum)),
            "stderr": float(np.sqrt(np.sum(w * resid ** 2) / wsum
                                    / np.sum(w * (x - xb) ** 2)))}
