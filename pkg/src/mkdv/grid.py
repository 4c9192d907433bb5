"""Periodic grid, Fourier transform contract, Airy propagator and conserved functionals.

The real line is truncated to a periodic box [-L, L).  The forward transform is
normalized to approximate the continuum integral  ∫ f(x) e^{-i x k} dx,  so spectral
values are directly comparable with asymptotic statements about u-hat.  All multiplier
operations (third-derivative propagator, spectral derivatives, dealiasing) act on that
spectrum.
"""

from dataclasses import dataclass
import json

import numpy as np
import scipy.fft as _fft


def _is_power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0


class Grid:
    """Uniform periodic grid on [-L, L) with 2pi/(2L)-spaced wavenumbers.

    Immutable after construction; shareable across threads.
    """

    __slots__ = ("L", "n", "dx", "x", "k", "k_nyquist", "_phase_fwd", "_phase_inv",
                 "dealias_mask", "odd_deriv_mask")

    def __init__(self, L, n):
        if not isinstance(n, (int, np.integer)) or not _is_power_of_two(int(n)) or n < 16:
            raise ValueError(f"n must be a power of two >= 16, got {n}")
        if not (L > 0):
            raise ValueError(f"L must be positive, got {L}")
        self.L = float(L)
        self.n = int(n)
        self.dx = 2.0 * self.L / self.n
        self.x = -self.L + self.dx * np.arange(self.n)
        # fft-ordered ladder k_j = pi j / L, j = 0..n/2-1, -n/2..-1
        self.k = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)
        self.k_nyquist = np.pi / self.dx
        # e^{+iLk} carries the -L node offset so the spectrum matches the continuum integral
        m = np.arange(self.n)
        sign = np.where(m % 2 == 0, 1.0, -1.0)
        self._phase_fwd = self.dx * sign
        self._phase_inv = sign / self.dx
        self.dealias_mask = np.abs(self.k) <= (2.0 / 3.0) * self.k_nyquist
        self.odd_deriv_mask = np.abs(np.abs(self.k) - self.k_nyquist) > 1e-12 * self.k_nyquist

    def __eq__(self, other):
        return isinstance(other, Grid) and self.n == other.n and self.L == other.L

    def __repr__(self):
        return f"Grid(L={self.L}, n={self.n})"


def make_grid(L, n):
    """Build the periodic grid; rejects non-power-of-two n and non-positive L."""
    return Grid(L, n)


def forward_transform(grid, samples):
    """Discrete approximation of ∫ f(x) e^{-ixk} dx on the grid's k ladder."""
    return grid._phase_fwd * _fft.fft(np.asarray(samples))


def inverse_transform(grid, spectrum):
    """Inverse of forward_transform; returns complex samples."""
    return _fft.ifft(np.asarray(spectrum) * grid._phase_inv)


class Field:
    """Real-valued solution samples on a Grid with an optional cached spectrum."""

    __slots__ = ("grid", "values", "_spectrum")

    def __init__(self, grid, values, spectrum=None):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (grid.n,):
            raise ValueError(f"values shape {values.shape} does not match grid n={grid.n}")
        self.grid = grid
        self.values = values
        self._spectrum = spectrum

    @property
    def cache_valid(self):
        return self._spectrum is not None

    @property
    def spectrum(self):
        if self._spectrum is None:
            self._spectrum = forward_transform(self.grid, self.values)
        return self._spectrum

    @classmethod
    def from_values(cls, grid, values):
        return cls(grid, values)

    @classmethod
    def from_spectrum_array(cls, grid, spectrum):
        vals = inverse_transform(grid, spectrum)
        return cls(grid, vals.real, spectrum=np.array(spectrum, dtype=complex))

    def copy(self):
        spec = None if self._spectrum is None else self._spectrum.copy()
        return Field(self.grid, self.values.copy(), spec)

    def imag_residue(self):
        """Max |imaginary part| after a spectrum round trip; should be ~1e-16 for real data."""
        return float(np.max(np.abs(inverse_transform(self.grid, self.spectrum).imag)))


def to_spectrum(field):
    """Fill the spectral cache; returns the same field."""
    field.spectrum
    return field


def from_spectrum(field):
    """Rebuild physical samples from the cached spectrum (round trip identity)."""
    if field._spectrum is None:
        raise ValueError("no cached spectrum; call to_spectrum first")
    return Field.from_spectrum_array(field.grid, field._spectrum)


def airy_propagate(field, t):
    """Apply the exact linear propagator, the Fourier multiplier e^{i t k^3 / 3}.

    Solves u_t + (1/3) u_xxx = 0 exactly on the grid; preserves |u-hat(k)| modewise.
    """
    g = field.grid
    mult = np.exp(1j * (t / 3.0) * g.k ** 3)
    return Field.from_spectrum_array(g, field.spectrum * mult)


def spectral_derivative(field, order):
    """d^order/dx^order via the (ik)^order multiplier; Nyquist zeroed for odd orders."""
    if order not in (1, 2, 3):
        raise ValueError(f"order must be 1, 2 or 3, got {order}")
    g = field.grid
    mult = (1j * g.k) ** order
    if order % 2 == 1:
        mult = mult * g.odd_deriv_mask
    return Field.from_spectrum_array(g, field.spectrum * mult)


def dealias(field):
    """Zero modes with |k| > (2/3) k_nyquist (2/3 rule for the cubic nonlinearity)."""
    g = field.grid
    return Field.from_spectrum_array(g, field.spectrum * g.dealias_mask)


@dataclass(frozen=True)
class ConservedTriple:
    E0: float  # ∫ u dx
    E1: float  # ∫ u^2 dx
    E2: float  # ∫ u_x^2 + (3/2) sigma u^4 dx


def conserved(field, sigma):
    """The three conserved functionals by spectral quadrature dx*sum."""
    g = field.grid
    u = field.values
    ux = spectral_derivative(field, 1).values
    E0 = g.dx * float(np.sum(u))
    E1 = g.dx * float(np.sum(u * u))
    E2 = g.dx * float(np.sum(ux * ux + 1.5 * sigma * u ** 4))
    return ConservedTriple(E0, E1, E2)


def write_snapshot(path, field, t, sigma):
    """Field snapshot: one JSON header line then n raw little-endian float64 samples."""
    header = {"n": field.grid.n, "L": field.grid.L, "t": float(t), "sigma": int(sigma),
              "byte_order": "little", "dtype": "float64"}
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        fh.write(field.values.astype("<f8").tobytes())


def read_snapshot(path):
    """Read a snapshot file; returns (field, t, sigma)."""
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        raw = fh.read(8 * header["n"])
    if len(raw) != 8 * header["n"]:
        raise ValueError(f"snapshot payload truncated in {path}")
    vals = np.frombuffer(raw, dtype="<f8").astype(np.float64)
    grid = make_grid(header["L"], header["n"])
    return Field(grid, vals), header["t"], header["sigma"]
