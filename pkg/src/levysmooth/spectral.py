"""Truncated-domain Fourier calculus on periodic grids.

Conventions: forward transform (2 pi)^{-d} integral of exp(-i xi.x) f(x) dx,
inverse transform integral of exp(+i xi.x) g(xi) dxi with unit weight.  On the
grid [-L, L)^d with n points per axis the frequencies are pi k / L with
k in {-n/2, ..., n/2 - 1}; frequency arrays are stored in FFT order.  The
unpaired Nyquist mode k = -n/2 is zeroed in every multiplier application.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import CostGuardError, EvaluationError

PDO_COST_CEILING = 2**30


@dataclass(frozen=True)
class GridSpec:
    """Periodic grid on [-L, L)^d with n (power of two) points per axis."""

    d: int
    L: float
    n: int

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError("only d in {1, 2} is supported")
        if self.L <= 0:
            raise ValueError("half-width L must be positive")
        if self.n < 16 or self.n & (self.n - 1) != 0:
            raise ValueError("n must be a power of two >= 16")

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def dxi(self) -> float:
        return np.pi / self.L

    def x_axis(self) -> np.ndarray:
        return -self.L + self.dx * np.arange(self.n)

    def k_axis(self) -> np.ndarray:
        """Integer frequencies in FFT order: 0, 1, ..., n/2-1, -n/2, ..., -1."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n)

    def xi_axis(self) -> np.ndarray:
        return self.dxi * self.k_axis()

    def x_points(self) -> np.ndarray:
        """Grid points; shape (n,) for d=1, (n, n, 2) for d=2."""
        ax = self.x_axis()
        if self.d == 1:
            return ax
        X, Y = np.meshgrid(ax, ax, indexing="ij")
        return np.stack([X, Y], axis=-1)

    def xi_points(self) -> np.ndarray:
        ax = self.xi_axis()
        if self.d == 1:
            return ax
        U, V = np.meshgrid(ax, ax, indexing="ij")
        return np.stack([U, V], axis=-1)

    def xi_norm(self) -> np.ndarray:
        pts = self.xi_points()
        if self.d == 1:
            return np.abs(pts)
        return np.linalg.norm(pts, axis=-1)

    def nyquist_mask(self) -> np.ndarray:
        """True on modes carrying the unpaired Nyquist frequency on any axis."""
        k = self.k_axis()
        edge = k == -self.n // 2
        if self.d == 1:
            return edge
        return edge[:, None] | edge[None, :]

    def bracket(self, s: float) -> np.ndarray:
        """(1 + |xi|^2)^(s/2) on the frequency grid."""
        r = self.xi_norm()
        return (1.0 + r * r) ** (s / 2.0)

    @property
    def cell_volume(self) -> float:
        return self.dx**self.d

    @property
    def freq_cell_volume(self) -> float:
        return self.dxi**self.d


@dataclass(frozen=True)
class Field:
    """Complex samples on a grid, tagged as physical- or frequency-space."""

    grid: GridSpec
    values: np.ndarray
    space: str = "physical"

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        expected = (self.grid.n,) * self.grid.d
        if vals.shape != expected:
            raise ValueError(f"field shape {vals.shape} does not match grid {expected}")
        if self.space not in ("physical", "frequency"):
            raise ValueError("space must be 'physical' or 'frequency'")
        object.__setattr__(self, "values", vals)

    def copy_with(self, values: np.ndarray, space: str | None = None) -> "Field":
        return Field(self.grid, values, space or self.space)

    def l2_norm(self) -> float:
        """Discrete L2 norm in the field's own space."""
        w = self.grid.cell_volume if self.space == "physical" else self.grid.freq_cell_volume
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * w))


def _phase(grid: GridSpec) -> np.ndarray:
    """Alternating-sign factor translating the FFT origin to x = -L."""
    sign = np.where(np.arange(grid.n) % 2 == 0, 1.0, -1.0)
    if grid.d == 1:
        return sign
    return sign[:, None] * sign[None, :]


def fourier_forward(f: Field) -> Field:
    """Physical -> frequency under the (2 pi)^{-d} forward convention."""
    if f.space != "physical":
        raise ValueError("fourier_forward expects a physical-space field")
    g = f.grid
    scale = (2.0 * np.pi) ** (-g.d) * g.cell_volume
    vals = scale * _phase(g) * np.fft.fftn(f.values)
    return Field(g, vals, "frequency")


def fourier_inverse(f: Field) -> Field:
    """Frequency -> physical; inverse of :func:`fourier_forward` to roundoff."""
    if f.space != "frequency":
        raise ValueError("fourier_inverse expects a frequency-space field")
    g = f.grid
    scale = g.freq_cell_volume * g.n**g.d
    vals = scale * np.fft.ifftn(_phase(g) * f.values)
    return Field(g, vals, "physical")


def _spectrum(f: Field) -> np.ndarray:
    return f.values if f.space == "frequency" else fourier_forward(f).values


def sobolev_norm(f: Field, s: float) -> float:
    """Bessel-potential norm |f|_{H^s} via the Plancherel identity.

    Equals the physical-space discrete L2 norm exactly at s = 0.
    """
    g = f.grid
    fhat = _spectrum(f)
    weight = (2.0 * np.pi) ** g.d * g.freq_cell_volume
    return float(np.sqrt(np.sum(g.bracket(2.0 * s) * np.abs(fhat) ** 2) * weight))


def apply_multiplier(m, f: Field) -> Field:
    """Apply a Fourier multiplier: inverse transform of m(xi) * spectrum.

    ``m`` is a callable on frequency points or a precomputed grid array.  The
    Nyquist mode is zeroed; non-finite multiplier values raise, naming the
    offending frequency.
    """
    g = f.grid
    mv = m if isinstance(m, np.ndarray) else np.asarray(m(g.xi_points()), dtype=complex)
    if mv.shape != (g.n,) * g.d:
        raise ValueError("multiplier grid shape mismatch")
    bad = ~np.isfinite(mv)
    if bad.any():
        idx = np.argwhere(bad)[0]
        xi_bad = g.xi_points()[tuple(idx)]
        raise EvaluationError(f"multiplier is not finite at xi = {xi_bad}")
    spec = _spectrum(f) * mv
    spec = np.where(g.nyquist_mask(), 0.0, spec)
    out = fourier_inverse(Field(g, spec, "frequency"))
    if f.space == "frequency":
        return fourier_forward(out)
    return out


def apply_pdo(symbol: Callable, f: Field, override_cost_guard: bool = False) -> Field:
    """Apply a state-dependent symbol a(x, xi) by direct frequency summation.

    For every grid point x the output is the weighted sum over all grid
    frequencies of exp(i x.xi) a(x, xi) fhat(xi).  Cost is n^d x n^d; sizes
    with n^(2d) > 2^30 are refused unless ``override_cost_guard`` is set.
    """
    g = f.grid
    if g.n ** (2 * g.d) > PDO_COST_CEILING and not override_cost_guard:
        raise CostGuardError(
            f"dense application size n^(2d) = {g.n ** (2 * g.d)} exceeds 2^30"
        )
    fhat = _spectrum(f)
    mask = g.nyquist_mask()
    fhat = np.where(mask, 0.0, fhat)
    w = g.freq_cell_volume

    if g.d == 1:
        x = g.x_axis()
        xi = g.xi_axis()
        out = np.empty(g.n, dtype=complex)
        block = max(1, 2**22 // g.n)
        for lo in range(0, g.n, block):
            hi = min(lo + block, g.n)
            xb = x[lo:hi]
            a = np.asarray(symbol(xb[:, None], xi[None, :]), dtype=complex)
            if not np.all(np.isfinite(a)):
                raise EvaluationError("symbol is not finite on the evaluation grid")
            kern = np.exp(1j * np.outer(xb, xi))
            out[lo:hi] = (kern * a) @ fhat * w
    else:
        xpts = g.x_points().reshape(-1, 2)
        xipts = g.xi_points().reshape(-1, 2)
        fflat = fhat.reshape(-1)
        out = np.empty(len(xpts), dtype=complex)
        block = max(1, 2**22 // len(xipts))
        for lo in range(0, len(xpts), block):
            hi = min(lo + block, len(xpts))
            xb = xpts[lo:hi]
            a = np.asarray(symbol(xb[:, None, :], xipts[None, :, :]), dtype=complex)
            if not np.all(np.isfinite(a)):
                raise EvaluationError("symbol is not finite on the evaluation grid")
            kern = np.exp(1j * (xb @ xipts.T))
            out[lo:hi] = (kern * a) @ fflat * w
        out = out.reshape(g.n, g.n)

    return Field(g, out, "physical")


def operator_norm_bound(a, k: int, x_sample=None, xi_sample=None) -> float:
    """Empirical L2 operator-norm bound from weighted derivative suprema.

    ``a`` is a state-dependent symbol with ``deriv(x, xi, alpha, beta)`` and a
    coefficient field (see hoh.HohSymbol).  Returns the sup over the sample
    and all multi-index pairs with |alpha|, |beta| <= k of
    |xi|^{|alpha|} |d_x^beta d_xi^alpha a(x, xi)|; requires k > d/2.
    """
    from .symbols import multi_indices

    dim = a.coeff.dim
    if k <= dim / 2:
        raise ValueError("requires k > d/2")
    if x_sample is None:
        x_sample = np.linspace(-8.0, 8.0, 9)
    if xi_sample is None:
        xi_sample = np.concatenate([-np.logspace(-2, 2, 41)[::-1], np.logspace(-2, 2, 41)])
    r = np.abs(xi_sample) if np.ndim(xi_sample) == 1 else np.linalg.norm(xi_sample, axis=-1)
    best = 0.0
    for alpha in multi_indices(dim, k):
        for beta in multi_indices(dim, k):
            for x in np.atleast_1d(x_sample) if dim == 1 else x_sample:
                vals = np.abs(a.deriv(x, xi_sample, alpha, beta))
                best = max(best, float(np.max(r ** sum(alpha) * vals)))
    return best


# ---------------------------------------------------------------------------
# serialization

_BIN_MAGIC = b"LSF0"


def save_field_csv(f: Field, path):
    """Write a field as CSV with one index column per axis plus re, im."""
    g = f.grid
    with open(path, "w") as fh:
        if g.d == 1:
            fh.write("i (grid index), re (value), im (value)\n")
            for i, v in enumerate(f.values):
                fh.write(f"{i},{float(v.real)!r},{float(v.imag)!r}\n")
        else:
            fh.write("i (grid index), j (grid index), re (value), im (value)\n")
            for i in range(g.n):
                for j in range(g.n):
                    v = f.values[i, j]
                    fh.write(f"{i},{j},{float(v.real)!r},{float(v.imag)!r}\n")


def load_field_csv(path, grid: GridSpec, space: str = "physical") -> Field:
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    vals = np.empty((grid.n,) * grid.d, dtype=complex)
    if grid.d == 1:
        vals[data[:, 0].astype(int)] = data[:, 1] + 1j * data[:, 2]
    else:
        vals[data[:, 0].astype(int), data[:, 1].astype(int)] = data[:, 2] + 1j * data[:, 3]
    return Field(grid, vals, space)


def save_field_bin(f: Field, path):
    """Binary dump: header of little-endian float64 (d, n, L), then row-major
    interleaved (re, im) float64 pairs."""
    g = f.grid
    with open(path, "wb") as fh:
        fh.write(struct.pack("<3d", float(g.d), float(g.n), g.L))
        inter = np.empty(f.values.size * 2, dtype="<f8")
        flat = f.values.reshape(-1)
        inter[0::2] = flat.real
        inter[1::2] = flat.imag
        fh.write(inter.tobytes())


def load_field_bin(path, space: str = "physical") -> Field:
    with open(path, "rb") as fh:
        d, n, L = struct.unpack("<3d", fh.read(24))
        grid = GridSpec(int(d), L, int(n))
        inter = np.frombuffer(fh.read(), dtype="<f8")
    flat = inter[0::2] + 1j * inter[1::2]
    return Field(grid, flat.reshape((grid.n,) * grid.d), space)
