"""Catalog of Levy symbols (characteristic exponents).

Every symbol here is the exponent psi in  E[exp(i xi . L(t))] = exp(-t psi(xi)),
so psi(0) = 0 and Re psi >= 0 for all catalog entries.  Descriptors are
immutable and evaluation is deterministic and vectorized over frequencies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .errors import (
    DescriptorInvalidError,
    IntegrationFailureError,
    OriginSingularityError,
    UnsupportedOrderError,
)

# Derivative-order ceiling and relative finite-difference step.
K_MAX_DEFAULT = 4
FD_STEP_DEFAULT = 1e-5
ORIGIN_GUARD = 1e-8

CATALOG_KINDS = (
    "alpha_stable",
    "brownian",
    "meixner",
    "nig",
    "subordinated_drift",
    "levy_khintchine",
    "custom",
)


@dataclass(frozen=True)
class LevyTriplet:
    """Drift / Gaussian covariance / jump measure of a Levy exponent.

    The jump measure is either a finite list of (jump, rate) atoms or a scalar
    density on R \\ {0} truncated to |y| <= radius (densities are supported in
    one dimension only).
    """

    drift: np.ndarray
    diffusion: np.ndarray
    atoms: tuple = ()
    density: Optional[Callable[[np.ndarray], np.ndarray]] = None
    radius: float = 1.0

    def __post_init__(self):
        drift = np.atleast_1d(np.asarray(self.drift, dtype=float))
        object.__setattr__(self, "drift", drift)
        q = np.atleast_2d(np.asarray(self.diffusion, dtype=float))
        object.__setattr__(self, "diffusion", q)
        d = drift.shape[0]
        if q.shape != (d, d):
            raise DescriptorInvalidError(
                f"diffusion matrix shape {q.shape} does not match drift length {d}"
            )
        if not np.allclose(q, q.T, atol=1e-12):
            raise DescriptorInvalidError("diffusion matrix must be symmetric")
        if np.linalg.eigvalsh(q).min() < -1e-12:
            raise DescriptorInvalidError("diffusion matrix must be positive semidefinite")
        atoms = tuple(
            (np.atleast_1d(np.asarray(y, dtype=float)), float(rate)) for y, rate in self.atoms
        )
        for y, rate in atoms:
            if y.shape != (d,):
                raise DescriptorInvalidError("atom jump dimension mismatch")
            if rate < 0:
                raise DescriptorInvalidError("atom rates must be nonnegative")
        object.__setattr__(self, "atoms", atoms)
        if self.density is not None:
            if d != 1:
                raise DescriptorInvalidError("density-form jump measures are 1-d only")
            if self.radius <= 0:
                raise DescriptorInvalidError("density truncation radius must be positive")
            self._check_integrability()

    @property
    def dim(self) -> int:
        return self.drift.shape[0]

    def _check_integrability(self):
        # finite integral of |y|^2/(1+|y|^2) against the (truncated) density
        def weight(y):
            return y * y / (1.0 + y * y) * self.density(y)

        total = 0.0
        err = 0.0
        for lo, hi in ((-self.radius, 0.0), (0.0, self.radius)):
            val, e = integrate.quad(weight, lo, hi, limit=200)
            total += val
            err += e
        if not np.isfinite(total) or err > max(1e-6, 1e-6 * abs(total)):
            raise IntegrationFailureError(
                "jump-measure integrability check did not converge", residual=err
            )
        if total < 0:
            raise DescriptorInvalidError("jump density must be nonnegative")


@dataclass(frozen=True)
class SymbolDescriptor:
    """A named Levy symbol with parameters, evaluable at any frequency."""

    kind: str
    dim: int = 1
    alpha: float = 0.0
    m: float = 0.0
    delta: float = 0.0
    a: float = 0.0
    b: float = 0.0
    triplet: Optional[LevyTriplet] = None
    func: Optional[Callable] = None
    deriv: Optional[Callable] = None
    origin_singular: bool = False
    label: str = ""

    def __post_init__(self):
        if self.kind not in CATALOG_KINDS:
            raise DescriptorInvalidError(f"unknown symbol kind {self.kind!r}")
        if self.dim < 1:
            raise DescriptorInvalidError("dimension must be a positive integer")
        if self.kind == "alpha_stable" and not 0.0 < self.alpha < 2.0:
            raise DescriptorInvalidError("alpha_stable requires alpha in (0, 2)")
        if self.kind == "meixner":
            if self.delta <= 0 or self.a <= 0 or not -math.pi < self.b < math.pi:
                raise DescriptorInvalidError(
                    "meixner requires delta > 0, a > 0, b in (-pi, pi)"
                )
            if self.dim != 1:
                raise DescriptorInvalidError("meixner is 1-d only")
        if self.kind == "nig":
            if self.delta <= 0 or not 0.0 < abs(self.b) < self.a:
                raise DescriptorInvalidError("nig requires delta > 0 and 0 < |b| < a")
            if self.dim != 1:
                raise DescriptorInvalidError("nig is 1-d only")
        if self.kind == "subordinated_drift":
            if not 0.0 < self.alpha < 1.0:
                raise DescriptorInvalidError("subordinated_drift requires alpha in (0, 1)")
            if self.dim != 1:
                raise DescriptorInvalidError("subordinated_drift is 1-d only")
        if self.kind == "levy_khintchine" and self.triplet is None:
            raise DescriptorInvalidError("levy_khintchine requires a triplet")
        if self.kind == "custom" and self.func is None:
            raise DescriptorInvalidError("custom symbols require a callable")

    def __call__(self, xi):
        return eval_symbol(self, xi)

    @property
    def is_origin_singular(self) -> bool:
        if self.kind == "alpha_stable":
            return True
        if self.kind == "subordinated_drift":
            return True
        return self.origin_singular

    def name(self) -> str:
        if self.label:
            return self.label
        if self.kind == "alpha_stable":
            return f"alpha_stable({self.alpha})"
        if self.kind == "meixner":
            return f"meixner(m={self.m}, delta={self.delta}, a={self.a}, b={self.b})"
        if self.kind == "nig":
            return f"nig(m={self.m}, delta={self.delta}, a={self.a}, b={self.b})"
        if self.kind == "subordinated_drift":
            return f"subordinated_drift({self.alpha})"
        return self.kind


# ---------------------------------------------------------------------------
# constructors


def alpha_stable(alpha: float, dim: int = 1) -> SymbolDescriptor:
    """Symmetric stable exponent |xi|^alpha, alpha in (0, 2)."""
    return SymbolDescriptor(kind="alpha_stable", alpha=float(alpha), dim=dim)


def brownian(dim: int = 1) -> SymbolDescriptor:
    """Gaussian exponent |xi|^2."""
    return SymbolDescriptor(kind="brownian", dim=dim)


def meixner(m: float, delta: float, a: float, b: float) -> SymbolDescriptor:
    """Meixner exponent -i m xi + 2 delta (log cosh((a xi - i b)/2) - log cos(b/2))."""
    return SymbolDescriptor(
        kind="meixner", m=float(m), delta=float(delta), a=float(a), b=float(b)
    )


def nig(m: float, delta: float, a: float, b: float) -> SymbolDescriptor:
    """Normal-inverse-Gaussian exponent
    -i m xi + delta (sqrt(a^2 - (b + i xi)^2) - sqrt(a^2 - b^2))."""
    return SymbolDescriptor(
        kind="nig", m=float(m), delta=float(delta), a=float(a), b=float(b)
    )


def subordinated_drift(alpha: float) -> SymbolDescriptor:
    """Fractional power (i xi)^alpha of the pure-drift exponent, principal branch."""
    return SymbolDescriptor(kind="subordinated_drift", alpha=float(alpha))


def levy_khintchine(triplet: LevyTriplet) -> SymbolDescriptor:
    """Exponent computed from a (drift, diffusion, jump-measure) triplet."""
    return SymbolDescriptor(kind="levy_khintchine", dim=triplet.dim, triplet=triplet)


def custom(
    func: Callable,
    dim: int = 1,
    deriv: Optional[Callable] = None,
    origin_singular: bool = False,
    label: str = "custom",
) -> SymbolDescriptor:
    """Wrap an arbitrary callable xi -> complex as a symbol descriptor.

    ``deriv(xi, alpha)``, when given, supplies closed-form partial derivatives
    for the multi-index ``alpha``; otherwise finite differences are used.
    """
    return SymbolDescriptor(
        kind="custom",
        dim=dim,
        func=func,
        deriv=deriv,
        origin_singular=origin_singular,
        label=label,
    )


def drift_descriptor() -> SymbolDescriptor:
    """The 1-d pure-drift exponent psi(xi) = i xi (non-sectorial)."""
    return levy_khintchine(LevyTriplet(drift=[-1.0], diffusion=[[0.0]]))


def power_symbol(p: float, dim: int = 1) -> SymbolDescriptor:
    """|xi|^p as a descriptor: stable for p < 2, Gaussian at p = 2."""
    if p == 2.0:
        return brownian(dim)
    return alpha_stable(p, dim)


def bessel_power(p: float) -> SymbolDescriptor:
    """Multiplier symbol (1 + |xi|^2)^{p/2} (not a Levy exponent: value 1 at 0)."""

    def f(xi):
        xi = np.asarray(xi, dtype=float)
        return ((1.0 + xi * xi) ** (p / 2.0)).astype(complex)

    def d(xi, alpha):
        k = alpha[0]
        xi = np.asarray(xi, dtype=float)
        br = 1.0 + xi * xi
        if k == 0:
            return f(xi)
        if k == 1:
            return (p * xi * br ** ((p - 2.0) / 2.0)).astype(complex)
        if k == 2:
            return (
                p * br ** ((p - 2.0) / 2.0)
                + p * (p - 2.0) * xi * xi * br ** ((p - 4.0) / 2.0)
            ).astype(complex)
        return NotImplemented

    return custom(f, deriv=d, label=f"bessel_power({p})")


def constant_one() -> SymbolDescriptor:
    """The identity multiplier q(xi) = 1."""

    def f(xi):
        return np.ones_like(np.asarray(xi, dtype=float), dtype=complex)

    def d(xi, alpha):
        if sum(alpha) == 0:
            return f(xi)
        return np.zeros_like(np.asarray(xi, dtype=float), dtype=complex)

    return custom(f, deriv=d, label="one")


# ---------------------------------------------------------------------------
# evaluation


def _as_points(xi, dim: int) -> tuple[np.ndarray, tuple]:
    """Normalize frequency input to shape (npoints, dim); return it + original shape."""
    arr = np.asarray(xi, dtype=float)
    if dim == 1:
        shape = arr.shape
        return arr.reshape(-1, 1), shape
    if arr.ndim == 1 and arr.shape == (dim,):
        return arr.reshape(1, dim), ()
    if arr.shape[-1] != dim:
        raise ValueError(f"frequency array last axis must have length {dim}")
    return arr.reshape(-1, dim), arr.shape[:-1]


def eval_symbol(desc: SymbolDescriptor, xi) -> np.ndarray | complex:
    """Evaluate psi(xi).

    Accepts scalars or arrays; for dim >= 2 the last axis indexes components.
    Returns complex values with the same leading shape as the input.
    """
    pts, shape = _as_points(xi, desc.dim)
    if not np.all(np.isfinite(pts)):
        raise ValueError("frequencies must be finite")
    vals = _eval_points(desc, pts)
    if shape == ():
        return complex(vals[0])
    return vals.reshape(shape)


def _eval_points(desc: SymbolDescriptor, pts: np.ndarray) -> np.ndarray:
    r = np.linalg.norm(pts, axis=-1)
    if desc.kind == "alpha_stable":
        return r.astype(complex) ** desc.alpha
    if desc.kind == "brownian":
        return (r * r).astype(complex)
    if desc.kind == "meixner":
        x = pts[:, 0]
        z = (desc.a * x - 1j * desc.b) / 2.0
        # constant term evaluated through the same path so psi(0) = 0 exactly
        offset = _log_cosh(np.array([-1j * desc.b / 2.0]))[0]
        return -1j * desc.m * x + 2.0 * desc.delta * (_log_cosh(z) - offset)
    if desc.kind == "nig":
        x = pts[:, 0]
        root = np.sqrt(desc.a**2 - (desc.b + 1j * x) ** 2)
        return -1j * desc.m * x + desc.delta * (root - math.sqrt(desc.a**2 - desc.b**2))
    if desc.kind == "subordinated_drift":
        x = pts[:, 0]
        return _principal_power(1j * x, desc.alpha)
    if desc.kind == "levy_khintchine":
        return np.array([levy_khintchine_eval(desc.triplet, p) for p in pts])
    if desc.kind == "custom":
        arg = pts[:, 0] if desc.dim == 1 else pts
        return np.asarray(desc.func(arg), dtype=complex).reshape(len(pts))
    raise DescriptorInvalidError(f"unknown kind {desc.kind!r}")


def _log_cosh(z: np.ndarray) -> np.ndarray:
    # log cosh(z) = |Re z| - log 2 + log1p(exp(-2|Re z|) adjusted), overflow-safe
    zr = np.real(z)
    sign = np.where(zr >= 0, 1.0, -1.0)
    zs = z * sign  # Re zs >= 0
    return zs + np.log1p(np.exp(-2.0 * zs)) - math.log(2.0)


def _principal_power(z: np.ndarray, p: float) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    out = np.zeros_like(z)
    nz = z != 0
    out[nz] = np.exp(p * np.log(z[nz]))
    return out


# ---------------------------------------------------------------------------
# derivatives


def multi_indices(dim: int, max_order: int) -> list[tuple[int, ...]]:
    """All derivative multi-indices of length dim with total order <= max_order."""
    if dim == 1:
        return [(o,) for o in range(max_order + 1)]
    out = []
    for total in range(max_order + 1):
        for first in range(total + 1):
            out.append((first, total - first))
    return out


def _normalize_multi_index(alpha, dim: int) -> tuple[int, ...]:
    if np.isscalar(alpha):
        alpha = (int(alpha),)
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != dim:
        raise ValueError(f"multi-index length {len(alpha)} does not match dim {dim}")
    if any(a < 0 for a in alpha):
        raise ValueError("multi-index entries must be nonnegative")
    return alpha


def symbol_derivative(
    desc: SymbolDescriptor,
    xi,
    alpha,
    k_max: int = K_MAX_DEFAULT,
    fd_step: float = FD_STEP_DEFAULT,
):
    """Partial derivative d^alpha psi(xi) for a multi-index alpha.

    Uses the closed form where one exists and central finite differences with
    relative step ``fd_step * max(|xi|, 1)`` otherwise.  Origin-singular
    symbols refuse |xi| < 1e-8.
    """
    alpha = _normalize_multi_index(alpha, desc.dim)
    order = sum(alpha)
    if order > k_max:
        raise UnsupportedOrderError(f"derivative order {order} exceeds k_max={k_max}")
    pts, shape = _as_points(xi, desc.dim)
    if order == 0:
        vals = _eval_points(desc, pts)
    else:
        if desc.is_origin_singular:
            r = np.linalg.norm(pts, axis=-1)
            if np.any(r < ORIGIN_GUARD):
                raise OriginSingularityError(
                    f"derivative of origin-singular symbol inside |xi| < {ORIGIN_GUARD}"
                )
        closed = _closed_form_derivative(desc, pts, alpha)
        if closed is not None:
            vals = closed
        else:
            vals = np.array(
                [_fd_derivative(desc, p, alpha, fd_step) for p in pts], dtype=complex
            )
    if shape == ():
        return complex(vals[0])
    return vals.reshape(shape)


def _falling(p: float, k: int) -> float:
    out = 1.0
    for j in range(k):
        out *= p - j
    return out


def _closed_form_derivative(desc, pts, alpha) -> Optional[np.ndarray]:
    order = sum(alpha)
    d = desc.dim
    r = np.linalg.norm(pts, axis=-1)
    if desc.kind == "brownian":
        if order == 1:
            i = alpha.index(1)
            return 2.0 * pts[:, i].astype(complex)
        if order == 2:
            if 2 in alpha:
                return np.full(len(pts), 2.0, dtype=complex)
            return np.zeros(len(pts), dtype=complex)
        if order > 2:
            return np.zeros(len(pts), dtype=complex)
        return None
    if desc.kind == "alpha_stable":
        p = desc.alpha
        if d == 1:
            k = alpha[0]
            s = np.sign(pts[:, 0])
            return (_falling(p, k) * r ** (p - k) * s**k).astype(complex)
        if order == 1:
            i = alpha.index(1)
            return (p * pts[:, i] * r ** (p - 2)).astype(complex)
        if order == 2:
            i = next(idx for idx, a in enumerate(alpha) if a > 0)
            j = i if alpha[i] == 2 else next(idx for idx in range(i + 1, d) if alpha[idx] > 0)
            kron = 1.0 if i == j else 0.0
            return (
                p * (kron * r ** (p - 2) + (p - 2) * pts[:, i] * pts[:, j] * r ** (p - 4))
            ).astype(complex)
        return None
    if desc.kind == "subordinated_drift":
        k = alpha[0]
        p = desc.alpha
        return (1j**k) * _falling(p, k) * _principal_power(1j * pts[:, 0], p - k)
    if desc.kind == "meixner" and order <= 2:
        x = pts[:, 0]
        z = (desc.a * x - 1j * desc.b) / 2.0
        if order == 1:
            return -1j * desc.m + desc.delta * desc.a * np.tanh(z)
        return desc.delta * desc.a**2 / 2.0 / np.cosh(z) ** 2
    if desc.kind == "nig" and order <= 2:
        x = pts[:, 0]
        w = desc.b + 1j * x
        root = np.sqrt(desc.a**2 - w**2)
        if order == 1:
            return -1j * desc.m - 1j * desc.delta * w / root
        return desc.delta * (1.0 / root + w**2 / root**3)
    if desc.kind == "custom" and desc.deriv is not None:
        arg = pts[:, 0] if d == 1 else pts
        out = desc.deriv(arg, alpha)
        if out is NotImplemented:
            return None
        return np.asarray(out, dtype=complex).reshape(len(pts))
    return None


def _fd_derivative(desc, point: np.ndarray, alpha, fd_step: float) -> complex:
    """Nested central differences along each axis of the multi-index.

    The step grows with the total order (roundoff floor scales as
    eps / h^order, so the optimal step is about eps^(1/(order+2))).
    """
    order = sum(alpha)
    step = max(fd_step, float(np.finfo(float).eps) ** (1.0 / (order + 2.0)))
    h = step * max(float(np.linalg.norm(point)), 1.0)

    def rec(p, a):
        for axis in range(len(a)):
            if a[axis] > 0:
                lower = tuple(v - (1 if i == axis else 0) for i, v in enumerate(a))
                step = np.zeros_like(p)
                step[axis] = h
                return (rec(p + step, lower) - rec(p - step, lower)) / (2.0 * h)
        return _eval_points(desc, p.reshape(1, -1))[0]

    return complex(rec(point.astype(float), tuple(alpha)))


def richardson_derivative(
    desc: SymbolDescriptor, xi, alpha, h0: float = 1e-4
) -> complex:
    """Richardson-extrapolated central difference (independent oracle).

    Combines steps h0 and h0/2 to cancel the leading O(h^2) error of the
    nested central-difference stencil.
    """
    alpha = _normalize_multi_index(alpha, desc.dim)
    pts, _ = _as_points(xi, desc.dim)
    point = pts[0]
    d1 = _fd_derivative(desc, point, alpha, h0)
    d2 = _fd_derivative(desc, point, alpha, h0 / 2.0)
    return (4.0 * d2 - d1) / 3.0


# ---------------------------------------------------------------------------
# Levy-Khintchine quadrature

QUAD_ABS_TOL = 1e-9


def levy_khintchine_eval(triplet: LevyTriplet, xi) -> complex:
    """Evaluate the triplet's exponent at a single frequency.

    psi(xi) = -i l.xi + (1/2) xi.Q.xi - sum/integral of
    (exp(i xi.y) - 1 - i xi.y [|y|<=1]) against the jump measure; atoms are
    summed exactly, densities integrated adaptively with the compensator
    applied inside the unit ball only.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    d = triplet.dim
    if xi.shape != (d,):
        raise ValueError(f"expected frequency of length {d}")
    val = -1j * float(triplet.drift @ xi) + 0.5 * float(xi @ triplet.diffusion @ xi)
    for y, rate in triplet.atoms:
        phase = np.exp(1j * float(xi @ y)) - 1.0
        if np.linalg.norm(y) <= 1.0:
            phase -= 1j * float(xi @ y)
        val -= rate * phase
    if triplet.density is not None:
        val -= _density_integral(triplet, float(xi[0]))
    return complex(val)


def _density_integral(triplet: LevyTriplet, xi: float) -> complex:
    nu = triplet.density
    R = triplet.radius
    inner_hi = min(1.0, R)

    def inner(y):
        return (np.exp(1j * xi * y) - 1.0 - 1j * xi * y) * nu(y)

    def outer(y):
        return (np.exp(1j * xi * y) - 1.0) * nu(y)

    pieces = [(inner, -inner_hi, 0.0), (inner, 0.0, inner_hi)]
    if R > 1.0:
        pieces += [(outer, -R, -1.0), (outer, 1.0, R)]

    total = 0.0 + 0.0j
    residual = 0.0
    for f, lo, hi in pieces:
        for part in (np.real, np.imag):
            val, err = integrate.quad(
                lambda y: part(f(y)), lo, hi, epsabs=QUAD_ABS_TOL, limit=400
            )
            total += val if part is np.real else 1j * val
            residual += err
    if residual > 1e-6:
        raise IntegrationFailureError(
            "jump-measure quadrature did not converge", residual=residual
        )
    return total


# ---------------------------------------------------------------------------
# subordination


def subordinate(desc: SymbolDescriptor, alpha: float) -> SymbolDescriptor:
    """Apply the Bernstein function s -> s^alpha to the pure-drift exponent.

    Only the 1-d drift symbol psi(xi) = i xi is accepted; the result is the
    sectorial exponent (i xi)^alpha on the principal branch.
    """
    if not 0.0 < alpha < 1.0:
        raise DescriptorInvalidError("subordination exponent must lie in (0, 1)")
    if desc.dim != 1:
        raise DescriptorInvalidError("subordination is implemented for d = 1 only")
    for probe in (1.0, 2.0, -0.5):
        got = eval_symbol(desc, probe)
        if abs(got - 1j * probe) > 1e-10:
            raise DescriptorInvalidError(
                "subordination requires the drift symbol psi(xi) = i xi"
            )
    return subordinated_drift(alpha)
