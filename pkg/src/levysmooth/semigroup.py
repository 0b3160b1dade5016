"""Three engines for exp(-t psi(sigma D)) u and the resolvent (lambda + psi(sigma D))^{-1} u.

* multiplier engine: exact Fourier multiplier, the reference path;
* contour engine: quadrature of the resolvent integral over two truncated
  rays at angles +-(pi/2 + theta') plus an arc of radius rho, composite
  Simpson on geometric radial nodes, certified by node doubling;
* Monte Carlo engine: Euler paths with exact-in-law per-step increments and
  counter-based per-chunk random streams, so results do not depend on the
  execution schedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import (
    DescriptorInvalidError,
    InstabilityError,
    NearSpectrumError,
    QuadratureConvergenceError,
)
from .hoh import CoefficientField
from .spectral import Field, GridSpec, apply_multiplier
from .symbols import SymbolDescriptor, eval_symbol

RE_FLOOR = 1e-12
SPECTRUM_MARGIN = 1e-10
MC_CHUNK = 8192
EXPLOSION_BOUND = 1e12


def _grid_symbol(psi: SymbolDescriptor, sigma_const: float, grid: GridSpec) -> np.ndarray:
    pts = grid.xi_points()
    return np.asarray(eval_symbol(psi, sigma_const * pts))


def multiplier_semigroup(
    psi: SymbolDescriptor, sigma_const: float, t: float, u: Field
) -> Field:
    """Apply exp(-t psi(sigma xi)) as a Fourier multiplier (exact engine)."""
    if t < 0:
        raise ValueError("time must be nonnegative")
    vals = _grid_symbol(psi, sigma_const, u.grid)
    if np.min(vals.real) < -RE_FLOOR:
        raise InstabilityError(
            f"symbol has a growth mode: min Re psi = {vals.real.min():.3e}"
        )
    return apply_multiplier(np.exp(-t * vals), u)


def resolvent_apply(
    psi: SymbolDescriptor, sigma_const: float, lam: complex, u: Field
) -> Field:
    """Apply (lambda + psi(sigma D))^{-1} as a Fourier multiplier.

    ``lam`` must keep a margin of at least 1e-10 from the closed range of
    -psi on the grid.
    """
    vals = _grid_symbol(psi, sigma_const, u.grid)
    den = lam + vals
    dist = float(np.min(np.abs(den)))
    if dist < SPECTRUM_MARGIN:
        raise NearSpectrumError(
            f"lambda = {lam} is within {dist:.3e} of the grid spectrum"
        )
    return apply_multiplier(1.0 / den, u)


# ---------------------------------------------------------------------------
# contour engine


@dataclass(frozen=True)
class ContourSpec:
    """Ray-arc contour parameters for the resolvent integral.

    ``theta_prime`` is the ray elevation above the imaginary axis; it must
    stay below the analyticity half-angle pi/2 - arctan(kappa) of the symbol
    so the rays remain inside the resolvent domain.  Unset entries take
    engine defaults (theta_prime: half the analyticity angle, rho = 1/t,
    r_max from |exp(lambda t)| < 1e-16).
    """

    theta_prime: Optional[float] = None
    rho: Optional[float] = None
    r_max: Optional[float] = None
    n_ray: int = 200
    n_arc: int = 64
    omega_shift: float = 0.0


def _simpson_nodes(lo: float, hi: float, n_intervals: int) -> tuple[np.ndarray, np.ndarray]:
    n = n_intervals + n_intervals % 2  # composite Simpson needs an even count
    v = np.linspace(lo, hi, n + 1)
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    w *= (hi - lo) / n / 3.0
    return v, w


def _contour_multiplier(
    psi_vals: np.ndarray,
    t: float,
    theta_prime: float,
    rho: float,
    r_max: float,
    n_ray: int,
    n_arc: int,
    omega: float,
) -> np.ndarray:
    """Quadrature of (1/2 pi i) contour integral of e^{lambda t}/(lambda + psi)."""
    phi0 = math.pi / 2.0 + theta_prime
    flat = psi_vals.reshape(-1)

    lam_nodes = []
    dlam_w = []

    # rays, geometric radial nodes: composite Simpson in v = log r
    v, w = _simpson_nodes(math.log(rho), math.log(r_max), n_ray)
    r = np.exp(v)
    for sgn in (+1.0, -1.0):
        e = np.exp(sgn * 1j * phi0)
        lam_nodes.append(omega + r * e)
        dlam_w.append(sgn * w * r * e)  # dr = r dv; lower ray runs inward

    # arc of radius rho
    p, wp = _simpson_nodes(-phi0, phi0, n_arc)
    lam_nodes.append(omega + rho * np.exp(1j * p))
    dlam_w.append(wp * 1j * rho * np.exp(1j * p))

    lam = np.concatenate(lam_nodes)
    wts = np.concatenate(dlam_w)

    den = lam[:, None] + flat[None, :]
    if float(np.min(np.abs(den))) < 1e-12:
        raise NearSpectrumError("contour node collides with the grid spectrum")
    acc = (wts * np.exp(lam * t)) @ (1.0 / den)
    return (acc / (2j * math.pi)).reshape(psi_vals.shape)


def contour_semigroup(
    psi: SymbolDescriptor,
    sigma_const: float,
    B_mult,
    t: float,
    u: Field,
    spec: ContourSpec = ContourSpec(),
    return_diagnostics: bool = False,
):
    """Semigroup application through the resolvent contour integral.

    ``B_mult`` is a frequency multiplier applied alongside (callable or grid
    array), or ``None`` for the identity.  The quadrature runs at the
    requested node counts and at twice as many; the doubled result is
    returned and the disagreement is the convergence residual (error above
    1e-6 raises :class:`QuadratureConvergenceError`).
    """
    if t <= 0:
        raise ValueError("contour engine requires t > 0")
    g = u.grid
    psi_vals = _grid_symbol(psi, sigma_const, g)
    if np.min(psi_vals.real) < -RE_FLOOR:
        raise InstabilityError("symbol has a growth mode on the grid")

    re = psi_vals.real
    im = psi_vals.imag
    if np.any((re <= RE_FLOOR) & (np.abs(im) > 1e-8)):
        raise InstabilityError("symbol range is not sectorial on the grid")
    kappa = float(np.max(np.abs(im) / np.maximum(re, RE_FLOOR)))
    angle = math.pi / 2.0 - math.atan(kappa)

    theta_prime = spec.theta_prime if spec.theta_prime is not None else angle / 2.0
    if not 0.0 < theta_prime < angle:
        raise ValueError(
            f"theta_prime must lie in (0, {angle:.4f}) for this symbol"
        )
    rho = spec.rho if spec.rho is not None else 1.0 / t
    r_max = spec.r_max if spec.r_max is not None else 37.0 / (t * math.sin(theta_prime))
    r_max = max(r_max, 4.0 * rho)

    coarse = _contour_multiplier(
        psi_vals, t, theta_prime, rho, r_max, spec.n_ray, spec.n_arc, spec.omega_shift
    )
    fine = _contour_multiplier(
        psi_vals, t, theta_prime, rho, r_max, 2 * spec.n_ray, 2 * spec.n_arc, spec.omega_shift
    )
    residual = float(np.max(np.abs(fine - coarse)))
    if residual > 1e-6:
        raise QuadratureConvergenceError(
            f"contour quadrature did not converge (doubling residual {residual:.3e})",
            residual=residual,
        )

    mult = fine
    if B_mult is not None:
        bv = B_mult if isinstance(B_mult, np.ndarray) else np.asarray(
            B_mult(g.xi_points()), dtype=complex
        )
        mult = mult * bv
    out = apply_multiplier(mult, u)
    if return_diagnostics:
        return out, {
            "residual": residual,
            "theta_prime": theta_prime,
            "rho": rho,
            "r_max": r_max,
            "kappa": kappa,
        }
    return out


# ---------------------------------------------------------------------------
# Monte Carlo engine

MC_DRIVERS = ("alpha_stable", "nig", "brownian")


@dataclass(frozen=True)
class SdeSpec:
    """Driver, coefficients, step, path count, and seed of an Euler run."""

    driver: SymbolDescriptor
    coeff: CoefficientField
    step: float
    paths: int
    seed: int

    def __post_init__(self):
        if self.driver.kind not in MC_DRIVERS:
            raise DescriptorInvalidError(
                f"driver kind {self.driver.kind!r} has no exact sampler; "
                f"supported: {MC_DRIVERS}"
            )
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.paths < 1:
            raise ValueError("at least one path is required")


def _chunk_rng(seed: int, chunk_index: int) -> np.random.Generator:
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64(chunk_index)])
    return np.random.Generator(np.random.Philox(key=key))


def sample_increment(driver: SymbolDescriptor, h: float, rng: np.random.Generator, size=1):
    """Draw increments distributed exactly as L(h) for the given driver.

    Brownian: normal with variance 2h per coordinate.  Symmetric stable:
    Chambers-Mallows-Stuck construction scaled so E exp(i xi L(h)) equals
    exp(-h |xi|^alpha).  NIG: normal mixed over an inverse-Gaussian
    subordinator matching the catalog exponent.
    """
    if h <= 0:
        raise ValueError("step must be positive")
    if driver.kind == "brownian":
        if driver.dim == 1:
            return rng.normal(0.0, math.sqrt(2.0 * h), size=size)
        return rng.normal(0.0, math.sqrt(2.0 * h), size=tuple(np.atleast_1d(size)) + (driver.dim,))
    if driver.kind == "alpha_stable":
        a = driver.alpha
        phi = rng.uniform(-math.pi / 2.0, math.pi / 2.0, size=size)
        if a == 1.0:
            s = np.tan(phi)
        else:
            w = rng.exponential(1.0, size=size)
            s = (
                np.sin(a * phi)
                / np.cos(phi) ** (1.0 / a)
                * (np.cos((1.0 - a) * phi) / w) ** ((1.0 - a) / a)
            )
        return h ** (1.0 / a) * s
    if driver.kind == "nig":
        gamma = math.sqrt(driver.a**2 - driver.b**2)
        dh = h * driver.delta
        v = rng.wald(dh / gamma, dh**2, size=size)
        z = rng.normal(0.0, 1.0, size=size)
        return h * driver.m + driver.b * v + np.sqrt(v) * z
    raise DescriptorInvalidError(f"no sampler for driver kind {driver.kind!r}")


def _euler_paths(sde: SdeSpec, x0: np.ndarray, n_steps: int, chunk_order=None):
    """Yield (chunk_index, X, alive) for fixed-size path chunks.

    Chunk -> stream assignment is fixed by (seed, chunk index), so any
    processing order gives identical numbers.
    """
    n_chunks = (sde.paths + MC_CHUNK - 1) // MC_CHUNK
    order = range(n_chunks) if chunk_order is None else chunk_order
    for ci in order:
        size = min(MC_CHUNK, sde.paths - ci * MC_CHUNK)
        rng = _chunk_rng(sde.seed, ci)
        x = np.broadcast_to(x0, (size, len(x0))).astype(float).copy()
        alive = np.ones((size, len(x0)), dtype=bool)
        for _ in range(n_steps):
            dl = sample_increment(sde.driver, sde.step, rng, size=size)
            x = x + sde.coeff.sigma_at(x) * dl[:, None]
            exploded = np.abs(x) > EXPLOSION_BOUND
            alive &= ~exploded
            x = np.where(exploded, 0.0, x)
        yield ci, x, alive


@dataclass
class McResult:
    """Per-point Monte Carlo estimates of (P_t f)(x)."""

    x: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    n_excluded: np.ndarray
    t: float
    paths: int


def mc_semigroup(
    sde: SdeSpec, f: Callable, t: float, x_grid, chunk_order=None
) -> McResult:
    """Estimate (P_t f)(x) = E f(X^x(t)) by Euler simulation over M paths.

    ``t`` must be an integer multiple of the step.  Exploded paths
    (|X| > 1e12) are excluded and counted.  The combined standard error is
    sqrt((Var Re f + Var Im f) / M).
    """
    x_grid = np.atleast_1d(np.asarray(x_grid, dtype=float))
    n_steps = int(round(t / sde.step))
    if abs(n_steps * sde.step - t) > 1e-12 * max(1.0, t):
        raise ValueError("t must be an integer multiple of the step")
    if t > 0 and sde.paths < 1000:
        raise ValueError("statistical outputs need at least 1000 paths")
    if t == 0:
        vals = np.asarray(f(x_grid), dtype=complex)
        return McResult(
            x=x_grid, mean=vals, stderr=np.zeros(len(x_grid)),
            n_excluded=np.zeros(len(x_grid), dtype=int), t=0.0, paths=sde.paths,
        )

    partials = {}
    for ci, x, alive in _euler_paths(sde, x_grid, n_steps, chunk_order):
        fx = np.asarray(f(x), dtype=complex)
        fx = np.where(alive, fx, 0.0)
        partials[ci] = (
            fx.sum(axis=0),
            (fx.real**2).sum(axis=0), (fx.imag**2).sum(axis=0),
            alive.sum(axis=0),
        )

    s1 = np.zeros(len(x_grid), dtype=complex)
    s2r = np.zeros(len(x_grid))
    s2i = np.zeros(len(x_grid))
    kept = np.zeros(len(x_grid), dtype=int)
    for ci in sorted(partials):
        a, br, bi, n = partials[ci]
        s1 += a
        s2r += br
        s2i += bi
        kept += n

    kept_safe = np.maximum(kept, 1)
    mean = s1 / kept_safe
    var = (s2r / kept_safe - mean.real**2) + (s2i / kept_safe - mean.imag**2)
    stderr = np.sqrt(np.maximum(var, 0.0) / kept_safe)
    return McResult(
        x=x_grid, mean=mean, stderr=stderr,
        n_excluded=(sde.paths - kept).astype(int), t=t, paths=sde.paths,
    )


def mc_symbol_extraction(
    sde: SdeSpec, x: float, xi_set, t_small: float
) -> tuple[np.ndarray, np.ndarray]:
    """Estimate the generator symbol from short-time increments.

    Returns, per frequency, -(1/t)(E exp(i (X^x(t) - x) xi) - 1) together with
    its standard error.  The estimator carries an O(t) bias on top of the
    O(M^{-1/2}/t) Monte Carlo error.
    """
    xi_set = np.atleast_1d(np.asarray(xi_set, dtype=float))
    n_steps = int(round(t_small / sde.step))
    if abs(n_steps * sde.step - t_small) > 1e-12:
        raise ValueError("t_small must be an integer multiple of the step")
    if t_small > 0.01 + 1e-15:
        raise ValueError("extraction horizon must satisfy t_small <= 0.01")
    if sde.paths < 100000:
        raise ValueError("symbol extraction needs at least 1e5 paths")

    s1 = np.zeros(len(xi_set), dtype=complex)
    s2r = np.zeros(len(xi_set))
    s2i = np.zeros(len(xi_set))
    kept = 0
    for ci, xv, alive in _euler_paths(sde, np.array([x]), n_steps):
        ph = np.exp(1j * (xv[:, 0] - x)[:, None] * xi_set[None, :])
        ph = np.where(alive[:, [0]], ph, 0.0)
        s1 += ph.sum(axis=0)
        s2r += (ph.real**2).sum(axis=0)
        s2i += (ph.imag**2).sum(axis=0)
        kept += int(alive[:, 0].sum())

    mean = s1 / max(kept, 1)
    var = (s2r / max(kept, 1) - mean.real**2) + (s2i / max(kept, 1) - mean.imag**2)
    stderr_phase = np.sqrt(np.maximum(var, 0.0) / max(kept, 1))
    est = -(mean - 1.0) / t_small
    return est, stderr_phase / t_small
