"""Numerical classification of Levy symbols.

Growth-index estimation replaces the defining |xi| -> infinity limits with
log-log regressions over a declared fit window; upper/lower variants regress
through dyadic-block maxima/minima.  Sector classification takes the supremum
of |Im psi| / Re psi over a caller-supplied frequency sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .hoh import HohSymbol
from .symbols import SymbolDescriptor, eval_symbol, multi_indices, symbol_derivative

RE_FLOOR = 1e-12
IM_FLOOR = 1e-8
DEGENERATE_FLOOR = 1e-14


def _directions(dim: int, n_directions: int = 8) -> np.ndarray:
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    ang = 2.0 * np.pi * np.arange(n_directions) / n_directions
    return np.stack([np.cos(ang), np.sin(ang)], axis=-1)


@dataclass
class IndexReport:
    """Estimated growth indices of a symbol over a fit window."""

    order_k: int
    per_alpha: list  # (alpha, fitted exponent lambda_alpha, fit residual)
    s: float
    s_plus: float
    s_minus: float
    fit_window: tuple
    residuals: dict
    direction_spread: float

    def reliable(self, residual_ceiling: float = 0.1) -> bool:
        return all(res <= residual_ceiling for _, _, res in self.per_alpha if math.isfinite(res))


def _loglog_fit(logr: np.ndarray, logv: np.ndarray) -> tuple[float, float]:
    slope, intercept = np.polyfit(logr, logv, 1)
    resid = logv - (slope * logr + intercept)
    return float(slope), float(np.sqrt(np.mean(resid**2)))


def estimate_bg_index(
    desc: SymbolDescriptor,
    k: int = 0,
    window: tuple = (1e2, 1e5),
    n_points: int = 64,
    n_directions: int = 8,
) -> IndexReport:
    """Estimate the growth index of order k by log-log regression.

    For every multi-index |alpha| <= k the slope of log |d^alpha psi| against
    log |xi| is fitted over log-spaced radii and a fixed direction set; the
    reported index is the maximum of slope + |alpha|.  The upper (lower)
    variant regresses through dyadic-block maxima (minima) of
    |d^alpha psi| |xi|^{|alpha|}.
    """
    lo, hi = window
    if not hi > lo >= 1.0:
        raise ValueError("fit window must satisfy hi > lo >= 1")
    radii = np.logspace(math.log10(lo), math.log10(hi), n_points)
    dirs = _directions(desc.dim, n_directions)
    logr = np.log(radii)

    blocks = np.floor(np.log2(radii)).astype(int)
    block_ids = np.unique(blocks)

    per_alpha = []
    residuals = {}
    s_vals, sp_vals, sm_vals = [], [], []
    spread = 0.0
    for alpha in multi_indices(desc.dim, k):
        order = sum(alpha)
        vals = np.empty((len(radii), len(dirs)))
        for j, u in enumerate(dirs):
            pts = radii[:, None] * u[None, :]
            pts_in = pts[:, 0] if desc.dim == 1 else pts
            vals[:, j] = np.abs(symbol_derivative(desc, pts_in, alpha, k_max=max(k, 2)))
        if np.all(vals < DEGENERATE_FLOOR):
            per_alpha.append((alpha, -math.inf, 0.0))
            residuals[alpha] = 0.0
            continue
        mean_v = np.maximum(vals.mean(axis=1), 1e-300)
        slope, resid = _loglog_fit(logr, np.log(mean_v))
        lam = slope + order
        per_alpha.append((alpha, lam, resid))
        residuals[alpha] = resid
        s_vals.append(lam)

        per_dir_slopes = [
            _loglog_fit(logr, np.log(np.maximum(vals[:, j], 1e-300)))[0] + order
            for j in range(len(dirs))
        ]
        spread = max(spread, float(np.ptp(per_dir_slopes)))

        g = np.maximum(vals.max(axis=1) * radii**order, 1e-300)
        gmin = np.maximum(vals.min(axis=1) * radii**order, 1e-300)
        bmax_r, bmax_v, bmin_v = [], [], []
        for b in block_ids:
            sel = blocks == b
            bmax_r.append(np.exp(logr[sel].mean()))
            bmax_v.append(g[sel].max())
            bmin_v.append(gmin[sel].min())
        sp, _ = _loglog_fit(np.log(bmax_r), np.log(bmax_v))
        sm, _ = _loglog_fit(np.log(bmax_r), np.log(bmin_v))
        sp_vals.append(sp)
        sm_vals.append(sm)

    s = max(s_vals) if s_vals else -math.inf
    s_plus = max(sp_vals) if sp_vals else -math.inf
    s_minus = max(sm_vals) if sm_vals else -math.inf
    return IndexReport(
        order_k=k,
        per_alpha=per_alpha,
        s=s,
        s_plus=s_plus,
        s_minus=s_minus,
        fit_window=(lo, hi),
        residuals=residuals,
        direction_spread=spread,
    )


@dataclass
class SectorReport:
    """Sector classification of a symbol over a frequency sample."""

    kappa: Optional[float]
    theta: Optional[float]
    omega: float
    sectorial: bool
    grid_description: str

    @property
    def semigroup_angle(self) -> Optional[float]:
        """Analyticity half-angle pi/2 - arctan(kappa) available for contours."""
        if not self.sectorial:
            return None
        return math.pi / 2.0 - math.atan(self.kappa)


def default_sector_sample(dim: int = 1, lo: float = 1e2, hi: float = 1e5, n: int = 257) -> np.ndarray:
    """Asymptotic (large-|xi|) sample used for sector estimates."""
    radii = np.logspace(math.log10(lo), math.log10(hi), n)
    dirs = _directions(dim)
    pts = radii[:, None, None] * dirs[None, :, :]
    pts = pts.reshape(-1, dim)
    return pts[:, 0] if dim == 1 else pts


def sector_kappa(desc: SymbolDescriptor, sample) -> SectorReport:
    """Estimate the sector ratio kappa = sup |Im psi| / Re psi over a sample.

    Flags the symbol non-sectorial when the real part sits at the floor while
    the imaginary part does not; otherwise theta = arctan(kappa) exactly.
    """
    sample = np.asarray(sample, dtype=float)
    radii = np.abs(sample) if desc.dim == 1 else np.linalg.norm(sample, axis=-1)
    if np.any(radii == 0.0):
        raise ValueError("sector sample must exclude xi = 0")
    vals = np.asarray(eval_symbol(desc, sample))
    re = np.real(vals)
    im = np.imag(vals)
    non_sectorial = bool(np.any((re <= RE_FLOOR) & (np.abs(im) > IM_FLOOR)))
    desc_str = f"{sample.size} frequencies, |xi| in [{np.min(np.abs(sample)):.3g}, {np.max(np.abs(sample)):.3g}]"
    if non_sectorial:
        return SectorReport(
            kappa=None, theta=None, omega=0.0, sectorial=False, grid_description=desc_str
        )
    kappa = float(np.max(np.abs(im) / np.maximum(re, RE_FLOOR)))
    return SectorReport(
        kappa=kappa,
        theta=math.atan(kappa),
        omega=0.0,
        sectorial=True,
        grid_description=desc_str,
    )


class DefinitenessResult(NamedTuple):
    is_negative_definite: bool
    min_eigenvalue: float


def check_negative_definite(desc: SymbolDescriptor, points) -> DefinitenessResult:
    """Test negative definiteness on m frequencies (2 <= m <= 64).

    Builds the m x m matrix with entries
    psi(xi_j) + conj(psi(xi_k)) - psi(xi_j - xi_k) and reports whether its
    Hermitian part is positive semidefinite within eigenvalue tolerance.
    """
    pts = np.asarray(points, dtype=float)
    if desc.dim == 1:
        pts = pts.reshape(-1)
        m = len(pts)
        diff = pts[:, None] - pts[None, :]
    else:
        m = len(pts)
        diff = pts[:, None, :] - pts[None, :, :]
    if not 2 <= m <= 64:
        raise ValueError("between 2 and 64 points are required")
    vals = np.asarray(eval_symbol(desc, pts))
    mat = vals[:, None] + np.conj(vals)[None, :] - np.asarray(eval_symbol(desc, diff))
    herm = 0.5 * (mat + mat.conj().T)
    eigs = np.linalg.eigvalsh(herm)
    min_eig = float(eigs.min())
    tol = 1e-10 * max(1.0, float(np.abs(mat).max()))
    return DefinitenessResult(min_eig >= -tol, min_eig)


@dataclass
class SmallXiReport:
    """Supremum of |xi|^{|alpha| - gamma} d^alpha psi near the origin."""

    sup: float
    ok: bool
    gamma: float
    order_k: int
    radius_floor: float
    ceiling: float


def check_small_xi_growth(
    desc: SymbolDescriptor,
    gamma: float,
    k: int,
    ceiling: float = 1e3,
    radius_floor: float = 1e-6,
    n_points: int = 49,
) -> SmallXiReport:
    """Check the small-frequency growth condition with exponent gamma > 0.

    Samples 0 < |xi| <= 1 on a log grid down to ``radius_floor`` (radii below
    it are excluded, which the report documents) and takes the sup over all
    |alpha| <= k of | |xi|^{|alpha| - gamma} d^alpha psi(xi) |.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    radii = np.logspace(math.log10(radius_floor), 0.0, n_points)
    dirs = _directions(desc.dim)
    sup = 0.0
    for alpha in multi_indices(desc.dim, k):
        order = sum(alpha)
        for u in dirs:
            pts = radii[:, None] * u[None, :]
            pts_in = pts[:, 0] if desc.dim == 1 else pts
            dv = np.abs(symbol_derivative(desc, pts_in, alpha, k_max=max(k, 2)))
            sup = max(sup, float(np.max(radii ** (order - gamma) * dv)))
    return SmallXiReport(
        sup=sup, ok=sup <= ceiling, gamma=gamma, order_k=k,
        radius_floor=radius_floor, ceiling=ceiling,
    )


@dataclass
class HohClassReport:
    """Empirical membership constants for a state-dependent symbol class."""

    m: float
    rho: float
    delta: float
    order_k: int
    constants: dict  # (alpha, beta) -> (small-|xi| constant, large-|xi| constant)
    member: bool
    ceiling: float


def check_hoh_class(
    h: HohSymbol,
    m: float,
    rho: float,
    delta: float,
    k: int,
    x_sample=None,
    ceiling: float = 1e6,
) -> HohClassReport:
    """Empirically test membership in the symbol class of order m.

    For each derivative pair with |alpha|, |beta| <= k the constant is the
    sampled sup of |d_xi^alpha d_x^beta a| divided by |xi|^{-|alpha|} for
    |xi| <= 1 and by (1 + |xi| + |x|)^{m - rho |alpha| + delta |beta|} for
    |xi| >= 1.  Membership requires every constant to stay below the ceiling.
    """
    dim = h.coeff.dim
    if x_sample is None:
        x_sample = np.linspace(-8.0, 8.0, 9) if dim == 1 else np.stack(
            np.meshgrid(np.linspace(-4, 4, 3), np.linspace(-4, 4, 3)), axis=-1
        ).reshape(-1, 2)
    small_r = np.logspace(-6, 0, 13)
    large_r = np.logspace(0, 3, 13)
    dirs = _directions(dim, 4)

    constants = {}
    member = True
    for alpha in multi_indices(dim, k):
        for beta in multi_indices(dim, k):
            c_small = 0.0
            c_large = 0.0
            for x in np.atleast_1d(x_sample) if dim == 1 else x_sample:
                xn = float(np.max(np.abs(x)))
                for u in dirs:
                    for radii, small in ((small_r, True), (large_r, False)):
                        pts = radii[:, None] * u[None, :]
                        pts_in = pts[:, 0] if dim == 1 else pts
                        dv = np.abs(h.deriv(x, pts_in, alpha, beta))
                        if small:
                            bound = radii ** (-float(sum(alpha)))
                            c_small = max(c_small, float(np.max(dv / bound)))
                        else:
                            expo = m - rho * sum(alpha) + delta * sum(beta)
                            bound = (1.0 + radii + xn) ** expo
                            c_large = max(c_large, float(np.max(dv / bound)))
            constants[(alpha, beta)] = (c_small, c_large)
            if not (np.isfinite(c_small) and np.isfinite(c_large)):
                member = False
            if max(c_small, c_large) > ceiling:
                member = False
    return HohClassReport(
        m=m, rho=rho, delta=delta, order_k=k, constants=constants,
        member=member, ceiling=ceiling,
    )


def moment_bound_diagnostic(desc: SymbolDescriptor, radii=None) -> float:
    """Sup of |psi'(xi)| / (|psi(xi)|^{1/2} + 1) over |xi| >= 1.

    Finite for symbols whose jump measure has all moments (smooth exponents);
    used as a diagnostic for derivative growth relative to the symbol itself.
    """
    if radii is None:
        radii = np.logspace(0, 3, 61)
    dirs = _directions(desc.dim)
    sup = 0.0
    e1 = tuple([1] + [0] * (desc.dim - 1))
    for u in dirs:
        pts = radii[:, None] * u[None, :]
        pts_in = pts[:, 0] if desc.dim == 1 else pts
        vals = np.abs(np.asarray(eval_symbol(desc, pts_in)))
        dv = np.abs(symbol_derivative(desc, pts_in, e1))
        sup = max(sup, float(np.max(dv / (np.sqrt(vals) + 1.0))))
    return sup
