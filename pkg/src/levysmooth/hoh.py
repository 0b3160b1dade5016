"""State-dependent symbols a(x, xi) = psi(sigma(x)^T xi) and coefficient fields.

Coefficient fields come from a fixed catalog of named expressions with
closed-form derivatives.  In one dimension sigma and b are scalar functions;
in two dimensions only diagonal matrices are supported, represented by their
diagonal entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import HypothesisViolationError, NearPoleError
from .symbols import SymbolDescriptor, eval_symbol, symbol_derivative

X_FD_STEP = 1e-5


@dataclass
class ScalarExpression:
    """A named scalar function of x with derivatives of every order."""

    name: str
    func: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray, int], np.ndarray]
    lower: float
    upper: float
    deriv_sup: float

    def __call__(self, x):
        return self.func(np.asarray(x, dtype=float))

    def derivative(self, x, order: int):
        if order == 0:
            return self(x)
        return self.deriv(np.asarray(x, dtype=float), order)


def _cyclic_sin(base_shift: float):
    # derivatives of shift + sin(x): cos, -sin, -cos, sin, ...
    def deriv(x, order):
        cycle = [np.cos, lambda v: -np.sin(v), lambda v: -np.cos(v), np.sin]
        return cycle[(order - 1) % 4](x)

    def func(x):
        return base_shift + np.sin(x)

    return func, deriv


def _constant(c: float):
    def func(x):
        return np.full_like(np.asarray(x, dtype=float), c)

    def deriv(x, order):
        return np.zeros_like(np.asarray(x, dtype=float))

    return func, deriv


def _linear():
    def func(x):
        return np.asarray(x, dtype=float).copy()

    def deriv(x, order):
        x = np.asarray(x, dtype=float)
        return np.ones_like(x) if order == 1 else np.zeros_like(x)

    return func, deriv


def _make_catalog() -> dict[str, ScalarExpression]:
    cat = {}
    f, df = _constant(1.0)
    cat["identity"] = ScalarExpression("identity", f, df, 1.0, 1.0, 0.0)
    f, df = _cyclic_sin(2.0)
    cat["2_plus_sin"] = ScalarExpression("2_plus_sin", f, df, 1.0, 3.0, 1.0)
    f, df = _linear()
    cat["x"] = ScalarExpression("x", f, df, 0.0, math.inf, 1.0)
    f, df = _cyclic_sin(0.0)
    cat["sin"] = ScalarExpression("sin", f, df, 0.0, 1.0, 1.0)
    return cat


EXPRESSION_CATALOG = _make_catalog()


def expression(name: str) -> ScalarExpression:
    if name not in EXPRESSION_CATALOG:
        raise KeyError(
            f"unknown coefficient expression {name!r}; "
            f"choices: {sorted(EXPRESSION_CATALOG)} or constant_expression(c)"
        )
    return EXPRESSION_CATALOG[name]


def constant_expression(c: float) -> ScalarExpression:
    f, df = _constant(float(c))
    return ScalarExpression(f"constant({c})", f, df, abs(float(c)), abs(float(c)), 0.0)


@dataclass
class CoefficientField:
    """Diffusion coefficient sigma and drift-side coefficient b with bounds.

    For d = 2, ``sigma``/``b`` give the diagonal entries per axis (a pair of
    scalar expressions); off-diagonal coefficients are not supported.
    """

    sigma: tuple[ScalarExpression, ...]
    b: tuple[ScalarExpression, ...]
    dim: int = 1
    c_lo: float = None
    c_hi: float = None
    deriv_ceiling: float = 100.0
    verified: bool = field(default=False, compare=False)

    def __post_init__(self):
        if isinstance(self.sigma, ScalarExpression):
            self.sigma = (self.sigma,)
        if isinstance(self.b, ScalarExpression):
            self.b = (self.b,)
        if len(self.sigma) != self.dim or len(self.b) != self.dim:
            raise ValueError("one expression per axis is required")
        if self.c_lo is None:
            self.c_lo = min(e.lower for e in self.sigma)
        if self.c_hi is None:
            self.c_hi = max(e.upper for e in self.sigma)

    def sigma_at(self, x):
        """Diagonal of sigma(x); shape (..., dim) for d = 2, scalar-shaped for d = 1."""
        x = np.asarray(x, dtype=float)
        if self.dim == 1:
            return self.sigma[0](x)
        return np.stack([e(x[..., i]) for i, e in enumerate(self.sigma)], axis=-1)

    def b_at(self, x):
        x = np.asarray(x, dtype=float)
        if self.dim == 1:
            return self.b[0](x)
        return np.stack([e(x[..., i]) for i, e in enumerate(self.b)], axis=-1)

    def is_constant(self) -> bool:
        return all(e.deriv_sup == 0.0 for e in self.sigma + self.b)


def constant_coefficients(sigma_c: float = 1.0, b_c: float = 1.0, dim: int = 1) -> CoefficientField:
    sig = tuple(constant_expression(sigma_c) for _ in range(dim))
    bb = tuple(constant_expression(b_c) for _ in range(dim))
    cf = CoefficientField(sigma=sig, b=bb, dim=dim)
    cf.verified = sigma_c != 0.0
    return cf


@dataclass
class Hypothesis1Report:
    """Empirical bounds of a coefficient field over a sample."""

    c_lo_emp: float
    c_hi_emp: float
    sigma_deriv_sup: dict
    b_deriv_sup: dict
    c_lo_declared: float
    c_hi_declared: float
    passed: bool
    flags: tuple


def check_hypothesis1(coeff: CoefficientField, k: int, x_sample: np.ndarray) -> Hypothesis1Report:
    """Verify uniform ellipticity and bounded derivatives up to order k.

    Fails with a ``c_hi = inf`` flag for unbounded sigma and a ``c_lo = 0``
    flag when the declared or empirical lower bound vanishes.  A passing
    report marks the field verified.
    """
    x_sample = np.asarray(x_sample, dtype=float)

    def component(i):
        return x_sample if coeff.dim == 1 else x_sample[..., i]

    flags = []
    sig_abs = np.concatenate(
        [np.atleast_1d(np.abs(e(component(i)))) for i, e in enumerate(coeff.sigma)]
    )
    c_lo_emp = float(sig_abs.min())
    c_hi_emp = float(sig_abs.max())

    sigma_sup = {}
    b_sup = {}
    for order in range(1, k + 1):
        sigma_sup[order] = max(
            float(np.max(np.abs(e.derivative(component(i), order))))
            for i, e in enumerate(coeff.sigma)
        )
        b_sup[order] = max(
            float(np.max(np.abs(e.derivative(component(i), order))))
            for i, e in enumerate(coeff.b)
        )

    ok = True
    if not math.isfinite(coeff.c_hi):
        flags.append("c_hi_infinite")
        ok = False
    if coeff.c_lo <= 0.0:
        flags.append("c_lo_zero")
        ok = False
    if c_lo_emp < coeff.c_lo - 1e-12 or c_hi_emp > coeff.c_hi + 1e-12:
        flags.append("declared_bounds_violated")
        ok = False
    if any(v > coeff.deriv_ceiling for v in sigma_sup.values()) or any(
        v > coeff.deriv_ceiling for v in b_sup.values()
    ):
        flags.append("derivative_unbounded")
        ok = False

    coeff.verified = ok
    return Hypothesis1Report(
        c_lo_emp=c_lo_emp,
        c_hi_emp=c_hi_emp,
        sigma_deriv_sup=sigma_sup,
        b_deriv_sup=b_sup,
        c_lo_declared=coeff.c_lo,
        c_hi_declared=coeff.c_hi,
        passed=ok,
        flags=tuple(flags),
    )


@dataclass
class HohSymbol:
    """Evaluable state-dependent symbol base(coeff(x)^T xi)."""

    base: SymbolDescriptor
    coeff: CoefficientField
    which: str = "sigma"  # drive by sigma or by b

    def _field_at(self, x):
        return self.coeff.sigma_at(x) if self.which == "sigma" else self.coeff.b_at(x)

    def eval(self, x, xi):
        """a(x, xi) with numpy broadcasting between x and xi."""
        c = self._field_at(x)
        return eval_symbol(self.base, np.asarray(c) * np.asarray(xi, dtype=float))

    __call__ = eval

    def deriv(self, x, xi, alpha, beta, k_max: int = 6):
        """Mixed partial d_xi^alpha d_x^beta a(x, xi).

        The xi-part uses the exact (diagonal) chain rule through the base
        symbol's derivatives; the x-part is nested central differencing of
        that chain-ruled function, so small |xi| never crosses the origin.
        """
        alpha = tuple(np.atleast_1d(alpha).astype(int))
        beta = tuple(np.atleast_1d(beta).astype(int))

        def xi_part(xv):
            c = self._field_at(xv)
            if self.coeff.dim == 1:
                inner = np.asarray(c) * np.asarray(xi, dtype=float)
                chain = np.asarray(c, dtype=complex) ** alpha[0]
                return chain * np.asarray(
                    symbol_derivative(self.base, inner, alpha, k_max=k_max)
                )
            inner = np.asarray(c) * np.asarray(xi, dtype=float)
            chain = np.prod(np.asarray(c, dtype=complex) ** np.asarray(alpha), axis=-1)
            return chain * np.asarray(
                symbol_derivative(self.base, inner, alpha, k_max=k_max)
            )

        if sum(beta) == 0:
            return xi_part(np.asarray(x, dtype=float))

        def rec(xv, b):
            for axis in range(len(b)):
                if b[axis] > 0:
                    lower = tuple(v - (1 if i == axis else 0) for i, v in enumerate(b))
                    h = X_FD_STEP * max(1.0, float(np.max(np.abs(xv))))
                    if self.coeff.dim == 1:
                        return (rec(xv + h, lower) - rec(xv - h, lower)) / (2 * h)
                    step = np.zeros(self.coeff.dim)
                    step[axis] = h
                    return (rec(xv + step, lower) - rec(xv - step, lower)) / (2 * h)
            return xi_part(xv)

        return rec(np.asarray(x, dtype=float), beta)


def make_hoh_symbol(
    base: SymbolDescriptor,
    coeff: CoefficientField,
    which: str = "sigma",
    x_sample: Optional[np.ndarray] = None,
    k: int = 2,
) -> HohSymbol:
    """Build a(x, xi) = base(coeff(x)^T xi), verifying the coefficient field.

    Raises :class:`HypothesisViolationError` when the field fails its
    boundedness/ellipticity check.
    """
    if which not in ("sigma", "b"):
        raise ValueError("which must be 'sigma' or 'b'")
    if not coeff.verified:
        if x_sample is None:
            x_sample = np.linspace(-20.0, 20.0, 2001)
        report = check_hypothesis1(coeff, k, x_sample)
        if not report.passed:
            raise HypothesisViolationError(
                f"coefficient field failed verification: flags={report.flags}"
            )
    return HohSymbol(base=base, coeff=coeff, which=which)


@dataclass
class QuotientSymbol:
    """Leading-order symbol of B R(lambda : A):  q(b^T(x) xi) / (lambda + psi(sigma^T(x) xi))."""

    numerator: HohSymbol
    denominator: HohSymbol
    lam: complex
    pole_floor: float = 1e-12

    def eval(self, x, xi):
        den = self.lam + np.asarray(self.denominator.eval(x, xi))
        if np.any(np.abs(den) < self.pole_floor):
            raise NearPoleError(
                f"denominator magnitude below {self.pole_floor} at lambda={self.lam}"
            )
        return np.asarray(self.numerator.eval(x, xi)) / den

    __call__ = eval


def leading_composition_symbol(
    q_sym: HohSymbol, psi_sym: HohSymbol, lam: complex
) -> QuotientSymbol:
    """Pointwise quotient symbol approximating the resolvent composition."""
    return QuotientSymbol(numerator=q_sym, denominator=psi_sym, lam=complex(lam))
