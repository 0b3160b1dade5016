import math

import numpy as np
import pytest

from levysmooth.errors import HypothesisViolationError, NearPoleError
from levysmooth.hoh import (
    CoefficientField,
    check_hypothesis1,
    constant_coefficients,
    constant_expression,
    expression,
    leading_composition_symbol,
    make_hoh_symbol,
)
from levysmooth.symbols import alpha_stable, brownian

X_SAMPLE = np.linspace(-10.0, 10.0, 2001)


# ---------------------------------------------------------------------------
# composition


def test_constant_sigma_collapses_to_base():
    h = make_hoh_symbol(alpha_stable(1.5), constant_coefficients(1.0))
    for x in (0.0, 1.7, -4.0):
        assert h.eval(x, 2.0) == pytest.approx(2.0**1.5)


def test_brownian_with_sigma_two():
    h = make_hoh_symbol(brownian(), constant_coefficients(2.0))
    assert h.eval(0.3, 1.5) == pytest.approx(4.0 * 1.5**2)


def test_varying_sigma_composition_points():
    coeff = CoefficientField(sigma=(expression("2_plus_sin"),), b=(expression("identity"),), dim=1)
    h = make_hoh_symbol(alpha_stable(1.5), coeff)
    assert h.eval(0.0, 1.0) == pytest.approx(2.0**1.5)
    assert h.eval(math.pi / 2.0, 1.0) == pytest.approx(3.0**1.5)


def test_x_independence_is_bitwise():
    h = make_hoh_symbol(alpha_stable(1.3), constant_coefficients(1.7))
    rng = np.random.default_rng(3)
    xs = rng.uniform(-50, 50, 1000)
    vals = np.asarray([h.eval(x, 2.2) for x in xs])
    assert np.all(vals == vals[0])


def test_symbol_vanishes_at_zero_frequency():
    coeff = CoefficientField(sigma=(expression("2_plus_sin"),), b=(expression("identity"),), dim=1)
    h = make_hoh_symbol(alpha_stable(1.5), coeff)
    for x in (-2.0, 0.0, 5.0):
        assert h.eval(x, 0.0) == 0.0


def test_chain_rule_first_derivative():
    coeff = CoefficientField(sigma=(expression("2_plus_sin"),), b=(expression("identity"),), dim=1)
    h = make_hoh_symbol(brownian(), coeff)
    # d/dxi (sigma(x) xi)^2 = 2 sigma(x)^2 xi
    x, xi = 0.7, 1.3
    sig = 2.0 + math.sin(x)
    assert h.deriv(x, xi, (1,), (0,)) == pytest.approx(2.0 * sig**2 * xi)
    # d/dx (sigma(x) xi)^2 = 2 sigma sigma' xi^2
    got = h.deriv(x, xi, (0,), (1,))
    assert got == pytest.approx(2.0 * sig * math.cos(x) * xi**2, rel=1e-8)


# ---------------------------------------------------------------------------
# coefficient hypotheses


def test_two_plus_sin_passes():
    coeff = CoefficientField(sigma=(expression("2_plus_sin"),), b=(expression("identity"),), dim=1)
    rep = check_hypothesis1(coeff, k=2, x_sample=X_SAMPLE)
    assert rep.passed
    assert rep.c_lo_emp == pytest.approx(1.0, abs=1e-4)
    assert rep.c_hi_emp == pytest.approx(3.0, abs=1e-4)
    assert all(v <= 1.0 + 1e-12 for v in rep.sigma_deriv_sup.values())
    assert coeff.verified


def test_unbounded_sigma_fails_with_flag():
    coeff = CoefficientField(sigma=(expression("x"),), b=(expression("identity"),), dim=1)
    rep = check_hypothesis1(coeff, k=2, x_sample=X_SAMPLE)
    assert not rep.passed
    assert "c_hi_infinite" in rep.flags
    assert math.isinf(rep.c_hi_declared)


def test_vanishing_sigma_fails_with_flag():
    coeff = CoefficientField(sigma=(expression("sin"),), b=(expression("identity"),), dim=1)
    rep = check_hypothesis1(coeff, k=2, x_sample=X_SAMPLE)
    assert not rep.passed
    assert "c_lo_zero" in rep.flags


def test_make_hoh_symbol_rejects_bad_coefficients():
    coeff = CoefficientField(sigma=(expression("sin"),), b=(expression("identity"),), dim=1)
    with pytest.raises(HypothesisViolationError):
        make_hoh_symbol(alpha_stable(1.5), coeff)


def test_declared_bounds_enforced():
    # declare sigma range [2.5, 2.5] for a field that actually hits [1, 3]
    coeff = CoefficientField(
        sigma=(expression("2_plus_sin"),), b=(expression("identity"),), dim=1,
        c_lo=2.5, c_hi=2.5,
    )
    rep = check_hypothesis1(coeff, k=1, x_sample=X_SAMPLE)
    assert not rep.passed
    assert "declared_bounds_violated" in rep.flags


# ---------------------------------------------------------------------------
# leading quotient symbol


def test_quotient_symbol_constant_coefficients():
    q = make_hoh_symbol(brownian(), constant_coefficients(1.0))
    psi = make_hoh_symbol(brownian(), constant_coefficients(1.0))
    pi = leading_composition_symbol(q, psi, 1.0)
    for xi in (0.5, 1.0, 3.0):
        assert pi.eval(0.0, xi) == pytest.approx(xi**2 / (1.0 + xi**2))


def test_quotient_near_pole_raises():
    q = make_hoh_symbol(brownian(), constant_coefficients(1.0))
    psi = make_hoh_symbol(brownian(), constant_coefficients(1.0))
    pi = leading_composition_symbol(q, psi, -4.0)
    with pytest.raises(NearPoleError):
        pi.eval(0.0, 2.0)  # psi = 4 exactly cancels lambda


def test_quotient_maximizer_tracks_formula():
    # |pi| for pure powers: argmax at (s2 lam / (s1 - s2))^{1/s1}
    s1, s2 = 2.0, 1.0
    q = make_hoh_symbol(alpha_stable(s2), constant_coefficients(1.0))
    psi = make_hoh_symbol(brownian(), constant_coefficients(1.0))
    xi = np.logspace(-3, 3, 4001)
    cell = (xi[1:] / xi[:-1]).max()
    for lam in (2.0, 4.0, 8.0, 16.0):
        pi = leading_composition_symbol(q, psi, lam)
        vals = np.abs(pi.eval(0.0, xi))
        got = xi[int(np.argmax(vals))]
        want = (s2 * lam / (s1 - s2)) ** (1.0 / s1)
        assert abs(math.log(got / want)) <= math.log(cell) + 1e-12


def test_quotient_bound_uniform_on_ray():
    # sup |pi| <= C |lambda|^{s2/s1 - 1} with a single C across the ray
    s1, s2 = 2.0, 1.0
    q = make_hoh_symbol(alpha_stable(s2), constant_coefficients(1.0))
    psi = make_hoh_symbol(brownian(), constant_coefficients(1.0))
    xi = np.logspace(-3, 3, 2001)
    R = 1.0
    cs = []
    for lam in np.logspace(0, 3, 13) * R:
        pi = leading_composition_symbol(q, psi, lam)
        sup = float(np.max(np.abs(pi.eval(0.0, xi))))
        cs.append(sup * lam ** (1.0 - s2 / s1))
    # a single constant: the scaled suprema are flat (they equal 1/2 here)
    assert max(cs) <= 0.5 + 1e-6
    assert min(cs) >= 0.5 - 1e-2
