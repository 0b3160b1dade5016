import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from levysmooth import classify
from levysmooth.errors import (
    DescriptorInvalidError,
    OriginSingularityError,
    UnsupportedOrderError,
)
from levysmooth.symbols import (
    LevyTriplet,
    alpha_stable,
    brownian,
    custom,
    drift_descriptor,
    eval_symbol,
    levy_khintchine,
    levy_khintchine_eval,
    meixner,
    nig,
    richardson_derivative,
    subordinate,
    subordinated_drift,
    symbol_derivative,
)

CATALOG = [
    alpha_stable(0.7),
    alpha_stable(1.5),
    brownian(),
    meixner(0.0, 1.0, 1.0, 0.0),
    meixner(1.0, 0.5, 2.0, 0.7),
    nig(0.0, 1.0, 2.0, 1.0),
    nig(0.4, 0.8, 3.0, -1.2),
    subordinated_drift(0.6),
]


# ---------------------------------------------------------------------------
# evaluation


def test_alpha_stable_value():
    assert eval_symbol(alpha_stable(1.5), 2.0) == pytest.approx(2.8284271247461903)


@pytest.mark.parametrize("desc", CATALOG, ids=lambda d: d.name())
def test_value_at_origin_is_zero(desc):
    assert eval_symbol(desc, 0.0) == 0.0


def test_nig_against_closed_form_oracle():
    # independent complex-square-root evaluation of the closed form
    m, delta, a, b = 0.0, 1.0, 2.0, 1.0
    desc = nig(m, delta, a, b)
    for xi in (0.25, 1.0, -1.0, 3.5):
        oracle = -1j * m * xi + delta * (
            cmath.sqrt(a**2 - (b + 1j * xi) ** 2) - cmath.sqrt(a**2 - b**2)
        )
        assert eval_symbol(desc, xi) == pytest.approx(oracle, rel=1e-14)


def test_meixner_value():
    desc = meixner(0.0, 1.0, 1.0, 0.0)
    assert eval_symbol(desc, 1.0) == pytest.approx(2.0 * math.log(math.cosh(0.5)))


def test_evaluation_is_deterministic():
    desc = nig(0.4, 0.8, 3.0, -1.2)
    xi = np.linspace(-7, 7, 101)
    a = np.asarray(eval_symbol(desc, xi))
    b = np.asarray(eval_symbol(desc, xi))
    assert np.array_equal(a, b)


def test_invalid_parameters_raise():
    with pytest.raises(DescriptorInvalidError):
        alpha_stable(2.5)
    with pytest.raises(DescriptorInvalidError):
        meixner(0.0, -1.0, 1.0, 0.0)
    with pytest.raises(DescriptorInvalidError):
        nig(0.0, 1.0, 1.0, 1.5)  # |b| < a fails
    with pytest.raises(DescriptorInvalidError):
        subordinated_drift(1.2)


@given(xi=st.floats(min_value=-1e3, max_value=1e3, allow_nan=False))
@settings(max_examples=200, deadline=None)
def test_hermitian_symmetry(xi):
    # characteristic exponents of real processes: psi(-xi) = conj(psi(xi))
    for desc in CATALOG:
        assert eval_symbol(desc, -xi) == pytest.approx(
            np.conj(eval_symbol(desc, xi)), rel=1e-12, abs=1e-12
        )


@pytest.mark.parametrize("desc", CATALOG, ids=lambda d: d.name())
def test_hermitian_symmetry_bulk_sample(desc):
    rng = np.random.default_rng(909)
    xi = rng.uniform(-1e3, 1e3, 1000)
    fwd = np.asarray(eval_symbol(desc, xi))
    bwd = np.asarray(eval_symbol(desc, -xi))
    assert np.allclose(bwd, np.conj(fwd), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize(
    "desc",
    [alpha_stable(1.5), brownian(), meixner(0.0, 1.0, 1.0, 0.0)],
    ids=lambda d: d.name(),
)
def test_symmetric_driftless_symbols_are_real(desc):
    xi = np.linspace(-40.0, 40.0, 401)
    assert np.all(np.imag(np.asarray(eval_symbol(desc, xi))) == 0.0)


@pytest.mark.parametrize("desc", CATALOG, ids=lambda d: d.name())
def test_quadratic_growth_bound(desc):
    xi = np.concatenate([-np.logspace(-3, 3, 300)[::-1], np.logspace(-3, 3, 300)])
    vals = np.abs(np.asarray(eval_symbol(desc, xi)))
    c = np.max(vals / (1.0 + xi**2))
    assert np.isfinite(c)
    assert np.all(vals <= (c + 1e-12) * (1.0 + xi**2))


# ---------------------------------------------------------------------------
# derivatives


def test_brownian_derivative():
    assert symbol_derivative(brownian(), 3.0, 1) == pytest.approx(6.0)


def test_alpha_stable_derivative():
    assert symbol_derivative(alpha_stable(1.5), 2.0, 1) == pytest.approx(
        2.1213203435596424
    )


def test_meixner_second_derivative_vs_richardson():
    desc = meixner(0.0, 1.0, 1.0, 0.0)
    fd = symbol_derivative(desc, 1.0, 2)
    oracle = richardson_derivative(desc, 1.0, (2,))
    assert abs(fd - oracle) / abs(oracle) < 1e-6


@pytest.mark.parametrize("desc", CATALOG, ids=lambda d: d.name())
@pytest.mark.parametrize("order", [1, 2])
def test_finite_difference_matches_closed_form(desc, order):
    if desc.kind == "subordinated_drift" and order == 2 and desc.alpha < 1:
        pass  # still fine: closed form exists for every order
    plain = custom(
        lambda xi, d=desc: np.asarray(eval_symbol(d, xi)),
        origin_singular=desc.is_origin_singular,
        label=f"fd({desc.name()})",
    )
    for xi in (0.7, 2.3, -1.9):
        closed = symbol_derivative(desc, xi, order)
        fd = symbol_derivative(plain, xi, order)
        assert abs(fd - closed) <= 1e-6 * max(abs(closed), 1.0)


def test_origin_singular_refusal():
    with pytest.raises(OriginSingularityError):
        symbol_derivative(alpha_stable(1.5), 1e-9, 1)
    with pytest.raises(OriginSingularityError):
        symbol_derivative(subordinated_drift(0.5), 0.0, 1)


def test_unsupported_order():
    with pytest.raises(UnsupportedOrderError):
        symbol_derivative(brownian(), 1.0, 5, k_max=4)


def test_brownian_2d_hessian():
    desc = brownian(dim=2)
    assert symbol_derivative(desc, np.array([1.0, 2.0]), (2, 0)) == pytest.approx(2.0)
    assert symbol_derivative(desc, np.array([1.0, 2.0]), (1, 1)) == pytest.approx(0.0)


def test_alpha_stable_2d_gradient():
    desc = alpha_stable(1.5, dim=2)
    xi = np.array([3.0, 4.0])  # |xi| = 5
    want = 1.5 * 3.0 * 5.0 ** (1.5 - 2.0)
    assert symbol_derivative(desc, xi, (1, 0)) == pytest.approx(want)


# ---------------------------------------------------------------------------
# Levy-Khintchine quadrature


def test_compound_poisson_atoms():
    trip = LevyTriplet(
        drift=[0.0], diffusion=[[0.0]], atoms=[([1.0], 1.0), ([-1.0], 1.0)]
    )
    assert levy_khintchine_eval(trip, math.pi) == pytest.approx(4.0)


def test_pure_gaussian_triplet_matches_brownian():
    trip = LevyTriplet(drift=[0.0], diffusion=[[2.0]])
    desc = levy_khintchine(trip)
    for xi in (0.5, 1.0, 3.0):
        assert eval_symbol(desc, xi) == pytest.approx(eval_symbol(brownian(), xi))


def test_stable_density_matches_catalog():
    alpha = 1.5
    radius = 10.0
    # normalizing constant from the defining integral (independent oracle);
    # the oscillatory tail integral uses the dedicated cosine-weight rule
    head, _ = integrate.quad(
        lambda u: (1.0 - math.cos(u)) * u ** (-1.0 - alpha), 0, 1, limit=200
    )
    tail_cos, _ = integrate.quad(
        lambda u: u ** (-1.0 - alpha), 1, np.inf, weight="cos", wvar=1.0, limit=200
    )
    norm = head + 1.0 / alpha - tail_cos
    c = 1.0 / (2.0 * norm)
    trip = LevyTriplet(
        drift=[0.0],
        diffusion=[[0.0]],
        density=lambda y: c * np.abs(y) ** (-1.0 - alpha),
        radius=radius,
    )
    # tail bound of the truncation: 2 integral_{radius}^inf 2 c y^{-1-alpha} dy
    tail = 4.0 * c * radius**-alpha / alpha
    for xi in (0.5, 1.0, 2.0, 4.0):
        got = levy_khintchine_eval(trip, xi)
        assert abs(got - abs(xi) ** alpha) <= tail + 1e-6


@pytest.mark.filterwarnings("ignore::UserWarning", "ignore:The integral:")
def test_density_integrability_enforced():
    with pytest.raises(Exception):
        LevyTriplet(
            drift=[0.0],
            diffusion=[[0.0]],
            density=lambda y: np.abs(y) ** -3.5,  # not a Levy density
            radius=1.0,
        )


def test_diffusion_matrix_validation():
    with pytest.raises(DescriptorInvalidError):
        LevyTriplet(drift=[0.0, 0.0], diffusion=[[1.0, 0.5], [0.4, 1.0]])
    with pytest.raises(DescriptorInvalidError):
        LevyTriplet(drift=[0.0], diffusion=[[-1.0]])


# ---------------------------------------------------------------------------
# subordination


def test_subordinate_principal_branch():
    sd = subordinate(drift_descriptor(), 0.5)
    assert eval_symbol(sd, 1.0) == pytest.approx(cmath.exp(1j * math.pi / 4.0))
    assert eval_symbol(sd, -1.0) == pytest.approx(cmath.exp(-1j * math.pi / 4.0))


def test_subordinate_modulus_and_argument():
    sd = subordinate(drift_descriptor(), 0.7)
    v = eval_symbol(sd, 2.0)
    assert abs(v) == pytest.approx(2.0**0.7)
    assert cmath.phase(v) == pytest.approx(0.7 * math.pi / 2.0)


def test_subordinate_result_is_sectorial():
    sd = subordinate(drift_descriptor(), 0.7)
    rep = classify.sector_kappa(sd, classify.default_sector_sample())
    assert rep.sectorial
    assert rep.kappa == pytest.approx(math.tan(0.7 * math.pi / 2.0), rel=1e-9)


def test_subordinate_rejects_bad_inputs():
    with pytest.raises(DescriptorInvalidError):
        subordinate(drift_descriptor(), 1.5)
    with pytest.raises(DescriptorInvalidError):
        subordinate(brownian(), 0.5)


# ---------------------------------------------------------------------------
# derivative-vs-symbol growth diagnostic


def test_moment_bound_diagnostic_compound_poisson():
    # compactly supported jumps => all moments finite => |psi'| <= C sqrt|psi| + C
    trip = LevyTriplet(
        drift=[0.0],
        diffusion=[[0.0]],
        atoms=[([0.5], 1.0), ([-0.5], 1.0), ([1.0], 0.3), ([-1.0], 0.3)],
    )
    desc = levy_khintchine(trip)
    inner = classify.moment_bound_diagnostic(desc, radii=np.logspace(0, 1.5, 25))
    outer = classify.moment_bound_diagnostic(desc, radii=np.logspace(1.5, 3, 25))
    assert np.isfinite(inner) and np.isfinite(outer)
    assert outer <= inner * 1.5 + 1.0  # no growth of the ratio at large |xi|
