"""Symbol calculus, semigroup engines, and smoothing-rate experiments for
SDEs driven by Levy processes."""

from .classify import (
    IndexReport,
    SectorReport,
    check_hoh_class,
    check_negative_definite,
    check_small_xi_growth,
    estimate_bg_index,
    sector_kappa,
)
from .errors import LevysmoothError
from .experiments import (
    ResolventDecayResult,
    SmoothingResult,
    generator_consistency,
    maximizer_check,
    resolvent_decay,
    smoothing_rate,
)
from .hoh import (
    CoefficientField,
    HohSymbol,
    check_hypothesis1,
    constant_coefficients,
    expression,
    leading_composition_symbol,
    make_hoh_symbol,
)
from .semigroup import (
    ContourSpec,
    SdeSpec,
    contour_semigroup,
    mc_semigroup,
    mc_symbol_extraction,
    multiplier_semigroup,
    resolvent_apply,
    sample_increment,
)
from .spectral import (
    Field,
    GridSpec,
    apply_multiplier,
    apply_pdo,
    fourier_forward,
    fourier_inverse,
    operator_norm_bound,
    sobolev_norm,
)
from .symbols import (
    LevyTriplet,
    SymbolDescriptor,
    alpha_stable,
    bessel_power,
    brownian,
    constant_one,
    custom,
    drift_descriptor,
    eval_symbol,
    levy_khintchine,
    levy_khintchine_eval,
    meixner,
    nig,
    power_symbol,
    richardson_derivative,
    subordinate,
    subordinated_drift,
    symbol_derivative,
)

__version__ = "0.1.0"
