"""Calculus over finite-dimensional real unital associative algebras."""
from __future__ import annotations

__version__ = "0.1.0"

from .algebra import (
    PRESET_NAMES,
    AlgebraSpec,
    Element,
    GeneratedAlgebra,
    Kind,
    as_generated,
    build_algebra,
    classify,
    generated_algebra,
    hyperbolic_isomorphism,
    inverse,
    load_algebra,
    matrix_algebra,
    mul,
    norm_constants,
    power,
    preset,
    regular_rep,
    save_algebra,
)
from .calculus import (
    AFunction,
    CRReport,
    Curve,
    circle,
    component_pde_check,
    cr_residual,
    curve_integral,
    integrate_curve,
    numeric_jacobian,
    polygon,
    segment,
)
from .coeffs import parse_coeffs
from .errors import *  # noqa: F401,F403
from .power_series import (
    Grid,
    PowerSeries,
    RadiusReport,
    RegionScan,
    Slice,
    derivative_series,
    entire_extension,
    estimate_radii,
    evaluate,
    geometric,
    product_series,
    region_scan,
    shift_center,
    uniform_tail_bound,
)
from .series import (
    Status,
    SumResult,
    TermStream,
    Verdict,
    cauchy_product,
    comparison_test,
    ratio_test,
    root_test,
    sum_series,
)
from .transcendental import (
    SpecialFunctionTable,
    cos,
    cosh,
    exp,
    identity_suite,
    n_hyperbolic,
    n_trig,
    pythagorean,
    second_order_ivp_check,
    sin,
    sinh,
    special_functions,
)
