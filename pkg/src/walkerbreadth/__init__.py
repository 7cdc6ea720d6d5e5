"""Constant-breadth curve pairs in three-dimensional Walker manifolds.

The metric is ``g = dx dz + dz dx + dy dy + f(y, z) dz dz`` with epsilon = +1.
"""

from .breadth import (
    BreadthCoefficients,
    CoefficientSystem,
    CurvePair,
    HMode,
    Kind,
    PairConfig,
    build_partner,
    closed_form_branch,
    closed_form_coefficients,
    closed_form_m1,
    coefficient_rhs,
    discriminant,
    geodesic_m23_closed_form,
    helix_check,
    integrate_coefficients,
    m1_zero_coefficients,
    verify_pair,
)
from .curves import (
    AnalyticCurve,
    FrenetApparatus,
    FrenetSolution,
    SampledCurve,
    frenet_apparatus,
    frenet_residuals,
    initial_frame,
    integrate_curve_from_frenet_data,
    kinematics,
    reparametrize_by_arclength,
)
from .darboux import (
    CaseTag,
    DarbouxApparatus,
    DarbouxSeries,
    SurfacePatch,
    darboux_apparatus,
    darboux_from_frenet,
    recover_theta,
    verify_structure_equations,
)
from .exceptions import *  # noqa: F403
from .expression import parse_expression, parse_field
from .metric import (
    CausalCharacter,
    Point,
    Tangent,
    WalkerMetric,
    causal_character,
    christoffel,
    covariant_derivative_along,
    cross,
    frame_e123,
    metric_value,
)

__version__ = "0.1.0"
