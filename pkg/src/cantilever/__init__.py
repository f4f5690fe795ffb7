"""Positive solutions of the cantilever problem u'''' = f(t, u),
u(0) = u'(0) = u''(1) = u'''(1) = 0.

Submodules
----------
kernel        Green's function, minorants, quadrature, the operator J.
dsl           parser for piecewise nonlinearities.
nonlinearity  validated f, its antiderivative, envelopes, monotonicity.
eigen         first eigenpair of the linear beam.
solver        Picard, monotone and Newton iterations for u = J f(., u).
variational   energy, gradient, shell minimization, mountain pass.
certify       numerical certificates for the shell hypotheses.
cli           command-line front end.
"""

from .kernel import (
    DEFAULT_QUADRATURE,
    DomainError,
    Grid,
    GridFunction,
    QuadratureConfig,
    ToleranceNotMet,
    apply_J,
    curvature_from_rhs,
    green,
    green_tt,
    integrate,
    minorant,
)
from .nonlinearity import (
    NonlinearitySpec,
    check_monotone,
    envelope,
    eval_F,
    eval_f,
    parse_spec,
    power_quadratic,
    saturated_linear,
)
from .eigen import EigenPair, eigen_report, phi1, solve_beta
from .solver import SolveReport, monotone_iterate, newton_solve, picard, residual
from .variational import (
    CriticalPointReport,
    CurvatureRepr,
    ShellSpec,
    cone_membership,
    energy,
    energy_gradient,
    minimize_in_shell,
    mountain_pass,
    norms,
    sphere_inf,
    u_from_curvature,
)
from .certify import Certificate, check_f2, check_H1, check_h1, check_h2, check_h3, check_r0

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_QUADRATURE",
    "DomainError",
    "Grid",
    "GridFunction",
    "QuadratureConfig",
    "ToleranceNotMet",
    "apply_J",
    "curvature_from_rhs",
    "green",
    "green_tt",
    "integrate",
    "minorant",
    "NonlinearitySpec",
    "check_monotone",
    "envelope",
    "eval_F",
    "eval_f",
    "parse_spec",
    "power_quadratic",
    "saturated_linear",
    "EigenPair",
    "eigen_report",
    "phi1",
    "solve_beta",
    "SolveReport",
    "monotone_iterate",
    "newton_solve",
    "picard",
    "residual",
    "CriticalPointReport",
    "CurvatureRepr",
    "ShellSpec",
    "cone_membership",
    "energy",
    "energy_gradient",
    "minimize_in_shell",
    "mountain_pass",
    "norms",
    "sphere_inf",
    "u_from_curvature",
    "Certificate",
    "check_f2",
    "check_H1",
    "check_h1",
    "check_h2",
    "check_h3",
    "check_r0",
]
