"""Maximal regularity for non-autonomous forms, at matrix scale."""

from .errors import MathematicalFailure, MaxRegError
from .form import ModulusOfContinuity, NonAutonomousForm, certify_constants, diag_perturbed, scalar_poly
from .sectorial import (
    QuadratureConfig,
    SectorialSnapshot,
    inv_sqrt,
    make_snapshot,
    resolvent,
    semigroup_apply,
    semigroup_oracle,
    verify_resolvent_estimates,
)
from .solver import (
    GridFunction,
    SolveReport,
    TimeGrid,
    mr_diagnostics,
    shift_transform,
    solve,
    solve_representation,
    solve_stepping,
)
from .triple import HilbertTriple, build_triple, operator_norm_scales, scale_norm

__version__ = "0.1.0"
