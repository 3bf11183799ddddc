"""Nonlinear eigenvalue problems ``lam T(lam) u = u`` and their first-order corrections."""

from .correction import (
    CorrectionReport,
    first_order_slope,
    linear_cluster,
    nonlinear_correction,
    osborn_linear_correction,
)
from .family import (
    OperatorFamily,
    PerturbationFamily,
    PiecewiseConstant,
    Region,
    build_constant,
    build_generalized,
    build_polynomial,
    build_quadratic,
    build_resonance_1d,
    perturb_general,
    perturb_linear,
)
from .resolvent import (
    Contour,
    MomentTable,
    apply_resolvent,
    contour_moments,
    perturbation_bound,
    pole_indicator,
)
from .solver import (
    NonlinearEigenpair,
    SpectralCluster,
    extract_cluster,
    refine,
    solve_in_contour,
    track,
)

__version__ = "0.1.0"
