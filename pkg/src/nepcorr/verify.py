"""Built-in oracle checks run by ``nep verify``.

Each check returns ``(measured, threshold, mode)``; ``mode`` is ``"le"``
(pass when measured <= threshold) or ``"ge"``.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import oracles
from .correction import first_order_slope, linear_cluster, nonlinear_correction, osborn_linear_correction
from .errors import DefectiveCluster, DenominatorNearSingular
from .family import (
    PiecewiseConstant,
    build_constant,
    build_generalized,
    build_polynomial,
    build_quadratic,
    build_resonance_1d,
    perturb_linear,
)
from .linalg import eig_dense, norm2, solve_linear, svd
from .resolvent import Contour, contour_moments, perturbation_bound, pole_indicator
from .solver import extract_cluster, solve_in_contour, track
from .study import fit_loglog_slope

CHECKS: dict[str, Callable] = {}

LAM_SCALAR = -1 + math.sqrt(5)
SLOPE_SCALAR = -(LAM_SCALAR**2) / (1 + 0.25 * LAM_SCALAR**2)


def check(fn):
    CHECKS[fn.__name__.removeprefix("check_")] = fn
    return fn


def scalar_quadratic():
    """``T(lam) = 0.5 + 0.25 lam`` (pencil ``-1 + 0.5 lam + 0.25 lam^2``)."""
    return build_quadratic(-1.0, 0.5, 0.25)


@check
def check_solve_linear_permutation():
    x = solve_linear([[0, 1], [1, 0]], [[2.0], [3.0]])
    return float(np.abs(x[:, 0] - [3.0, 2.0]).max()), 1e-15, "le"


@check
def check_svd_reconstruction():
    a = np.array([[0, 2], [1, 0]], dtype=complex)
    u, s, v = svd(a)
    err = np.linalg.norm(a - u @ np.diag(s) @ v.conj().T) + abs(s[0] - 2) + abs(s[1] - 1)
    return float(err), 1e-12, "le"


@check
def check_eig_rotation():
    vals, _, _ = eig_dense([[0, 1], [-1, 0]])
    vals = sorted(vals, key=lambda z: z.imag)
    return float(np.abs(np.array(vals) - [-1j, 1j]).max()), 1e-12, "le"


@check
def check_cauchy_derivative():
    fam = build_polynomial([0.5, 0.25])
    d = fam.cauchy_derivative(1.0, 0.5, 32)[0, 0]
    return abs(d - 0.25), 1e-12, "le"


@check
def check_generalized_scalar():
    pairs = solve_in_contour(build_generalized(1, 1, 2), Contour(1, 0.5))
    return abs(pairs[0].lam - 1) if len(pairs) == 1 else math.inf, 1e-10, "le"


@check
def check_scalar_quadratic_root():
    pairs = solve_in_contour(scalar_quadratic(), Contour(1, 1))
    return abs(pairs[0].lam - LAM_SCALAR) if len(pairs) == 1 else math.inf, 1e-10, "le"


@check
def check_first_order_slope():
    fam = scalar_quadratic()
    cluster = extract_cluster(solve_in_contour(fam, Contour(1, 1)), LAM_SCALAR)
    slope = first_order_slope(perturb_linear(fam, build_constant(1.0)), cluster)
    return abs(slope - SLOPE_SCALAR) / abs(SLOPE_SCALAR), 1e-8, "le"


@check
def check_companion_equivalence():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(5):
        a, b, c = (rng.standard_normal((3, 3)) for _ in range(3))
        ref = oracles.quadratic_pencil_eigenvalues(a, b, c)
        contour = Contour(0, 1.5 * float(np.median(np.abs(ref))), 128)
        inside = [z for z in ref if contour.contains(z)]
        got = [p.lam for p in solve_in_contour(build_quadratic(a, b, c), contour)]
        if len(got) != len(inside):
            return math.inf, 1e-8, "le"
        for z in inside:
            worst = max(worst, min(abs(z - g) for g in got))
    return worst, 1e-8, "le"


@check
def check_moment_pole():
    m0 = contour_moments(build_constant(0.5), Contour(2, 0.5)).moments[0][0, 0]
    return abs(m0 + 2), 1e-10, "le"


@check
def check_moment_empty():
    m0 = contour_moments(build_constant(0.5), Contour(0, 0.5)).moments[0]
    return norm2(m0), 1e-10, "le"


@check
def check_residue_limit():
    fam = build_polynomial([0.5, 0.25])
    m0 = contour_moments(fam, Contour(LAM_SCALAR, 0.5)).moments[0][0, 0]
    ref = oracles.residue_limit(fam, LAM_SCALAR)[0, 0]
    return abs(m0 - ref), 1e-8, "le"


@check
def check_pole_rank_double():
    has, rank = pole_indicator(build_constant(0.5 * np.eye(2)), Contour(2, 0.5))
    return abs(rank - 2) + (0 if has else 1), 0, "le"


@check
def check_perturbation_bound():
    h = 0.1
    exact = abs(1 / (0.5 - h) - 2)
    bound, valid = perturbation_bound(build_constant(0.5), build_constant(0.5 + h), 1.0)
    # the scalar case is tight: bound == exact up to roundoff
    return (exact - bound) / bound if valid else math.inf, 1e-12, "le"


@check
def check_osborn_diagonal():
    h = 1e-3
    k = np.diag([1.0, 0.5])
    kn = k.copy()
    kn[0, 0] += h
    mu_hat = osborn_linear_correction(k, kn, linear_cluster(k, 1.0))
    return abs(mu_hat - (1 + h)), 1e-15, "le"


@check
def check_osborn_nonnormal():
    k = np.array([[1.0, 1.0], [0.0, 0.5]])
    cluster = linear_cluster(k, 1.0)
    worst = 0.0
    for h in (1e-2, 1e-3, 1e-4):
        kn = k.copy()
        kn[1, 0] += h
        exact = max(np.linalg.eigvals(kn), key=lambda z: z.real)
        worst = max(worst, abs(osborn_linear_correction(k, kn, cluster) - exact) / h**2)
    return worst, 10.0, "le"


@check
def check_resonance_well():
    ref = oracles.well_resonance(1.0)
    fam = build_resonance_1d(PiecewiseConstant.constant(1.0), 128)
    pairs = solve_in_contour(fam, Contour(ref, 1.0))
    return min((abs(p.lam - ref) for p in pairs), default=math.inf), 1e-4, "le"


@check
def check_remainder_order():
    fam = scalar_quadratic()
    fh = perturb_linear(fam, build_constant(1.0))
    contour = Contour(LAM_SCALAR, 0.5)
    cluster = extract_cluster(solve_in_contour(fam, contour), LAM_SCALAR)
    hs = (1e-1, 1e-2, 1e-3, 1e-4)
    errs = [abs(track(fh, cluster, h, contour).lam_mean - nonlinear_correction(fh, cluster, h).predicted) for h in hs]
    return fit_loglog_slope(hs, errs), 1.9, "ge"


@check
def check_fd_slope():
    fam = scalar_quadratic()
    fh = perturb_linear(fam, build_constant(1.0))
    contour = Contour(LAM_SCALAR, 0.5)
    cluster = extract_cluster(solve_in_contour(fam, contour), LAM_SCALAR)
    step = 1e-5
    fd = (track(fh, cluster, step, contour).lam_mean - track(fh, cluster, -step, contour).lam_mean) / (2 * step)
    slope = first_order_slope(fh, cluster)
    return abs(fd - slope) / abs(slope), 1e-6, "le"


@check
def check_biorthogonality():
    fam = build_constant(0.5 * np.eye(2))
    cluster = extract_cluster(solve_in_contour(fam, Contour(2, 0.5)), 2.0)
    return float(np.abs(cluster.phi_dual.conj().T @ cluster.phi - np.eye(2)).max()), 1e-8, "le"


@check
def check_dtcond_guard():
    lam0 = 2.0
    fam = build_polynomial([2 / lam0, -1 / lam0**2])
    fh = perturb_linear(fam, build_constant(1.0))
    cluster = extract_cluster(solve_in_contour(fam, Contour(lam0, 0.5)), lam0)
    try:
        nonlinear_correction(fh, cluster, 1e-3)
    except DenominatorNearSingular:
        return 0.0, 0.0, "le"
    return 1.0, 0.0, "le"


@check
def check_defective_guard():
    fam = build_constant([[0.5, 1.0], [0.0, 0.5]])
    pairs = solve_in_contour(fam, Contour(2, 0.5))
    try:
        extract_cluster(pairs, 2.0)
    except DefectiveCluster:
        return 0.0, 0.0, "le"
    return 1.0, 0.0, "le"


def passed(measured: float, threshold: float, mode: str) -> bool:
    if mode == "le":
        return bool(measured <= threshold)
    return bool(measured >= threshold)


def run(only: str | None = None, tol_scale: float = 1.0) -> list:
    """Run the checks; returns ``[(name, ok, measured, threshold, note)]``.

    ``tol_scale`` tightens (< 1) or loosens (> 1) every threshold; it exists
    to exercise the failure path.
    """
    names = [only] if only else list(CHECKS)
    out = []
    for name in names:
        if name not in CHECKS:
            raise KeyError(name)
        try:
            measured, threshold, mode = CHECKS[name]()
        except Exception as exc:  # a crashing check is a failing check
            out.append((name, False, math.nan, math.nan, f"{type(exc).__name__}: {exc}"))
            continue
        if tol_scale != 1.0:
            threshold = threshold * tol_scale if mode == "le" else threshold / tol_scale
            if threshold == 0 and tol_scale < 1:
                threshold = -1.0  # zero thresholds cannot be tightened by scaling
        out.append((name, passed(measured, threshold, mode), float(measured), float(threshold), ""))
    return out
