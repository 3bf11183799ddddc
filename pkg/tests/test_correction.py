import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nepcorr import (
    Contour,
    build_constant,
    build_polynomial,
    extract_cluster,
    first_order_slope,
    linear_cluster,
    nonlinear_correction,
    osborn_linear_correction,
    perturb_general,
    perturb_linear,
    solve_in_contour,
    track,
)
from nepcorr.errors import DefectiveCluster, DenominatorNearSingular, NotLinearFamily, ZeroEigenvalue
from nepcorr.solver import SpectralCluster

from conftest import LAM_SCALAR, random_complex


def _scalar_setup(fam):
    fh = perturb_linear(fam, build_constant(1.0))
    contour = Contour(LAM_SCALAR, 0.5)
    return fh, contour, extract_cluster(solve_in_contour(fam, contour), LAM_SCALAR)


def test_slope_implicit_differentiation(scalar_quadratic):
    # F(lam, h) = 1 - lam (0.5 + h + 0.25 lam) = 0  =>  dlam/dh = -lam^2 / (1 + 0.25 lam^2) at h=0
    fh, _, cluster = _scalar_setup(scalar_quadratic)
    expected = -(LAM_SCALAR**2) / (1 + 0.25 * LAM_SCALAR**2)
    assert abs(first_order_slope(fh, cluster) - expected) <= 1e-8 * abs(expected)


def test_prediction_matches_slope_for_linear_family(scalar_quadratic):
    fh, _, cluster = _scalar_setup(scalar_quadratic)
    rep = nonlinear_correction(fh, cluster, 1e-3)
    assert rep.condition_ok and rep.m == 1
    assert abs(rep.shift - 1e-3 * first_order_slope(fh, cluster)) <= 1e-15


def test_remainder_is_second_order(scalar_quadratic):
    fh, contour, cluster = _scalar_setup(scalar_quadratic)
    errs = []
    for h in (1e-2, 1e-3):
        exact = track(fh, cluster, h, contour).lam_mean
        # closed-form root of 1 - lam(0.5 + h) - 0.25 lam^2 closest to lam0
        roots = np.roots([-0.25, -(0.5 + h), 1])
        assert abs(exact - roots[np.argmin(abs(roots - LAM_SCALAR))]) <= 1e-12
        errs.append(abs(exact - nonlinear_correction(fh, cluster, h).predicted))
    assert 50 < errs[0] / errs[1] < 200


def test_dtcond_violation():
    lam0 = 2.0
    fam = build_polynomial([2 / lam0, -1 / lam0**2])
    fh = perturb_linear(fam, build_constant(1.0))
    cluster = extract_cluster(solve_in_contour(fam, Contour(lam0, 0.5)), lam0)
    with pytest.raises(DenominatorNearSingular):
        nonlinear_correction(fh, cluster, 1e-3)
    with pytest.raises(DenominatorNearSingular):
        first_order_slope(fh, cluster)
    rep = nonlinear_correction(fh, cluster, 1e-3, strict=False)
    assert not rep.condition_ok and np.isnan(rep.predicted.real)


def test_slope_needs_linear_family(scalar_quadratic):
    fh = perturb_general(scalar_quadratic, lambda h, lam: scalar_quadratic(lam) + h**2)
    _, _, cluster = _scalar_setup(scalar_quadratic)
    with pytest.raises(NotLinearFamily):
        first_order_slope(fh, cluster)
    # the general correction still applies: an O(h^2) perturbation has a tiny first-order shift
    assert abs(nonlinear_correction(fh, cluster, 1e-3).shift) < 1e-5


def test_zero_eigenvalue():
    cluster = SpectralCluster(0j, 1, np.ones((1, 1)), np.ones((1, 1)), True, ())
    with pytest.raises(ZeroEigenvalue):
        nonlinear_correction(perturb_linear(build_constant(0.5), build_constant(1.0)), cluster, 0.1)


def test_osborn_diagonal_exact():
    h = 1e-3
    k = np.diag([1.0, 0.5])
    kn = k.copy()
    kn[0, 0] += h
    assert abs(osborn_linear_correction(k, kn, linear_cluster(k, 1.0)) - (1 + h)) <= 1e-15


def test_osborn_nonnormal_second_order():
    k = np.array([[1.0, 1.0], [0.0, 0.5]])
    cluster = linear_cluster(k, 1.0)
    ratios = []
    for h in (1e-2, 1e-3, 1e-4):
        kn = k.copy()
        kn[1, 0] += h
        exact = max(np.linalg.eigvals(kn), key=lambda z: z.real)
        ratios.append(abs(osborn_linear_correction(k, kn, cluster) - exact) / h**2)
    assert max(ratios) <= 10
    # exact: mu = 0.75 + sqrt(0.0625 + h) = 1 + 2h - 8h^2 + ..., prediction 1 + 2h
    assert abs(ratios[-1] - 8.0) < 0.05


def test_osborn_semisimple_cluster_mean():
    k = np.diag([1.0, 1.0, 0.2])
    e = np.random.default_rng(0).standard_normal((3, 3))
    h = 1e-4
    cluster = linear_cluster(k, 1.0)
    assert cluster.m == 2
    mean = np.sort(np.linalg.eigvals(k + h * e).real)[-2:].mean()
    assert abs(osborn_linear_correction(k, k + h * e, cluster) - mean) <= 10 * h**2


def test_linear_cluster_defective():
    with pytest.raises(DefectiveCluster):
        linear_cluster([[1.0, 1.0], [0.0, 1.0]], 1.0, tol=1e-6)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_nonlinear_reduces_to_linear(seed):
    # for T = K the nonlinear prediction is 1/mu_hat to first order
    rng = np.random.default_rng(seed)
    k = np.diag([1.0, 0.4, 0.1]) + 0.1 * rng.standard_normal((3, 3))
    mu = max(np.linalg.eigvals(k), key=abs)
    e = rng.standard_normal((3, 3))
    cluster = linear_cluster(k, mu)
    fh = perturb_linear(build_constant(k), build_constant(e))
    for h in (1e-3, 1e-4):
        lam_pred = nonlinear_correction(fh, cluster, h).predicted
        mu_hat = osborn_linear_correction(k, k + h * e, cluster)
        assert abs(lam_pred - 1 / mu_hat) <= 50 * h**2 * (1 + np.linalg.norm(e)) ** 2


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_prediction_invariant_to_basis_change(seed):
    rng = np.random.default_rng(seed)
    fam = build_constant(0.5 * np.eye(3) + np.diag([0, 0, 0.3]))
    fh = perturb_linear(fam, build_polynomial([random_complex(rng, 3), random_complex(rng, 3)]))
    cluster = extract_cluster(solve_in_contour(fam, Contour(2, 0.5)), 2.0)
    assert cluster.m == 2
    x = random_complex(rng, 2) + 2 * np.eye(2)
    moved = SpectralCluster(
        cluster.lam0, cluster.m, cluster.phi @ x, cluster.phi_dual @ np.linalg.inv(x).conj().T,
        True, cluster.members,
    )
    np.testing.assert_allclose(moved.phi_dual.conj().T @ moved.phi, np.eye(2), atol=1e-10)
    a = nonlinear_correction(fh, cluster, 1e-2).predicted
    b = nonlinear_correction(fh, moved, 1e-2).predicted
    assert abs(a - b) <= 1e-12 * abs(a)


@settings(max_examples=25, deadline=None)
@given(st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3, allow_nan=False, allow_infinity=False))
def test_prediction_invariant_to_rescaling(c):
    fam = build_polynomial([0.5 * np.eye(2) + np.diag([0, 0.4]), 0.1 * np.ones((2, 2))])
    contour = Contour(1.8, 0.3)
    pairs = solve_in_contour(fam, contour)
    cluster = extract_cluster(pairs, pairs[0].lam)
    fh = perturb_linear(fam, build_constant([[0.2, 1.0], [-0.3, 0.1]]))
    scaled = SpectralCluster(cluster.lam0, 1, cluster.phi * c, cluster.phi_dual / np.conj(c), True, cluster.members)
    a = nonlinear_correction(fh, cluster, 1e-2).predicted
    assert abs(nonlinear_correction(fh, scaled, 1e-2).predicted - a) <= 1e-12 * abs(a)
