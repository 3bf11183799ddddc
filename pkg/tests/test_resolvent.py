import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nepcorr import (
    Contour,
    apply_resolvent,
    build_constant,
    build_generalized,
    build_polynomial,
    contour_moments,
    perturb_linear,
    perturbation_bound,
    pole_indicator,
)
from nepcorr.errors import NodeOnPole, OutOfRegion, SingularMatrix
from nepcorr import oracles
from nepcorr.resolvent import guarded_node_solve, system_matrix

from conftest import LAM_SCALAR, random_complex


def test_contour_validation():
    with pytest.raises(ValueError):
        Contour(0, 1, 15)
    with pytest.raises(ValueError):
        Contour(0, 1, 8)
    with pytest.raises(ValueError):
        Contour(0, -1)
    c = Contour(1j, 2, 16)
    assert len(c.points()) == 16 and np.allclose(np.abs(c.points() - 1j), 2)
    assert c.contains(1j + 1.9) and not c.contains(1j + 2)
    assert c.refined().nodes == 32


def test_contour_outside_region():
    with pytest.raises(OutOfRegion):
        Contour(0.2, 0.5).check_region(build_generalized(1, 1, 2))


def test_scalar_pole_moment():
    # T = 0.5: R(lam) = 1/(1 - lam/2), pole at 2 with residue -2
    table = contour_moments(build_constant(0.5), Contour(2, 0.5))
    assert abs(table.moments[0][0, 0] + 2) <= 1e-10
    assert np.abs(table.moments[1]).max() <= 1e-10  # simple pole: no higher Laurent terms


def test_empty_contour_moment():
    table = contour_moments(build_constant(0.5), Contour(0, 0.5))
    assert all(np.linalg.norm(m, 2) <= 1e-10 for m in table.moments)
    assert pole_indicator(build_constant(0.5), Contour(0, 0.5)) == (False, 0)


def test_pole_indicator_double():
    assert pole_indicator(build_constant(0.5 * np.eye(2)), Contour(2, 0.5)) == (True, 2)


def test_pole_indicator_jordan_has_higher_moment():
    fam = build_constant([[0.5, 1.0], [0.0, 0.5]])
    table = contour_moments(fam, Contour(2, 0.5))
    assert np.abs(table.moments[1]).max() > 1e-3  # Jordan chain: second-order pole


def test_residue_limit_oracle():
    fam = build_polynomial([0.5, 0.25])
    m0 = contour_moments(fam, Contour(LAM_SCALAR, 0.5)).moments[0]
    np.testing.assert_allclose(m0, oracles.residue_limit(fam, LAM_SCALAR), atol=1e-8)


def test_apply_resolvent_and_node_guard():
    fam = build_constant(0.5)
    assert apply_resolvent(fam, 1.0, np.array([1.0]))[0] == pytest.approx(2.0)
    with pytest.raises(SingularMatrix):
        apply_resolvent(fam, 2.0, np.array([1.0]))
    with pytest.raises(NodeOnPole):
        guarded_node_solve(fam, 2.0, np.array([[1.0]]))


def test_perturbation_bound_scalar():
    h = 0.1
    exact = abs(1 / (0.5 - h) - 2)
    bound, valid = perturbation_bound(build_constant(0.5), build_constant(0.5 + h), 1.0)
    assert valid and bound >= exact * (1 - 1e-12)


def test_perturbation_bound_invalid():
    assert perturbation_bound(build_constant(0.5), build_constant(1.5), 1.0) == (None, False)


@pytest.mark.parametrize("family_seed", range(3))
def test_perturbation_bound_random_points(family_seed):
    rng = np.random.default_rng(family_seed)
    base = build_polynomial([random_complex(rng, 3, scale=0.3), random_complex(rng, 3, scale=0.3)])
    fh = perturb_linear(base, build_constant(random_complex(rng, 3, scale=0.1))).at(0.05)
    checked = 0
    for lam in rng.standard_normal(20) + 1j * rng.standard_normal(20):
        bound, valid = perturbation_bound(base, fh, lam)
        if not valid:
            continue
        r0 = np.linalg.inv(system_matrix(base, lam))
        rh = np.linalg.inv(system_matrix(fh, lam))
        assert np.linalg.norm(rh - r0, 2) <= bound * (1 + 1e-10)
        checked += 1
    assert checked >= 10


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([32, 64, 128]))
def test_m0_rank_equals_enclosed_count(seed, nodes):
    # outside poles alias as (r/d)^N; N >= 32 puts that below the rank floor
    rng = np.random.default_rng(seed)
    vals = np.array([0.5, 2.0, 10.0])  # eigenvalues 1/vals = 2, 0.5, 0.1 of a diagonalizable T
    q = random_complex(rng, 3) + 3 * np.eye(3)
    t = q @ np.diag(vals) @ np.linalg.inv(q)
    has, rank = pole_indicator(build_constant(t), Contour(2, 0.5, nodes))
    assert has and rank == 1
