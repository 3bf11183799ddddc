import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from nepcorr.errors import SingularMatrix
from nepcorr.linalg import (
    as_matrix,
    eig_dense,
    norm2,
    pairing,
    singular_values,
    smallest_singular_vectors,
    solve_linear,
    svd,
)

from conftest import random_complex


def test_permutation_solve():
    x = solve_linear([[0, 1], [1, 0]], [[2.0], [3.0]])
    np.testing.assert_allclose(x[:, 0], [3.0, 2.0], atol=1e-15)


def test_vector_rhs_keeps_shape():
    x = solve_linear(np.diag([2.0, 4.0]), np.array([2.0, 4.0]))
    assert x.shape == (2,)
    np.testing.assert_allclose(x, [1, 1])


@pytest.mark.parametrize("a", [np.zeros((2, 2)), [[1, 2], [2, 4]]])
def test_singular_raises(a):
    with pytest.raises(SingularMatrix):
        solve_linear(a, np.eye(2))


def test_as_matrix_shapes_and_nonfinite():
    assert as_matrix(2.0).shape == (1, 1)
    assert as_matrix([1.0, 2.0]).shape == (2, 1)
    with pytest.raises(ValueError):
        as_matrix(np.zeros((0, 2)))
    with pytest.raises(ValueError):
        as_matrix([[np.nan]])


def test_svd_example():
    u, s, v = svd([[0, 2], [1, 0]])
    np.testing.assert_allclose(s, [2, 1])
    np.testing.assert_allclose(u @ np.diag(s) @ v.conj().T, [[0, 2], [1, 0]], atol=1e-14)


def test_svd_rank_truncation():
    u, s, v = svd(np.outer([1, 2, 3], [1, 1, 0]))
    assert s.shape == (1,) and u.shape == (3, 1) and v.shape == (3, 1)
    _, s0, _ = svd(np.zeros((3, 3)))
    assert s0.size == 0


def test_eig_rotation():
    vals, right, left = eig_dense([[0, 1], [-1, 0]])
    np.testing.assert_allclose(sorted(vals, key=lambda z: z.imag), [-1j, 1j], atol=1e-14)
    np.testing.assert_allclose(np.linalg.norm(right, axis=0), 1)
    np.testing.assert_allclose(np.linalg.norm(left, axis=0), 1)


def test_smallest_singular_vectors():
    a = np.diag([3.0, 1e-3, 2.0])
    sigma, left, right = smallest_singular_vectors(a, 1)
    assert sigma[0] == pytest.approx(1e-3)
    assert abs(abs(left[1, 0]) - 1) < 1e-14 and abs(abs(right[1, 0]) - 1) < 1e-14


def test_norm2_and_pairing():
    assert norm2(np.diag([1, -5, 2])) == pytest.approx(5)
    f, g = np.array([1, 1j]), np.array([1j, 2])
    assert pairing(f, g) == pytest.approx(np.conj(g) @ f)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(0, 10**6))
def test_solve_residual(n, seed):
    rng = np.random.default_rng(seed)
    a = random_complex(rng, n) + 3 * n * np.eye(n)  # diagonally dominant, well conditioned
    b = random_complex(rng, n, 2)
    x = solve_linear(a, b)
    assert np.linalg.norm(a @ x - b) <= 1e-12 * np.linalg.norm(a) * np.linalg.norm(x) + 1e-13


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 7), st.integers(1, 7), st.integers(0, 10**6))
def test_svd_reconstruction_and_oracle(n, k, seed):
    a = random_complex(np.random.default_rng(seed), n, k)
    u, s, v = svd(a)
    np.testing.assert_allclose(u @ np.diag(s) @ v.conj().T, a, atol=1e-12 * s[0])
    np.testing.assert_allclose(u.conj().T @ u, np.eye(s.size), atol=1e-12)
    np.testing.assert_allclose(s, scipy.linalg.svdvals(a)[: s.size], rtol=1e-12)
    np.testing.assert_allclose(singular_values(a), scipy.linalg.svdvals(a), rtol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(0, 10**6))
def test_eig_left_right(n, seed):
    a = random_complex(np.random.default_rng(seed), n)
    vals, right, left = eig_dense(a)
    scale = np.linalg.norm(a)
    for j in range(n):
        assert np.linalg.norm(a @ right[:, j] - vals[j] * right[:, j]) <= 1e-11 * scale
        assert np.linalg.norm(left[:, j].conj() @ a - vals[j] * left[:, j].conj()) <= 1e-11 * scale
    # trace and determinant oracles
    assert abs(vals.sum() - np.trace(a)) <= 1e-10 * (1 + scale)


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (3, 3), elements=st.floats(-10, 10)), arrays(np.float64, 3, elements=st.floats(-10, 10)),
       arrays(np.float64, 3, elements=st.floats(-10, 10)))
def test_adjoint_identity(a, f, g):
    # <A f, g> == <f, A^H g>
    lhs = pairing(a @ f, g)
    rhs = pairing(f, a.conj().T @ g)
    assert abs(lhs - rhs) <= 1e-9 * (1 + np.abs(a).max() * np.abs(f).max() * np.abs(g).max())
