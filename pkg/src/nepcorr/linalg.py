"""Dense complex linear algebra kernel.

Matrices are plain ``numpy`` arrays of dtype ``complex128``; the space X and
its dual are both C^n with the pairing ``<f, g*> = g*^H f``.  The heavy
lifting (LU, SVD, QR iteration) is delegated to LAPACK through numpy/scipy;
this module fixes the thresholds and error semantics the rest of the package
relies on.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg as sla

from .errors import NoConvergence, SingularMatrix

PIVOT_RTOL = 1e-14
RANK_RTOL = 1e-10
EIG_MAX_DIM = 200


def as_matrix(a, *, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a finite 2-D complex128 array (copy), validating shape."""
    m = np.array(a, dtype=np.complex128)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    elif m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def pairing(f: np.ndarray, g: np.ndarray) -> complex:
    """Duality pairing ``<f, g*> = g^H f``."""
    return complex(np.vdot(g, f))


def solve_linear(a, b) -> np.ndarray:
    """Solve ``A X = B`` by LU with partial pivoting.

    Raises
    ------
    SingularMatrix
        If the smallest pivot magnitude is below ``1e-14 * max|A_ij|``.
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"A must be square, got shape {a.shape}")
    vector_rhs = b.ndim == 1
    if vector_rhs:
        b = b.reshape(-1, 1)
    if b.shape[0] != a.shape[0]:
        raise ValueError(f"B has {b.shape[0]} rows, A is {a.shape[0]}x{a.shape[0]}")

    amax = float(np.max(np.abs(a)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lu, piv = sla.lu_factor(a, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if amax == 0.0 or float(pivots.min()) < PIVOT_RTOL * amax:
        raise SingularMatrix(
            f"smallest pivot {pivots.min():.3e} below {PIVOT_RTOL:g} * max|A| = {amax:.3e}"
        )
    x = sla.lu_solve((lu, piv), b, check_finite=False)
    return x[:, 0] if vector_rhs else x


def svd(a, rtol: float = RANK_RTOL):
    """Thin SVD truncated to numerical rank.

    Returns ``(U, S, V)`` with ``A ~= U @ diag(S) @ V^H``; singular values
    below ``rtol * S[0]`` are dropped, so a zero matrix yields ``r = 0``.
    """
    a = np.asarray(a, dtype=np.complex128)
    try:
        u, s, vh = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"SVD did not converge: {exc}") from exc
    if s.size == 0 or s[0] == 0.0:
        r = 0
    else:
        r = int(np.count_nonzero(s >= rtol * s[0]))
    return u[:, :r], s[:r], vh[:r].conj().T


def singular_values(a) -> np.ndarray:
    try:
        return np.linalg.svd(np.asarray(a, dtype=np.complex128), compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"SVD did not converge: {exc}") from exc


def norm2(a) -> float:
    """Spectral norm (largest singular value)."""
    s = singular_values(a)
    return float(s[0]) if s.size else 0.0


def smallest_singular_vectors(a, k: int = 1):
    """Return ``(sigma, left, right)`` for the ``k`` smallest singular triplets.

    Columns are ordered from the smallest singular value upwards.
    """
    a = np.asarray(a, dtype=np.complex128)
    try:
        u, s, vh = np.linalg.svd(a)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"SVD did not converge: {exc}") from exc
    idx = np.arange(s.size - 1, s.size - 1 - k, -1)
    return s[idx], u[:, idx], vh[idx].conj().T


def eig_dense(a):
    """Eigenvalues with unit-norm right and left eigenvectors.

    ``values[i]`` pairs with ``right[:, i]`` (A v = mu v) and ``left[:, i]``
    (w^H A = mu w^H).  Defective matrices return (nearly) parallel vectors.
    """
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"eig_dense needs a square matrix, got {a.shape}")
    if a.shape[0] > EIG_MAX_DIM:
        raise ValueError(f"eig_dense is limited to {EIG_MAX_DIM}x{EIG_MAX_DIM}")
    try:
        w, vl, vr = sla.eig(a, left=True, right=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"QR iteration failed: {exc}") from exc
    vr = vr / np.linalg.norm(vr, axis=0)
    vl = vl / np.linalg.norm(vl, axis=0)
    return w.astype(np.complex128), vr, vl
