"""Independent reference computations used by the test-suite and ``nep verify``.

None of these go through the contour solver: polynomial problems are
linearized and handed to the dense eigensolver, the constant-well resonances
come from the transfer-matrix equation, and residues from a direct limit.
"""

from __future__ import annotations

import cmath
import math
from typing import Sequence

import numpy as np

from .errors import NoConvergence
from .family import OperatorFamily
from .linalg import as_matrix, eig_dense, solve_linear


def companion_eigenvalues(coeffs: Sequence) -> np.ndarray:
    """Finite eigenvalues of ``P(lam) = sum_k lam**k coeffs[k]`` (leading term invertible)."""
    mats = [as_matrix(c) for c in coeffs]
    d = len(mats) - 1
    n = mats[0].shape[0]
    if d < 1:
        raise ValueError("need a polynomial of degree >= 1")
    lead = mats[-1]
    comp = np.zeros((d * n, d * n), dtype=np.complex128)
    comp[: (d - 1) * n, n:] = np.eye((d - 1) * n)
    for k in range(d):
        comp[(d - 1) * n :, k * n : (k + 1) * n] = -solve_linear(lead, mats[k])
    values, _, _ = eig_dense(comp)
    return values


def system_coefficients(t_coeffs: Sequence) -> list:
    """Coefficients of ``S(lam) = I - lam T(lam)`` for polynomial ``T``."""
    mats = [as_matrix(c) for c in t_coeffs]
    n = mats[0].shape[0]
    return [np.eye(n, dtype=np.complex128)] + [-m for m in mats]


def quadratic_pencil_eigenvalues(a, b, c) -> np.ndarray:
    """Roots of ``det(A + lam B + lam^2 C) = 0`` via the companion matrix."""
    return companion_eigenvalues([a, b, c])


def scalar_quadratic_roots(a: complex, b: complex, c: complex) -> tuple:
    """Roots of ``a + b lam + c lam^2``."""
    disc = cmath.sqrt(b * b - 4 * a * c)
    return ((-b + disc) / (2 * c), (-b - disc) / (2 * c))


def well_resonance_function(lam: complex, eta0: float) -> complex:
    """``exp(2 i kappa) ((kappa - k)/(kappa + k))^2 - 1``, ``kappa = sqrt(lam (1 + eta0))``."""
    k = cmath.sqrt(lam)
    kappa = cmath.sqrt(1 + eta0) * k
    return cmath.exp(2j * kappa) * ((kappa - k) / (kappa + k)) ** 2 - 1


def well_resonance_guess(eta0: float, index: int) -> complex:
    """Closed-form root of the constant-well equation with branch ``index``."""
    s = cmath.sqrt(1 + eta0)
    kappa = (2 * math.pi * index - 2j * cmath.log((s + 1) / (s - 1))) / 2
    return (kappa / s) ** 2


def well_resonance(eta0: float, index: int = 1, tol: float = 1e-12, max_iter: int = 60) -> complex:
    """Resonance of the unit-width constant well by complex Newton.

    The derivative is a central difference; this only affects the rate, not
    the converged root.
    """
    lam = well_resonance_guess(eta0, index)
    f = well_resonance_function
    for _ in range(max_iter):
        val = f(lam, eta0)
        if abs(val) <= tol:
            return lam
        step = 1e-7 * max(1.0, abs(lam))
        df = (f(lam + step, eta0) - f(lam - step, eta0)) / (2 * step)
        lam = lam - val / df
    if abs(f(lam, eta0)) <= tol:
        return lam
    raise NoConvergence(f"well resonance Newton stalled at {lam}")


def residue_limit(family: OperatorFamily, lam0: complex, eps: float = 1e-6, samples: int = 4) -> np.ndarray:
    """Residue of ``R`` at ``lam0`` as the limit of ``(lam - lam0) R(lam)``.

    Averaging over equally spaced directions cancels the Laurent terms of
    order below ``samples``.
    """
    n = family.n
    eye = np.eye(n, dtype=np.complex128)
    acc = np.zeros_like(eye)
    for j in range(samples):
        d = eps * cmath.exp(2j * math.pi * (j + 0.125) / samples)
        lam = lam0 + d
        acc += d * solve_linear(eye - lam * family.evaluate(lam), eye)
    return acc / samples
