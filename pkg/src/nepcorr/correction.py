"""First-order eigenvalue corrections.

``osborn_linear_correction`` predicts the mean of the perturbed eigenvalues of
a compact operator; ``nonlinear_correction`` predicts the perturbed nonlinear
eigenvalue

    lam_h ~ lam0 + N / D,
    N = lam0^2/m * sum_j <(T_0(lam0) - T_h(lam0)) phi_j, phi_j*>,
    D = 1 + lam0^2/m * sum_j <DT_0(lam0) phi_j, phi_j*>,

valid while ``D != 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DenominatorNearSingular, NotLinearFamily, ZeroEigenvalue
from .family import PerturbationFamily
from .linalg import as_matrix, eig_dense
from .solver import NonlinearEigenpair, SpectralCluster, extract_cluster

COND_TOL = 1e-8


def cluster_pairing(cluster: SpectralCluster, op: np.ndarray) -> complex:
    """``(1/m) sum_j <op phi_j, phi_j*>``, accumulated in column order."""
    acc = 0j
    for j in range(cluster.m):
        acc += np.vdot(cluster.phi_dual[:, j], op @ cluster.phi[:, j])
    return complex(acc / cluster.m)


@dataclass(frozen=True)
class CorrectionReport:
    lam0: complex
    m: int
    numerator: complex
    denominator: complex
    predicted: complex
    h: float
    condition_ok: bool

    @property
    def shift(self) -> complex:
        return self.predicted - self.lam0


def nonlinear_correction(
    fh: PerturbationFamily,
    cluster: SpectralCluster,
    h: float,
    cond_tol: float = COND_TOL,
    strict: bool = True,
) -> CorrectionReport:
    """First-order prediction of ``lam_h`` from the unperturbed cluster.

    The perturbation is evaluated at the unperturbed ``lam0``.  With
    ``strict=False`` a vanishing denominator gives ``condition_ok=False`` and
    ``predicted=nan`` instead of raising.
    """
    lam0 = complex(cluster.lam0)
    if lam0 == 0:
        raise ZeroEigenvalue("the correction needs a nonzero eigenvalue")
    t0 = fh.base.evaluate(lam0)
    th = fh.evaluate(h, lam0)
    dt0 = fh.base.derivative(lam0)
    num = lam0**2 * cluster_pairing(cluster, t0 - th)
    den = 1 + lam0**2 * cluster_pairing(cluster, dt0)
    ok = abs(den) > cond_tol
    if not ok and strict:
        raise DenominatorNearSingular(
            f"|1 + lam0^2 <DT_0 phi, phi*>| = {abs(den):.3e} <= {cond_tol:g} at lam0={lam0}"
        )
    predicted = lam0 + num / den if ok else complex("nan+nanj")
    return CorrectionReport(lam0, cluster.m, num, den, predicted, float(h), ok)


def first_order_slope(fh: PerturbationFamily, cluster: SpectralCluster, cond_tol: float = COND_TOL) -> complex:
    """The coefficient of ``h`` in ``lam_h = lam0 + h lam1 + o(h)`` for ``T_h = T_0 + h T1``."""
    if not fh.is_linear:
        raise NotLinearFamily("first_order_slope needs a linear-in-h perturbation")
    lam0 = complex(cluster.lam0)
    if lam0 == 0:
        raise ZeroEigenvalue("the correction needs a nonzero eigenvalue")
    den = 1 + lam0**2 * cluster_pairing(cluster, fh.base.derivative(lam0))
    if abs(den) <= cond_tol:
        raise DenominatorNearSingular(f"|denominator| = {abs(den):.3e} at lam0={lam0}")
    return -(lam0**2) * cluster_pairing(cluster, fh.direction.evaluate(lam0)) / den


def linear_cluster(k, mu: complex, tol: float = 1e-8) -> SpectralCluster:
    """Cluster of the constant family ``T = K`` at standard eigenvalue ``mu`` (``lam0 = 1/mu``).

    Built from the dense eigendecomposition; eigenvalues within ``tol`` of
    ``mu`` (relative) form the group.
    """
    k = as_matrix(k, name="K")
    values, right, left = eig_dense(k)
    mu = complex(mu)
    if mu == 0:
        raise ZeroEigenvalue("mu must be nonzero")
    sel = [i for i, v in enumerate(values) if abs(v - mu) <= tol * (1 + abs(mu))]
    lam0 = 1 / mu
    pairs = [NonlinearEigenpair(lam0, right[:, i], left[:, i], 0.0, 0.0) for i in sel]
    return extract_cluster(pairs, lam0, group_tol=1e-12 * (1 + abs(lam0)))


def osborn_linear_correction(k, k_n, cluster: SpectralCluster) -> complex:
    """Predicted mean of the ``m`` eigenvalues of ``K_n`` near ``mu = 1/lam0``.

    ``mu_hat = mu - (1/m) sum_j <(K - K_n) phi_j, phi_j*>``.
    """
    k = as_matrix(k, name="K")
    k_n = as_matrix(k_n, name="K_n")
    mu = 1 / complex(cluster.lam0)
    return mu - cluster_pairing(cluster, k - k_n)
