"""Modified resolvent ``R(lam) = (I - lam T(lam))^{-1}`` and its contour moments."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import NodeOnPole, OutOfRegion, SingularMatrix
from .family import OperatorFamily
from .linalg import norm2, singular_values, solve_linear, svd

log = logging.getLogger(__name__)

NODE_POLE_RTOL = 1e-10
POLE_RTOL = 1e-8
ALPHA_MAX = 2


@dataclass(frozen=True)
class Contour:
    """Circle ``center + radius * exp(2 pi i j / nodes)``, positively oriented."""

    center: complex
    radius: float
    nodes: int = 64

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if not self.radius > 0:
            raise ValueError("contour radius must be positive")
        if self.nodes < 16 or self.nodes % 2:
            raise ValueError("contour nodes must be even and >= 16")

    def points(self) -> np.ndarray:
        theta = 2 * np.pi * np.arange(self.nodes) / self.nodes
        return self.center + self.radius * np.exp(1j * theta)

    def contains(self, lam: complex) -> bool:
        return abs(complex(lam) - self.center) < self.radius

    def check_region(self, family: OperatorFamily) -> None:
        if family.region.boundary_distance(self.center) <= self.radius:
            raise OutOfRegion(f"contour disk {self} is not inside the region of {family.label}")

    def refined(self) -> "Contour":
        return Contour(self.center, self.radius, 2 * self.nodes)


def system_matrix(family: OperatorFamily, lam: complex) -> np.ndarray:
    """``S(lam) = I - lam T(lam)``."""
    return np.eye(family.n, dtype=np.complex128) - lam * family.evaluate(lam)


def apply_resolvent(family: OperatorFamily, lam: complex, b) -> np.ndarray:
    """Solve ``(I - lam T(lam)) X = B``; SingularMatrix flags a nonlinear eigenvalue."""
    return solve_linear(system_matrix(family, lam), b)


def guarded_node_solve(family: OperatorFamily, lam: complex, b) -> np.ndarray:
    """Resolvent application at a quadrature node, refusing near-poles."""
    s = system_matrix(family, lam)
    sv = singular_values(s)
    if sv[-1] < NODE_POLE_RTOL * sv[0]:
        raise NodeOnPole(f"quadrature node {lam} is within {sv[-1]:.2e} of singular")
    try:
        return solve_linear(s, b)
    except SingularMatrix as exc:
        raise NodeOnPole(f"quadrature node {lam}: {exc}") from exc


@dataclass(frozen=True)
class MomentTable:
    """Trapezoid moments ``M_a = (1/2 pi i) oint (lam - c)^a R(lam) dlam``."""

    contour: Contour
    moments: tuple
    node_residuals: tuple
    node_norms: tuple

    @property
    def alpha_max(self) -> int:
        return len(self.moments) - 1


def contour_moments(family: OperatorFamily, contour: Contour, alpha_max: int = ALPHA_MAX) -> MomentTable:
    contour.check_region(family)
    n = family.n
    eye = np.eye(n, dtype=np.complex128)
    acc = [np.zeros((n, n), dtype=np.complex128) for _ in range(alpha_max + 1)]
    residuals, norms = [], []
    for lam in contour.points():
        r = guarded_node_solve(family, lam, eye)
        residuals.append(float(np.linalg.norm(system_matrix(family, lam) @ r - eye)))
        norms.append(norm2(r))
        # dlam / (2 pi i) = (lam - c) dtheta / (2 pi)
        d = lam - contour.center
        w = d
        for a in range(alpha_max + 1):
            acc[a] += w * r
            w *= d
    moments = tuple(m / contour.nodes for m in acc)
    return MomentTable(contour, moments, tuple(residuals), tuple(norms))


def pole_indicator(family: OperatorFamily, contour: Contour, alpha_max: int = ALPHA_MAX):
    """Return ``(has_pole, rank_estimate)`` for the disk bounded by ``contour``.

    A moment counts as nonzero when it exceeds ``1e-8`` of the size the
    integrand itself has on the contour (``radius^(a+1) * max ||R||``).
    """
    table = contour_moments(family, contour, alpha_max)
    scale = max(table.node_norms)
    rho = contour.radius
    nonzero = [
        norm2(m) > POLE_RTOL * scale * rho ** (a + 1) for a, m in enumerate(table.moments)
    ]
    has_pole = any(nonzero)
    if not has_pole:
        if min(1.0 / s for s in table.node_norms) < 1e-6:
            log.warning("all moments vanish but a node solve on %s was near-singular", contour)
        return False, 0
    m0 = table.moments[0]
    _, s, _ = svd(m0)
    rank = int(np.count_nonzero(s > POLE_RTOL * scale * rho))
    return True, rank


def perturbation_bound(f0: OperatorFamily, fh: OperatorFamily, lam: complex):
    """Upper bound on ``||R_h(lam) - R_0(lam)||`` from the perturbed-inverse estimate.

    Returns ``(bound, valid)``; ``bound`` is ``None`` when the smallness
    condition ``|lam| ||T_0 - T_h|| ||R_0|| < 1`` fails.
    """
    s0 = system_matrix(f0, lam)
    sv = singular_values(s0)
    solve_linear(s0, np.eye(f0.n))  # raises SingularMatrix when R_0 does not exist
    r0 = 1.0 / sv[-1]
    dt = norm2(f0.evaluate(lam) - fh.evaluate(lam))
    q = abs(lam) * dt * r0
    if not q < 1:
        return None, False
    return abs(lam) * dt * r0**2 / (1 - q), True

