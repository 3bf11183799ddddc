"""Contour-integral nonlinear eigensolver with Newton refinement.

The eigenvalues of ``S(lam) = I - lam T(lam)`` inside a circle are the poles
of ``S^{-1}``.  Probed moments of ``S^{-1}`` over the circle are stacked in a
block Hankel matrix whose rank equals the number of enclosed eigenvalues
(counted with multiplicity), and a small dense eigenproblem recovers them.
Each approximation is then polished by Newton's method on a bordered system.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import (
    DefectiveCluster,
    MultiplicityMismatch,
    NoConvergence,
    OutOfRegion,
    OutsideBasin,
    RankOverflow,
    SingularJacobian,
    SingularMatrix,
)
from .family import OperatorFamily, PerturbationFamily
from .linalg import RANK_RTOL, eig_dense, norm2 as sv_max, smallest_singular_vectors, singular_values, solve_linear, svd
from .resolvent import POLE_RTOL, Contour, guarded_node_solve, system_matrix

log = logging.getLogger(__name__)

TOL_EIG = 1e-10
NEWTON_RTOL = 1e-12
NEWTON_MAX_ITER = 50
BASIN_RTOL = 0.1
GRAM_RTOL = 1e-8
NULLITY_RTOL = 1e-8
DEFAULT_MOMENTS = 4
MAX_PROBES = 8


@dataclass(frozen=True)
class NonlinearEigenpair:
    lam: complex
    u: np.ndarray = field(repr=False)
    w: np.ndarray = field(repr=False)
    residual: float
    left_residual: float
    iterations: int = 0


@dataclass(frozen=True)
class SpectralCluster:
    """Semisimple eigenvalue group with right basis ``phi`` and dual basis ``phi_dual``.

    Columns satisfy ``phi_dual^H @ phi = I_m``.
    """

    lam0: complex
    m: int
    phi: np.ndarray = field(repr=False)
    phi_dual: np.ndarray = field(repr=False)
    semisimple: bool = True
    members: tuple = field(default=(), repr=False)


class TrackResult(NamedTuple):
    lam_mean: complex
    split: bool
    members: list


def default_group_tol(lam0: complex) -> float:
    return 1e-6 * (1 + abs(lam0))


def _tolerance(lam: complex, t: np.ndarray) -> float:
    return NEWTON_RTOL * (1 + abs(lam) * np.linalg.norm(t))


def refine(
    family: OperatorFamily,
    lam_init: complex,
    u_init,
    max_iter: int = NEWTON_MAX_ITER,
) -> NonlinearEigenpair:
    """Newton's method on ``S(lam) u = 0`` with the normalization ``c^H u = 1``.

    ``S'(lam) = -T(lam) - lam DT(lam)``.  The left vector is the smallest left
    singular vector of ``S(lam)`` at the converged point.
    """
    lam = family.check(lam_init)
    u = np.asarray(u_init, dtype=np.complex128).ravel()
    u = u / np.linalg.norm(u)
    c = u.copy()
    n = family.n

    t = family.evaluate(lam)
    s = np.eye(n) - lam * t
    res = np.linalg.norm(s @ u)
    if res > BASIN_RTOL * (1 + abs(lam) * np.linalg.norm(t)):
        raise OutsideBasin(f"initial residual {res:.3e} at lambda={lam} is outside the Newton basin")

    it = 0
    while res > _tolerance(lam, t):
        if it == max_iter:
            raise NoConvergence(f"Newton stalled at lambda={lam} with residual {res:.3e}")
        ds = -t - lam * family.derivative(lam)
        jac = np.zeros((n + 1, n + 1), dtype=np.complex128)
        jac[:n, :n] = s
        jac[:n, n] = ds @ u
        jac[n, :n] = c.conj()
        rhs = -np.concatenate([s @ u, [np.vdot(c, u) - 1]])
        try:
            step = solve_linear(jac, rhs)
        except SingularMatrix as exc:
            if res <= TOL_EIG:
                break
            raise SingularJacobian(f"bordered Jacobian singular at lambda={lam}") from exc
        u = u + step[:n]
        lam = lam + step[n]
        if not family.region.contains(lam):
            raise NoConvergence(f"Newton left the analyticity region at lambda={lam}")
        t = family.evaluate(lam)
        s = np.eye(n) - lam * t
        res = np.linalg.norm(s @ u) / np.linalg.norm(u)
        it += 1

    u = u / np.linalg.norm(u)
    sigma, left, _ = smallest_singular_vectors(s, 1)
    return NonlinearEigenpair(
        complex(lam), u, left[:, 0], float(np.linalg.norm(s @ u)), float(sigma[0]), it
    )


def probe_matrix(n: int, probes: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n, probes)) + 1j * rng.standard_normal((n, probes))


def hankel_estimates(
    family: OperatorFamily,
    contour: Contour,
    probes: int | None = None,
    seed: int = 0,
    moments: int = DEFAULT_MOMENTS,
):
    """Raw eigenvalue/eigenvector estimates from the probed block-Hankel moments.

    Returns ``(values, vectors)``; ``vectors`` has one column per value.
    """
    contour.check_region(family)
    n = family.n
    ell = min(n, MAX_PROBES) if probes is None else min(int(probes), n)
    if ell < 1:
        raise ValueError("need at least one probe vector")
    v = probe_matrix(n, ell, seed)
    c, r = contour.center, contour.radius
    acc = [np.zeros((n, ell), dtype=np.complex128) for _ in range(2 * moments)]
    scale = 0.0
    for lam in contour.points():
        x = guarded_node_solve(family, lam, v)
        scale = max(scale, float(np.linalg.norm(x, 2)))
        z = (lam - c) / r
        wgt = r * z
        for p in range(2 * moments):
            acc[p] += wgt * x
            wgt *= z
    a = [m / contour.nodes for m in acc]
    h0 = np.block([[a[i + j] for j in range(moments)] for i in range(moments)])
    h1 = np.block([[a[i + j + 1] for j in range(moments)] for i in range(moments)])

    u0, s0, w0 = svd(h0, RANK_RTOL)
    if s0.size == 0 or s0[0] <= POLE_RTOL * scale * r:
        return np.zeros(0, dtype=np.complex128), np.zeros((n, 0), dtype=np.complex128)
    k = s0.size
    if k >= moments * ell:
        raise RankOverflow(f"moment rank {k} saturates probe capacity {moments * ell}; increase probes")
    reduced = u0.conj().T @ h1 @ w0 / s0
    z, y, _ = eig_dense(reduced)
    vecs = u0[:n] @ y
    return c + r * z, vecs


def group_eigenvalues(values: list, tol: float) -> list:
    """Single-linkage grouping of sorted indices."""
    groups: list[list[int]] = []
    for i, lam in enumerate(values):
        for g in groups:
            if any(abs(lam - values[j]) <= tol for j in g):
                g.append(i)
                break
        else:
            groups.append([i])
    return groups


def sort_pairs(pairs: list, tol: float) -> list:
    """Sort by real then imaginary part.

    Real parts that chain together within ``tol`` count as ties so that a
    conjugate pair is ordered by imaginary part regardless of roundoff.
    """
    pairs = sorted(pairs, key=lambda p: p.lam.real)
    out, run = [], []
    for p in pairs:
        if run and p.lam.real - run[-1].lam.real > tol:
            out.extend(sorted(run, key=lambda q: q.lam.imag))
            run = []
        run.append(p)
    out.extend(sorted(run, key=lambda q: q.lam.imag))
    return out


def solve_in_contour(
    family: OperatorFamily,
    contour: Contour,
    probes: int | None = None,
    seed: int = 0,
    moments: int = DEFAULT_MOMENTS,
    group_tol: float | None = None,
) -> list[NonlinearEigenpair]:
    """All nonlinear eigenpairs of ``family`` strictly inside ``contour``.

    Pairs come sorted by real then imaginary part.  Members of a multiple
    eigenvalue carry right/left vectors from a common null-space basis so a
    semisimple group spans its full eigenspace.
    """
    values, vecs = hankel_estimates(family, contour, probes, seed, moments)
    pairs = []
    for i, lam in enumerate(values):
        if abs(lam - contour.center) > contour.radius * (1 + 1e-6):
            continue
        try:
            pair = refine(family, lam, vecs[:, i])
        except (OutsideBasin, OutOfRegion) as exc:
            log.debug("discarding spurious estimate %s: %s", lam, exc)
            continue
        if contour.contains(pair.lam):
            pairs.append(pair)
    tol = group_tol if group_tol is not None else default_group_tol(contour.center)
    pairs = sort_pairs(pairs, tol)

    out = []
    for g in group_eigenvalues([p.lam for p in pairs], tol):
        members = [pairs[i] for i in g]
        if len(members) > 1:
            members = _share_null_space(family, members)
        out.extend(members)
    return sort_pairs(out, tol)


def _share_null_space(family: OperatorFamily, members: list) -> list:
    lam_bar = complex(np.mean([p.lam for p in members]))
    t = family.evaluate(lam_bar)
    s = np.eye(family.n) - lam_bar * t
    sv = singular_values(s)
    # relative to the size of the two terms of S, not of S itself (S ~ 0 is possible)
    nullity = int(np.count_nonzero(sv <= NULLITY_RTOL * (1 + abs(lam_bar) * sv_max(t))))
    r = min(max(nullity, 1), len(members))
    _, left, right = smallest_singular_vectors(s, r)
    out = []
    for i, p in enumerate(members):
        j = min(i, r - 1)
        u, w = right[:, j], left[:, j]
        sp = system_matrix(family, p.lam)
        out.append(
            NonlinearEigenpair(
                p.lam, u, w, float(np.linalg.norm(sp @ u)), float(np.linalg.norm(sp.conj().T @ w)), p.iterations
            )
        )
    return out


def extract_cluster(pairs, lam0: complex, group_tol: float | None = None) -> SpectralCluster:
    """Right basis and biorthogonal dual basis for the pairs near ``lam0``.

    Raises DefectiveCluster when the left/right Gram matrix is numerically
    singular (Jordan structure).
    """
    tol = default_group_tol(lam0) if group_tol is None else group_tol
    members = [p for p in pairs if abs(p.lam - lam0) <= tol]
    if not members:
        raise MultiplicityMismatch(f"no eigenpairs within {tol:g} of {lam0}")
    right, _, _ = svd(np.column_stack([p.u for p in members]), GRAM_RTOL)
    left, _, _ = svd(np.column_stack([p.w for p in members]), GRAM_RTOL)
    if right.shape[1] != left.shape[1]:
        raise DefectiveCluster(
            f"right eigenspace has dimension {right.shape[1]}, left has {left.shape[1]}"
        )
    gram = left.conj().T @ right
    smin = singular_values(gram)[-1]
    if smin < GRAM_RTOL:
        raise DefectiveCluster(f"left/right Gram matrix is singular (sigma_min={smin:.2e})")
    dual = left @ np.linalg.inv(gram).conj().T
    lam_mean = complex(np.mean([p.lam for p in members]))
    return SpectralCluster(lam_mean, right.shape[1], right, dual, True, tuple(members))


def track(
    fh: PerturbationFamily,
    cluster: SpectralCluster,
    h: float,
    contour: Contour,
    **solver_kw,
) -> TrackResult:
    """Solve ``T_h`` in ``contour`` and average the ``m`` eigenvalues nearest ``lam0``."""
    pairs = solve_in_contour(fh.at(h), contour, **solver_kw)
    if len(pairs) < cluster.m:
        raise MultiplicityMismatch(
            f"found {len(pairs)} eigenvalues for h={h!r}, cluster multiplicity is {cluster.m}"
        )
    members = sorted(pairs, key=lambda p: abs(p.lam - cluster.lam0))[: cluster.m]
    lams = [p.lam for p in members]
    lam_mean = complex(sum(lams) / len(lams))
    spread = max((abs(a - b) for a in lams for b in lams), default=0.0)
    split = spread > 1e-6 * (1 + abs(cluster.lam0))
    return TrackResult(lam_mean, split, members)
