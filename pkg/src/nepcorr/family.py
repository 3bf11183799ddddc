"""Analytic operator families ``lam -> T(lam)`` and their perturbations.

A nonlinear eigenpair of a family is a pair ``(lam, u)`` with
``lam * T(lam) u = u``.  Families are immutable; each evaluation returns a
fresh array.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, OutOfRegion, QuadratureBreakdown
from .linalg import as_matrix, solve_linear

MatrixRule = Callable[[complex], np.ndarray]

CAUCHY_RADIUS = 0.5
CAUCHY_NODES = 32


class Region(enum.IntEnum):
    """Analyticity regions, ordered from largest to smallest."""

    ENTIRE = 0
    PUNCTURED = 1  # C \ {0}
    SLIT = 2  # C \ (-inf, 0]

    def contains(self, lam: complex) -> bool:
        lam = complex(lam)
        if self is Region.ENTIRE:
            return True
        if self is Region.PUNCTURED:
            return lam != 0
        return not (lam.imag == 0.0 and lam.real <= 0.0)

    def boundary_distance(self, lam: complex) -> float:
        lam = complex(lam)
        if self is Region.ENTIRE:
            return math.inf
        if self is Region.PUNCTURED or lam.real >= 0.0:
            return abs(lam)
        return abs(lam.imag)


@dataclass(frozen=True)
class OperatorFamily:
    """``lam -> T(lam)``, an n x n matrix-valued analytic function.

    ``rule`` evaluates T; ``drule`` (optional) evaluates dT/dlam analytically.
    Without ``drule`` the derivative falls back to Cauchy quadrature.
    """

    n: int
    rule: MatrixRule = field(repr=False)
    drule: Optional[MatrixRule] = field(default=None, repr=False)
    region: Region = Region.ENTIRE
    label: str = "family"

    def check(self, lam: complex) -> complex:
        lam = complex(lam)
        if not self.region.contains(lam):
            raise OutOfRegion(f"lambda={lam} is outside the {self.region.name.lower()} region of {self.label}")
        return lam

    def evaluate(self, lam: complex) -> np.ndarray:
        lam = self.check(lam)
        return np.array(self.rule(lam), dtype=np.complex128)

    __call__ = evaluate

    def derivative(self, lam0: complex, radius: float | None = None, nodes: int = CAUCHY_NODES) -> np.ndarray:
        lam0 = self.check(lam0)
        if self.drule is not None and radius is None:
            return np.array(self.drule(lam0), dtype=np.complex128)
        return self.cauchy_derivative(lam0, radius, nodes)

    def cauchy_derivative(self, lam0: complex, radius: float | None = None, nodes: int = CAUCHY_NODES) -> np.ndarray:
        """``(1/2 pi i) oint T(lam) / (lam - lam0)^2 dlam`` by the trapezoid rule."""
        lam0 = self.check(lam0)
        dist = self.region.boundary_distance(lam0)
        if radius is None:
            radius = min(CAUCHY_RADIUS, 0.5 * dist)
        if radius <= 0 or radius >= dist:
            raise QuadratureBreakdown(f"circle of radius {radius} around {lam0} leaves the region")
        acc = np.zeros((self.n, self.n), dtype=np.complex128)
        for j in range(nodes):
            e = cmath.exp(2j * math.pi * j / nodes)
            acc += self.evaluate(lam0 + radius * e) / e
        return acc / (nodes * radius)


def _restrictive(*regions: Region) -> Region:
    return Region(max(regions))


def build_polynomial(coeffs: Sequence) -> OperatorFamily:
    """``T(lam) = sum_k lam**k * coeffs[k]``."""
    mats = [as_matrix(c, name=f"coefficient {k}") for k, c in enumerate(coeffs)]
    if not mats:
        raise ValueError("need at least one coefficient")
    n = mats[0].shape[0]
    for k, m in enumerate(mats):
        if m.shape != (n, n):
            raise DimensionMismatch(f"coefficient {k} has shape {m.shape}, expected {(n, n)}")

    def rule(lam):
        # Horner, fixed order
        acc = mats[-1].copy()
        for m in reversed(mats[:-1]):
            acc = acc * lam + m
        return acc

    def drule(lam):
        acc = np.zeros((n, n), dtype=np.complex128)
        for k in range(len(mats) - 1, 0, -1):
            acc = acc * lam + k * mats[k]
        return acc

    return OperatorFamily(n, rule, drule, Region.ENTIRE, label=f"polynomial(deg={len(mats) - 1})")


def build_constant(m) -> OperatorFamily:
    return build_polynomial([m])


def build_generalized(a, k, b) -> OperatorFamily:
    """Family from ``(A + K) u = lam B u``: ``T(lam) = -A^{-1}K / lam + A^{-1}B``."""
    a, k, b = (as_matrix(x, name=s) for x, s in ((a, "A"), (k, "K"), (b, "B")))
    n = a.shape[0]
    if any(x.shape != (n, n) for x in (a, k, b)):
        raise DimensionMismatch("A, K, B must be square of equal size")
    aik = solve_linear(a, k)
    aib = solve_linear(a, b)
    return OperatorFamily(
        n,
        lambda lam: aib - aik / lam,
        lambda lam: aik / lam**2,
        Region.PUNCTURED,
        label="generalized",
    )


def build_quadratic(a, b, c) -> OperatorFamily:
    """Family from ``A u + lam B u + lam^2 C u = 0``: ``T(lam) = -A^{-1}B - lam A^{-1}C``."""
    a, b, c = (as_matrix(x, name=s) for x, s in ((a, "A"), (b, "B"), (c, "C")))
    n = a.shape[0]
    if any(x.shape != (n, n) for x in (a, b, c)):
        raise DimensionMismatch("A, B, C must be square of equal size")
    aib = solve_linear(a, b)
    aic = solve_linear(a, c)
    fam = build_polynomial([-aib, -aic])
    return OperatorFamily(n, fam.rule, fam.drule, Region.ENTIRE, label="quadratic")


@dataclass(frozen=True)
class PiecewiseConstant:
    """Piecewise-constant function on [0, 1]: ``values[i]`` on ``[breaks[i], breaks[i+1])``."""

    breaks: tuple
    values: tuple

    def __post_init__(self):
        b, v = tuple(float(x) for x in self.breaks), tuple(float(x) for x in self.values)
        if len(b) != len(v) + 1 or len(v) < 1:
            raise ValueError("need len(breaks) == len(values) + 1")
        if b[0] != 0.0 or b[-1] != 1.0 or any(x >= y for x, y in zip(b, b[1:])):
            raise ValueError("breaks must increase strictly from 0 to 1")
        if not all(math.isfinite(x) for x in v):
            raise ValueError("values must be finite")
        object.__setattr__(self, "breaks", b)
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, value: float) -> "PiecewiseConstant":
        return cls((0.0, 1.0), (value,))

    def __call__(self, y):
        idx = np.searchsorted(np.asarray(self.breaks[1:-1]), y, side="right")
        return np.asarray(self.values)[idx]

    def reflected(self) -> "PiecewiseConstant":
        return PiecewiseConstant(tuple(1.0 - x for x in reversed(self.breaks)), tuple(reversed(self.values)))


def midpoint_rule(q: int):
    """Composite midpoint nodes and weights on [0, 1]."""
    x = (np.arange(q) + 0.5) / q
    return x, np.full(q, 1.0 / q)


def _allocate_nodes(eta: PiecewiseConstant, q: int) -> list:
    """Split ``q`` midpoint cells over the pieces of ``eta`` (largest remainder)."""
    lengths = np.diff(eta.breaks)
    raw = q * lengths
    counts = np.floor(raw).astype(int)
    for i in np.argsort(-(raw - counts), kind="stable")[: q - counts.sum()]:
        counts[i] += 1
    if np.any(counts < 2):
        raise ValueError(f"q={q} leaves fewer than two nodes on some piece of eta")
    return [int(c) for c in counts]


def _piece_grid(eta: PiecewiseConstant, q: int):
    counts = _allocate_nodes(eta, q)
    xs, ws, pieces = [], [], []
    start = 0
    for (a, b), m, val in zip(zip(eta.breaks, eta.breaks[1:]), counts, eta.values):
        h = (b - a) / m
        xs.append(a + h * (np.arange(m) + 0.5))
        ws.append(np.full(m, h))
        pieces.append((a, b, h, val, start, start + m))
        start += m
    return np.concatenate(xs), np.concatenate(ws), pieces


def build_resonance_1d(eta: PiecewiseConstant, q: int, quadrature: str = "corrected") -> OperatorFamily:
    """Nystrom matrix of the 1D outgoing Lippmann-Schwinger operator.

    ``T(lam)[i, j] ~ w_j eta(y_j) G(x_i, y_j)`` with
    ``G = i exp(i k |x - y|) / (2k)``, ``k = sqrt(lam)`` on the principal
    branch.  ``G`` solves ``G'' + k^2 G = -delta`` so that ``lam T(lam) u = u``
    is ``u'' + k^2 (1 + eta) u = 0`` with outgoing conditions.

    ``quadrature="midpoint"`` is the plain composite midpoint rule (O(h^2)).
    ``"corrected"`` (default) adds the Euler-Maclaurin endpoint terms on each
    piece of ``eta`` and the jump term of the ``|x - y|`` kink on the
    diagonal, which makes the rule O(h^3).
    """
    if q < 8:
        raise ValueError("q must be at least 8")
    if quadrature == "midpoint":
        x, w = midpoint_rule(q)
        pieces = None
    elif quadrature == "corrected":
        x, w, pieces = _piece_grid(eta, q)
    else:
        raise ValueError(f"unknown quadrature {quadrature!r}")
    dist = np.abs(x[:, None] - x[None, :])
    eta_x = np.asarray(eta(x), dtype=float)
    scale = (w * eta_x).astype(np.complex128)[None, :]

    kink = None
    ends = []
    if pieces is not None:
        # G jumps in slope by -1 across y = x_i
        kink = -eta_x * np.array([pieces[_piece_of(pieces, i)][2] ** 2 for i in range(q)]) / 12
        for a, b, h, val, j0, j1 in pieces:
            c = val * h * h / 24
            # (h^2/24) [g'(b) - g'(a)],  u(end) and u'(end) from one-sided differences
            ends.append((b, c, j1 - 1, j1 - 2, h, +1.0))
            ends.append((a, c, j0, j0 + 1, h, -1.0))

    def assemble(lam, derivative):
        k = cmath.sqrt(lam)
        e = np.exp(1j * k * dist)
        if derivative:
            mat = scale * e * (-0.5 * dist / k - 0.5j / k**2) / (2 * k)
        else:
            mat = scale * (0.5j / k) * e
        for end, c, jn, jm, h, sgn in ends:
            d = end - x
            s = np.sign(d)
            ee = np.exp(1j * k * np.abs(d))
            if derivative:
                g = ee * (-0.5 * np.abs(d) / k - 0.5j / k**2) / (2 * k)
                gy = -0.5 * s * (1j * np.abs(d)) * ee / (2 * k)
            else:
                g = (0.5j / k) * ee
                gy = -0.5 * s * ee
            # g'(end) ~ gy*u(end) + g*u'(end); u(end) = (3 u_n - u_m)/2, u'(end) = +-(u_n - u_m)/h
            mat[:, jn] += sgn * c * (1.5 * gy + sgn * g / h)
            mat[:, jm] += sgn * c * (-0.5 * gy - sgn * g / h)
        if kink is not None and not derivative:
            mat[np.diag_indices(q)] += kink
        return mat

    return OperatorFamily(
        q,
        lambda lam: assemble(lam, False),
        lambda lam: assemble(lam, True),
        Region.SLIT,
        label=f"resonance1d(q={q},{quadrature})",
    )


def _piece_of(pieces, i: int) -> int:
    for p, (_, _, _, _, j0, j1) in enumerate(pieces):
        if j0 <= i < j1:
            return p
    raise IndexError(i)


@dataclass(frozen=True)
class PerturbationFamily:
    """``(h, lam) -> T_h(lam)`` with ``T_0`` equal to ``base``.

    ``direction`` is set for linear-in-h families ``T_h = T_0 + h T1``.
    """

    base: OperatorFamily
    rule: Callable[[float, complex], np.ndarray] = field(repr=False)
    direction: Optional[OperatorFamily] = None
    drule: Optional[Callable[[float, complex], np.ndarray]] = field(default=None, repr=False)

    @property
    def is_linear(self) -> bool:
        return self.direction is not None

    def evaluate(self, h: float, lam: complex) -> np.ndarray:
        lam = self.base.check(lam)
        if h == 0:
            return self.base.evaluate(lam)
        return np.array(self.rule(h, lam), dtype=np.complex128)

    def at(self, h: float) -> OperatorFamily:
        """The perturbed family ``T_h`` as an ``OperatorFamily``."""
        if h == 0:
            return self.base
        drule = None
        if self.drule is not None:
            drule = lambda lam: self.drule(h, lam)  # noqa: E731
        return OperatorFamily(
            self.base.n, lambda lam: self.rule(h, lam), drule, self.base.region, label=f"{self.base.label}[h={h!r}]"
        )


def perturb_linear(base: OperatorFamily, direction: OperatorFamily) -> PerturbationFamily:
    """``T_h(lam) = T_0(lam) + h * T1(lam)``."""
    if base.n != direction.n:
        raise DimensionMismatch(f"base is {base.n}x{base.n}, direction is {direction.n}x{direction.n}")
    region = _restrictive(base.region, direction.region)
    base = OperatorFamily(base.n, base.rule, base.drule, region, base.label)

    def drule(h, lam):
        return base.derivative(lam) + h * direction.derivative(lam)

    return PerturbationFamily(
        base,
        lambda h, lam: base.rule(lam) + h * direction.rule(lam),
        direction,
        drule,
    )


def perturb_general(base: OperatorFamily, rule, drule=None) -> PerturbationFamily:
    """Arbitrary perturbation ``rule(h, lam)``; must reduce to ``base`` at h = 0."""
    return PerturbationFamily(base, rule, None, drule)
