"""Solve / correct / convergence-study drivers producing CSV text."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import StudyConfig
from .correction import CorrectionReport, first_order_slope, nonlinear_correction
from .errors import MultiplicityMismatch, NoConvergence, RankOverflow
from .family import OperatorFamily, PerturbationFamily
from .matrix_io import format_real
from .resolvent import Contour
from .solver import (
    SpectralCluster,
    group_eigenvalues,
    default_group_tol,
    extract_cluster,
    solve_in_contour,
    track,
)

FD_STEP = 1e-5
FD_RTOL = 1e-6


def solver_kwargs(cfg: StudyConfig) -> dict:
    return {"probes": cfg.probes, "seed": cfg.seed, "moments": cfg.moments}


def solve_with_retry(family: OperatorFamily, contour: Contour, tol: float, probes=None, seed=0, moments=4):
    """``solve_in_contour`` with one automatic capacity doubling on RankOverflow.

    Probes double while below ``n``; once probes equal ``n`` the number of
    Hankel moment blocks doubles instead.
    """
    try:
        pairs = solve_in_contour(family, contour, probes, seed, moments)
    except RankOverflow:
        ell = min(family.n, 8) if probes is None else min(probes, family.n)
        if ell < family.n:
            pairs = solve_in_contour(family, contour, min(2 * ell, family.n), seed, moments)
        else:
            pairs = solve_in_contour(family, contour, ell, seed, 2 * moments)
    bad = [p for p in pairs if p.residual > tol]
    if bad:
        raise NoConvergence(f"eigenpair at {bad[0].lam} has residual {bad[0].residual:.3e} > {tol:g}")
    return pairs


def group_indices(pairs: list, contour: Contour) -> list:
    labels = [0] * len(pairs)
    for g, members in enumerate(group_eigenvalues([p.lam for p in pairs], default_group_tol(contour.center))):
        for i in members:
            labels[i] = g
    return labels


def _csv(header: list, rows: list) -> str:
    lines = [",".join(header)] + [",".join(r) for r in rows]
    return "\n".join(lines) + "\n"


def _b(flag: bool) -> str:
    return "true" if flag else "false"


def solve_csv(cfg: StudyConfig) -> str:
    family = cfg.base_family()
    contour = cfg.contour()
    pairs = solve_with_retry(family, contour, cfg.tol, **solver_kwargs(cfg))
    groups = group_indices(pairs, contour)
    rows = [
        [str(i), format_real(p.lam.real), format_real(p.lam.imag), format_real(p.residual), str(g)]
        for i, (p, g) in enumerate(zip(pairs, groups))
    ]
    return _csv(["index", "lambda_re", "lambda_im", "residual", "multiplicity_group"], rows)


def base_cluster(cfg: StudyConfig, fh: PerturbationFamily | None = None) -> SpectralCluster:
    """The single eigenvalue cluster of ``T_0`` inside the configured contour."""
    fh = fh or cfg.perturbation()
    contour = cfg.contour()
    pairs = solve_with_retry(fh.base, contour, cfg.tol, **solver_kwargs(cfg))
    if not pairs:
        raise MultiplicityMismatch("no eigenvalue of T_0 inside the contour")
    groups = group_eigenvalues([p.lam for p in pairs], default_group_tol(contour.center))
    if len(groups) > 1:
        raise MultiplicityMismatch(
            f"contour encloses {len(groups)} distinct eigenvalues; it must isolate one cluster"
        )
    lam0 = complex(np.mean([p.lam for p in pairs]))
    return extract_cluster(pairs, lam0)


def correct_csv(cfg: StudyConfig, h: float) -> str:
    fh = cfg.perturbation()
    cluster = base_cluster(cfg, fh)
    rep = nonlinear_correction(fh, cluster, h)
    row = [
        format_real(rep.lam0.real),
        format_real(rep.lam0.imag),
        str(rep.m),
        format_real(rep.numerator.real),
        format_real(rep.numerator.imag),
        format_real(rep.denominator.real),
        format_real(rep.denominator.imag),
        format_real(rep.predicted.real),
        format_real(rep.predicted.imag),
        _b(rep.condition_ok),
    ]
    header = [
        "lambda0_re", "lambda0_im", "m", "numerator_re", "numerator_im",
        "denominator_re", "denominator_im", "predicted_re", "predicted_im", "condition_ok",
    ]
    return _csv(header, [row])


@dataclass(frozen=True)
class StudyRow:
    h: float
    lam_h: complex
    report: CorrectionReport
    split: bool

    @property
    def remainder(self) -> float:
        return abs(self.lam_h - self.report.predicted)

    @property
    def shift(self) -> float:
        return abs(self.lam_h - self.report.lam0)


@dataclass(frozen=True)
class StudyReport:
    cluster: SpectralCluster
    rows: tuple
    remainder_slope: float
    slope: complex
    fd_slope: complex
    first_order_ok: bool


def fit_loglog_slope(hs, errs) -> float:
    """Least-squares slope of log10(err) against log10(h), positive errors only."""
    pts = [(math.log10(h), math.log10(e)) for h, e in zip(hs, errs) if e > 0]
    if len(pts) < 2:
        return math.nan
    x, y = np.array(pts).T
    return float(np.polyfit(x, y, 1)[0])


def run_study(
    fh: PerturbationFamily,
    cluster: SpectralCluster,
    hs,
    contour: Contour,
    **solver_kw,
) -> StudyReport:
    """Compare the first-order prediction against directly tracked eigenvalues."""
    rows = []
    for h in hs:
        tr = track(fh, cluster, h, contour, **solver_kw)
        rep = nonlinear_correction(fh, cluster, h)
        rows.append(StudyRow(float(h), tr.lam_mean, rep, tr.split))
    slope = first_order_slope(fh, cluster)
    lp = track(fh, cluster, FD_STEP, contour, **solver_kw).lam_mean
    lm = track(fh, cluster, -FD_STEP, contour, **solver_kw).lam_mean
    fd = (lp - lm) / (2 * FD_STEP)
    ok = abs(fd - slope) <= FD_RTOL * max(abs(fd), abs(slope))
    rs = fit_loglog_slope([r.h for r in rows], [r.remainder for r in rows])
    return StudyReport(cluster, tuple(rows), rs, slope, fd, ok)


def study_csv(cfg: StudyConfig) -> str:
    fh = cfg.perturbation()
    cluster = base_cluster(cfg, fh)
    rep = run_study(fh, cluster, cfg.h, cfg.contour(), **solver_kwargs(cfg))
    header = [
        "h", "lambda_h_re", "lambda_h_im", "predicted_re", "predicted_im",
        "remainder", "shift", "split", "condition_ok",
    ]
    rows = [
        [
            format_real(r.h),
            format_real(r.lam_h.real),
            format_real(r.lam_h.imag),
            format_real(r.report.predicted.real),
            format_real(r.report.predicted.imag),
            format_real(r.remainder),
            format_real(r.shift),
            _b(r.split),
            _b(r.report.condition_ok),
        ]
        for r in rep.rows
    ]
    summary = f"remainder_slope={format_real(rep.remainder_slope)} first_order_ok={_b(rep.first_order_ok)}\n"
    return _csv(header, rows) + summary
