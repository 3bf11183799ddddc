"""Study configuration files.

One ``key = value`` per line, dotted keys, ``#`` starts a comment.  Matrix
values are inline (``1 2; 3 4``) or ``@path`` to a matrix file, resolved
relative to the config file.  Example::

    problem.kind = quadratic
    problem.A = -1
    problem.B = 0.5
    problem.C = 0.25
    perturbation.direction.T.0 = 1
    contour.center_re = 1
    contour.radius = 1
    study.h = 0.1, 0.01, 0.001
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, MatrixFormatError
from .family import (
    OperatorFamily,
    PerturbationFamily,
    PiecewiseConstant,
    build_generalized,
    build_polynomial,
    build_quadratic,
    build_resonance_1d,
    perturb_linear,
)
from .matrix_io import format_inline, format_real, load_matrix, parse_inline
from .resolvent import Contour

KINDS = ("matrix_poly", "generalized", "quadratic", "resonance1d")
_MATRIX_KEYS = {"generalized": ("A", "K", "B"), "quadratic": ("A", "B", "C")}
_POLY_KEY = re.compile(r"^T\.(\d+)$")


@dataclass
class StudyConfig:
    kind: str
    matrices: dict = field(default_factory=dict)
    eta_breaks: tuple = (0.0, 1.0)
    eta_values: tuple = ()
    eta_q: int = 128
    eta_quadrature: str = "corrected"
    direction: dict = field(default_factory=dict)
    direction_eta: tuple = ()
    center: complex = 0j
    radius: float = 1.0
    nodes: int = 64
    probes: int | None = None
    seed: int = 0
    tol: float = 1e-10
    moments: int = 4
    h: tuple = ()

    def contour(self) -> Contour:
        return Contour(self.center, self.radius, self.nodes)

    def base_family(self) -> OperatorFamily:
        if self.kind == "matrix_poly":
            return build_polynomial(_poly_coeffs(self.matrices, "problem"))
        if self.kind == "generalized":
            m = self.matrices
            return build_generalized(m["A"], m["K"], m["B"])
        if self.kind == "quadratic":
            m = self.matrices
            return build_quadratic(m["A"], m["B"], m["C"])
        eta = PiecewiseConstant(self.eta_breaks, self.eta_values)
        return build_resonance_1d(eta, self.eta_q, self.eta_quadrature)

    def perturbation(self) -> PerturbationFamily:
        base = self.base_family()
        if self.kind == "resonance1d":
            values = self.direction_eta or (0.0,) * len(self.eta_values)
            direction = build_resonance_1d(PiecewiseConstant(self.eta_breaks, values), self.eta_q, self.eta_quadrature)
        elif self.direction:
            direction = build_polynomial(_poly_coeffs(self.direction, "perturbation.direction"))
        else:
            direction = build_polynomial([np.zeros((base.n, base.n))])
        return perturb_linear(base, direction)

    def dumps(self) -> str:
        """Canonical text; matrices are written inline so the dump is self-contained."""
        items = {"problem.kind": self.kind}
        for k, m in self.matrices.items():
            items[f"problem.{k}"] = format_inline(m)
        if self.kind == "resonance1d":
            items["problem.eta.breaks"] = _fmt_list(self.eta_breaks)
            items["problem.eta.values"] = _fmt_list(self.eta_values)
            items["problem.eta.q"] = str(self.eta_q)
            items["problem.eta.quadrature"] = self.eta_quadrature
            if self.direction_eta:
                items["perturbation.direction.eta.values"] = _fmt_list(self.direction_eta)
        for k, m in self.direction.items():
            items[f"perturbation.direction.{k}"] = format_inline(m)
        items["contour.center_re"] = format_real(self.center.real)
        items["contour.center_im"] = format_real(self.center.imag)
        items["contour.radius"] = format_real(self.radius)
        items["contour.nodes"] = str(self.nodes)
        if self.probes is not None:
            items["solver.probes"] = str(self.probes)
        items["solver.seed"] = str(self.seed)
        items["solver.tol"] = format_real(self.tol)
        items["solver.moments"] = str(self.moments)
        if self.h:
            items["study.h"] = _fmt_list(self.h)
        return "".join(f"{k} = {v}\n" for k, v in sorted(items.items()))


def _fmt_list(values) -> str:
    return ", ".join(format_real(v) for v in values)


def _poly_coeffs(mats: dict, prefix: str) -> list:
    degrees = sorted(int(_POLY_KEY.match(k).group(1)) for k in mats)
    if not degrees or degrees != list(range(len(degrees))):
        raise ConfigError(f"{prefix}.T.<k> keys must be 0..d without gaps, got {degrees}")
    return [mats[f"T.{d}"] for d in degrees]


def _floats(key: str, value: str) -> tuple:
    try:
        out = tuple(float(v) for v in value.split(","))
    except ValueError:
        raise ConfigError(f"{key}: expected a comma-separated list of reals, got {value!r}") from None
    if not all(math.isfinite(v) for v in out):
        raise ConfigError(f"{key}: values must be finite")
    return out


def _int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {value!r}") from None


def _real(key: str, value: str) -> float:
    try:
        v = float(value)
    except ValueError:
        raise ConfigError(f"{key}: expected a real number, got {value!r}") from None
    if not math.isfinite(v):
        raise ConfigError(f"{key}: must be finite")
    return v


def _matrix(key: str, value: str, base_dir: Path) -> np.ndarray:
    try:
        if value.startswith("@"):
            return load_matrix(base_dir / value[1:].strip())
        return parse_inline(value, key)
    except MatrixFormatError as exc:
        raise ConfigError(str(exc)) from None


def loads(text: str, base_dir: Path | str = ".", source: str = "<config>") -> StudyConfig:
    base_dir = Path(base_dir)
    raw: dict[str, tuple[str, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"{source}:{lineno}: empty key or value")
        if key in raw:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        raw[key] = (value, lineno)

    def where(key):
        return f"{source}:{raw[key][1]}: {key}"

    if "problem.kind" not in raw:
        raise ConfigError(f"{source}: missing problem.kind")
    kind = raw.pop("problem.kind")[0]
    if kind not in KINDS:
        raise ConfigError(f"{source}: problem.kind must be one of {', '.join(KINDS)}, got {kind!r}")
    cfg = StudyConfig(kind)
    center = [0.0, 0.0]

    for key, (value, _) in raw.items():
        loc = where(key)
        if key.startswith("problem.eta.") and kind == "resonance1d":
            sub = key[len("problem.eta."):]
            if sub == "breaks":
                cfg.eta_breaks = _floats(loc, value)
            elif sub == "values":
                cfg.eta_values = _floats(loc, value)
            elif sub == "q":
                cfg.eta_q = _int(loc, value)
            elif sub == "quadrature":
                cfg.eta_quadrature = value
            else:
                raise ConfigError(f"{loc}: unknown key")
        elif key == "perturbation.direction.eta.values" and kind == "resonance1d":
            cfg.direction_eta = _floats(loc, value)
        elif key.startswith("problem.") and kind != "resonance1d":
            name = key[len("problem."):]
            allowed = _MATRIX_KEYS.get(kind)
            if (allowed and name not in allowed) or (not allowed and not _POLY_KEY.match(name)):
                raise ConfigError(f"{loc}: not a matrix of a {kind} problem")
            cfg.matrices[name] = _matrix(loc, value, base_dir)
        elif key.startswith("perturbation.direction.") and kind != "resonance1d":
            name = key[len("perturbation.direction."):]
            if not _POLY_KEY.match(name):
                raise ConfigError(f"{loc}: direction matrices are T.<k> polynomial coefficients")
            cfg.direction[name] = _matrix(loc, value, base_dir)
        elif key == "contour.center_re":
            center[0] = _real(loc, value)
        elif key == "contour.center_im":
            center[1] = _real(loc, value)
        elif key == "contour.radius":
            cfg.radius = _real(loc, value)
        elif key == "contour.nodes":
            cfg.nodes = _int(loc, value)
        elif key == "solver.probes":
            cfg.probes = _int(loc, value)
        elif key == "solver.seed":
            cfg.seed = _int(loc, value)
        elif key == "solver.tol":
            cfg.tol = _real(loc, value)
        elif key == "solver.moments":
            cfg.moments = _int(loc, value)
        elif key == "study.h":
            cfg.h = _floats(loc, value)
        else:
            raise ConfigError(f"{loc}: unknown key")
    cfg.center = complex(*center)
    _validate(cfg, source)
    return cfg


def load(path) -> StudyConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    return loads(text, path.parent, str(path))


def _validate(cfg: StudyConfig, source: str) -> None:
    if cfg.kind in _MATRIX_KEYS:
        missing = [k for k in _MATRIX_KEYS[cfg.kind] if k not in cfg.matrices]
        if missing:
            raise ConfigError(f"{source}: {cfg.kind} problem needs problem.{', problem.'.join(missing)}")
    elif cfg.kind == "matrix_poly":
        _poly_coeffs(cfg.matrices, "problem")
    else:
        if not cfg.eta_values:
            raise ConfigError(f"{source}: resonance1d needs problem.eta.values")
        if len(cfg.eta_breaks) != len(cfg.eta_values) + 1:
            raise ConfigError(f"{source}: problem.eta.breaks must have one more entry than problem.eta.values")
        if cfg.direction_eta and len(cfg.direction_eta) != len(cfg.eta_values):
            raise ConfigError(f"{source}: perturbation.direction.eta.values must match problem.eta.values")
        if cfg.eta_quadrature not in ("corrected", "midpoint"):
            raise ConfigError(f"{source}: problem.eta.quadrature must be corrected or midpoint")
    if cfg.direction:
        _poly_coeffs(cfg.direction, "perturbation.direction")
    if not cfg.radius > 0:
        raise ConfigError(f"{source}: contour.radius must be positive")
    if cfg.nodes < 16 or cfg.nodes % 2:
        raise ConfigError(f"{source}: contour.nodes must be even and >= 16")
    if cfg.probes is not None and cfg.probes < 1:
        raise ConfigError(f"{source}: solver.probes must be positive")
    if cfg.moments < 1:
        raise ConfigError(f"{source}: solver.moments must be positive")
    if not cfg.tol > 0:
        raise ConfigError(f"{source}: solver.tol must be positive")
    if any(h <= 0 for h in cfg.h) or any(a <= b for a, b in zip(cfg.h, cfg.h[1:])):
        raise ConfigError(f"{source}: study.h must be positive and strictly descending")
