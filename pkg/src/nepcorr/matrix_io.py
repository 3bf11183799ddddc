"""Plain-text complex matrix format.

File layout::

    n k
    a11 a12 ... a1k
    ...

Entries are ``re``, ``re+imi`` or ``re-imi`` (``1.5-0.25i``); a bare
imaginary part (``2i``) is also accepted.  Inline matrices use the same
entry syntax with rows separated by ``;``.
"""

from __future__ import annotations

import math
import re
from pathlib import Path

import numpy as np

from .errors import MatrixFormatError

_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_ENTRY = re.compile(
    rf"^(?P<re>[+-]?{_NUM})(?:(?P<isign>[+-])(?P<im>{_NUM})?i)?$"
    rf"|^(?P<pure>[+-]?(?:{_NUM})?)i$"
)


def parse_complex(token: str) -> complex:
    m = _ENTRY.match(token.strip())
    if m is None or token.strip() in ("", "+", "-"):
        raise ValueError(f"bad complex entry {token!r}")
    if m.group("re") is not None:
        re_part = float(m.group("re"))
        if m.group("isign") is None:
            return complex(re_part, 0.0)
        mag = float(m.group("im")) if m.group("im") else 1.0
        return complex(re_part, -mag if m.group("isign") == "-" else mag)
    pure = m.group("pure")
    if pure in ("", "+"):
        return 1j
    if pure == "-":
        return -1j
    return complex(0.0, float(pure))


def format_real(x: float) -> str:
    """Shortest round-trip decimal (at most 17 significant digits)."""
    return repr(float(x))


def format_complex(z: complex) -> str:
    z = complex(z)
    if z.imag == 0.0 and not math.copysign(1.0, z.imag) < 0:
        return format_real(z.real)
    sign = "-" if math.copysign(1.0, z.imag) < 0 else "+"
    return f"{format_real(z.real)}{sign}{format_real(abs(z.imag))}i"


def _parse_row(line: str, where: str) -> list[complex]:
    out = []
    for tok in line.split():
        try:
            out.append(parse_complex(tok))
        except ValueError:
            raise MatrixFormatError(f"{where}: cannot parse entry {tok!r}") from None
    return out


def loads_matrix(text: str, source: str = "<string>") -> np.ndarray:
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise MatrixFormatError(f"{source}:1: missing 'n k' header")
    header = lines[0].split()
    try:
        n, k = (int(t) for t in header)
    except ValueError:
        raise MatrixFormatError(f"{source}:1: header must be two integers 'n k'") from None
    if n < 1 or k < 1:
        raise MatrixFormatError(f"{source}:1: dimensions must be positive")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        row = _parse_row(line, f"{source}:{lineno}")
        if len(row) != k:
            raise MatrixFormatError(f"{source}:{lineno}: expected {k} entries, found {len(row)}")
        rows.append(row)
    if len(rows) != n:
        raise MatrixFormatError(f"{source}:{len(lines)}: expected {n} rows, found {len(rows)}")
    m = np.array(rows, dtype=np.complex128)
    if not np.all(np.isfinite(m)):
        raise MatrixFormatError(f"{source}: non-finite entries")
    return m


def load_matrix(path) -> np.ndarray:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise MatrixFormatError(f"{path}: {exc.strerror}") from None
    return loads_matrix(text, str(path))


def dumps_matrix(m: np.ndarray) -> str:
    m = np.atleast_2d(np.asarray(m, dtype=np.complex128))
    lines = [f"{m.shape[0]} {m.shape[1]}"]
    lines += [" ".join(format_complex(z) for z in row) for row in m]
    return "\n".join(lines) + "\n"


def save_matrix(path, m: np.ndarray) -> None:
    Path(path).write_text(dumps_matrix(m))


def parse_inline(text: str, source: str = "<inline>") -> np.ndarray:
    """Parse ``"1 2; 3 4"`` style matrices (a single entry gives 1x1)."""
    rows = [r for r in text.split(";")]
    parsed = [_parse_row(r, f"{source} row {i + 1}") for i, r in enumerate(rows)]
    if not parsed or any(len(r) == 0 for r in parsed):
        raise MatrixFormatError(f"{source}: empty row")
    width = len(parsed[0])
    for i, r in enumerate(parsed):
        if len(r) != width:
            raise MatrixFormatError(f"{source} row {i + 1}: expected {width} entries, found {len(r)}")
    m = np.array(parsed, dtype=np.complex128)
    if not np.all(np.isfinite(m)):
        raise MatrixFormatError(f"{source}: non-finite entries")
    return m


def format_inline(m: np.ndarray) -> str:
    m = np.atleast_2d(np.asarray(m, dtype=np.complex128))
    return "; ".join(" ".join(format_complex(z) for z in row) for row in m)
