"""``nep`` command-line interface.

Exit codes: 0 ok, 1 bad configuration or input, 2 solver failure,
3 correction denominator vanishes, 4 verification failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import config as config_mod
from . import verify
from .errors import DenominatorNearSingular, NepError
from .matrix_io import format_real
from .study import correct_csv, solve_csv, study_csv

EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_DENOMINATOR = 3
EXIT_VERIFY = 4


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nep", description="Nonlinear eigenvalues and first-order corrections.")
    sub = p.add_subparsers(dest="cmd", required=True)

    def with_config(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", required=True, help="study configuration file")
        sp.add_argument("--dump-config", action="store_true", help="print the canonical configuration and exit")
        return sp

    with_config("solve", "eigenvalues of T_0 inside the contour")
    sp = with_config("correct", "first-order correction of the enclosed cluster")
    sp.add_argument("--h", type=float, help="perturbation size")
    with_config("study", "prediction vs. tracked eigenvalue over the h schedule")

    sp = sub.add_parser("verify", help="run the built-in oracle checks")
    sp.add_argument("--only", metavar="NAME", help="run a single named check")
    sp.add_argument("--tol-scale", type=float, default=1.0, help=argparse.SUPPRESS)
    sp.add_argument("--dump-config", action="store_true", help=argparse.SUPPRESS)
    return p


def _verify(args) -> tuple[int, str]:
    if args.only and args.only not in verify.CHECKS:
        return EXIT_CONFIG, f"nep: unknown check {args.only!r}; available: {', '.join(verify.CHECKS)}\n"
    results = verify.run(args.only, args.tol_scale)
    lines = ["name,status,measured,threshold"]
    for name, ok, measured, threshold, _ in results:
        lines.append(f"{name},{'pass' if ok else 'fail'},{format_real(measured)},{format_real(threshold)}")
    out = "\n".join(lines) + "\n"
    return (0 if all(r[1] for r in results) else EXIT_VERIFY), out


def run(argv=None) -> tuple[int, str, str]:
    """Execute a command; returns ``(exit_code, stdout_text, stderr_text)``."""
    args = _parser().parse_args(argv)
    if args.cmd == "verify":
        if args.dump_config:
            return EXIT_CONFIG, "", "nep: verify takes no configuration\n"
        code, out = _verify(args)
        return (code, out, "") if code != EXIT_CONFIG else (code, "", out)

    try:
        cfg = config_mod.load(args.config)
        if args.dump_config:
            return 0, cfg.dumps(), ""
        if args.cmd == "correct" and args.h is None:
            return EXIT_CONFIG, "", "nep: correct needs --h\n"
        if args.cmd == "study" and not cfg.h:
            return EXIT_CONFIG, "", "nep: study needs study.h in the configuration\n"
        cfg.perturbation()  # construct up front: singular A, size mismatches are input errors
    except (NepError, ValueError) as exc:
        return EXIT_CONFIG, "", f"nep: {exc}\n"

    try:
        if args.cmd == "solve":
            out = solve_csv(cfg)
        elif args.cmd == "correct":
            out = correct_csv(cfg, args.h)
        else:
            out = study_csv(cfg)
    except DenominatorNearSingular as exc:
        return EXIT_DENOMINATOR, "", f"nep: {exc}\n"
    except (NepError, ValueError) as exc:
        return EXIT_SOLVER, "", f"nep: {type(exc).__name__}: {exc}\n"
    return 0, out, ""


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    code, out, err = run(argv)
    # all-or-nothing: output is assembled completely before anything is written
    if out:
        sys.stdout.write(out)
    if err:
        sys.stderr.write(err)
    return code


if __name__ == "__main__":
    sys.exit(main())
