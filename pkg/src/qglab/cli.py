"""Command line entry point ``qgl``.

Exit codes: 0 verified/valid, 1 verification failed or invalid groupoid,
2 unreadable or malformed input, 3 unsupported input (nonabelian isotropy),
4 unknown demo.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from . import constructors as cons
from .algebra import DEFAULT_TOL
from .groupoids import GroupoidParseError, load_groupoid, validate_groupoid
from .qgroupoid import QuantumGroupoidData, verify_quantum_groupoid
from .report import VerificationReport
from .sepid import NoSolution, solve_separability_idempotent, verify_separability
from .serialize import DataFormatError, dumps, load, qgroupoid_to_dict, triple_to_dict
from .weights import T_SAMPLES

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_UNSUPPORTED, EXIT_UNKNOWN_DEMO = 0, 1, 2, 3, 4


@dataclass(frozen=True)
class RunConfig:
    tolerance: float = DEFAULT_TOL
    seed: int = 0
    t_samples: tuple[float, ...] = field(default=T_SAMPLES)
    output_path: Path | None = None
    format: str = "text"

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if not self.t_samples:
            raise ValueError("t_samples must be nonempty")
        if self.format not in ("json", "text"):
            raise ValueError(f"format must be 'json' or 'text', not {self.format!r}")


def default_tolerance() -> float:
    env = os.environ.get("QGL_TOL")
    return float(env) if env else DEFAULT_TOL


def _config(args) -> RunConfig:
    tol = args.tol if getattr(args, "tol", None) is not None else default_tolerance()
    out = getattr(args, "report", None)
    return RunConfig(tolerance=tol, seed=getattr(args, "seed", 0), output_path=Path(out) if out else None,
                     format=getattr(args, "format", "text"))


def _emit(report: VerificationReport, cfg: RunConfig, header: str = "") -> None:
    if cfg.output_path is not None:
        cfg.output_path.write_text(report.to_json() + "\n", encoding="utf-8")
    if cfg.format == "json":
        print(report.to_json())
    else:
        if header:
            print(header)
        print(report.to_text())


def _err(msg: str) -> None:
    print(f"qgl: error: {msg}", file=sys.stderr)


# --------------------------------------------------------------------------
# commands


def cmd_validate_groupoid(args) -> int:
    cfg = _config(args)
    try:
        G = load_groupoid(args.path)
    except (GroupoidParseError, OSError) as exc:
        _err(str(exc))
        return EXIT_INPUT
    report = validate_groupoid(G)
    _emit(report, cfg)
    return EXIT_OK if report.verdict else EXIT_FAIL


def cmd_build(args) -> int:
    try:
        G = load_groupoid(args.path)
    except (GroupoidParseError, OSError) as exc:
        _err(str(exc))
        return EXIT_INPUT
    report = validate_groupoid(G)
    if not report.verdict:
        print(report.to_text(), file=sys.stderr)
        return EXIT_FAIL
    build = cons.function_algebra_model if args.model == "function" else cons.convolution_algebra_model
    try:
        QG = build(G)
    except cons.UnsupportedIsotropy as exc:
        _err(f"unsupported input: {exc}")
        return EXIT_UNSUPPORTED
    text = dumps(qgroupoid_to_dict(QG))
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _check_triple(B, C, R, nu, cfg: RunConfig) -> tuple[VerificationReport, str]:
    checks, _ = verify_separability(B, C, R, nu, tol=cfg.tolerance, seed=cfg.seed, t_samples=cfg.t_samples)
    report = VerificationReport(checks)
    note = ""
    if "sepid.solve" in report and not report["sepid.solve"].passed:
        sol = solve_separability_idempotent(B, C, R, nu, tol=cfg.tolerance)
        if isinstance(sol, NoSolution):
            note = sol.explain()
    return report, note


def cmd_check(args) -> int:
    cfg = _config(args)
    try:
        obj = load(args.path)
    except (DataFormatError, OSError) as exc:
        _err(str(exc))
        return EXIT_INPUT
    if isinstance(obj, QuantumGroupoidData):
        report = verify_quantum_groupoid(obj, tol=cfg.tolerance, seed=cfg.seed, t_samples=cfg.t_samples)
        _emit(report, cfg, header=obj.name)
    else:
        B, C, R, nu, _ = obj
        report, note = _check_triple(B, C, R, nu, cfg)
        _emit(report, cfg)
        if note:
            print(note, file=sys.stderr)
    return EXIT_OK if report.verdict else EXIT_FAIL


DEMOS: dict[str, tuple[str, Callable]] = {
    "pair-groupoid": ("functions on the pair groupoid of n points", lambda n: cons.pair_groupoid_function(n or 3)),
    "matrix-algebra": ("M_n with Delta(e_ij) = e_ij (x) e_ij", lambda n: cons.matrix_fixture(n or 2)),
    "group": ("functions on Z_n", lambda n: cons.group_function(n or 2)),
    "group-algebra": ("group algebra of Z_n", lambda n: cons.group_convolution(n or 3)),
    "disjoint-union": ("Z_2 + pair groupoid(2), function model", lambda n: cons.disjoint_union_fixture()),
    "quantum-pair": ("C (x) B over M_n with a non-tracial base weight", lambda n: cons.quantum_pair_fixture(n or 2)),
    "matrix-base": ("separability triple M_n, nu = n Tr, R = transpose", lambda n: cons.matrix_base_triple(n or 2)),
    "bad-weights": ("separability triple C^2, nu = (1, 2), R = id (no solution)", lambda n: cons.bad_weights_triple()),
    "bad-weights-assembly": ("pair groupoid(2) with base weight (1, 2)", lambda n: cons.bad_weights_assembly()),
}


def cmd_demo(args) -> int:
    if args.name not in DEMOS:
        _err(f"unknown demo {args.name!r}; available: {', '.join(DEMOS)}")
        return EXIT_UNKNOWN_DEMO
    cfg = _config(args)
    desc, make = DEMOS[args.name]
    obj = make(args.n)
    if isinstance(obj, QuantumGroupoidData):
        report = verify_quantum_groupoid(obj, tol=cfg.tolerance, seed=cfg.seed, t_samples=cfg.t_samples)
        _emit(report, cfg, header=f"{args.name}: {desc}")
        if args.output:
            Path(args.output).write_text(dumps(qgroupoid_to_dict(obj)), encoding="utf-8")
    else:
        B, C, R, nu = obj
        report, note = _check_triple(B, C, R, nu, cfg)
        _emit(report, cfg, header=f"{args.name}: {desc}")
        if note:
            print(note, file=sys.stderr if cfg.format == "json" else sys.stdout)
        if args.output:
            sol = solve_separability_idempotent(B, C, R, nu, tol=cfg.tolerance)
            E = None if isinstance(sol, NoSolution) else sol
            Path(args.output).write_text(dumps(triple_to_dict(B, C, R, nu, E)), encoding="utf-8")
    return EXIT_OK if report.verdict else EXIT_FAIL


# --------------------------------------------------------------------------
# parser


def _positive_float(s: str) -> float:
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qgl", description="Build and verify finite quantum groupoids.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, report=True):
        sp.add_argument("--tol", type=_positive_float, default=None,
                        help=f"residual tolerance (default: $QGL_TOL or {DEFAULT_TOL:g})")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--format", choices=("json", "text"), default="text")
        if report:
            sp.add_argument("--report", metavar="PATH", help="also write the JSON report to PATH")

    sp = sub.add_parser("validate-groupoid", help="check the groupoid axioms of a JSON table")
    sp.add_argument("path")
    common(sp)
    sp.set_defaults(func=cmd_validate_groupoid)

    sp = sub.add_parser("build", help="assemble quantum groupoid data from a groupoid table")
    sp.add_argument("path")
    sp.add_argument("--model", choices=("function", "convolution"), default="function")
    sp.add_argument("-o", "--output", metavar="PATH")
    sp.set_defaults(func=cmd_build)

    sp = sub.add_parser("check", help="verify serialized quantum groupoid data or a separability triple")
    sp.add_argument("path")
    common(sp)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("demo", help="build and verify a named example",
                        description="Available demos: " + "; ".join(f"{k} ({v[0]})" for k, v in DEMOS.items()))
    sp.add_argument("name")
    sp.add_argument("--n", type=int, default=None, help="size parameter where the demo has one")
    sp.add_argument("-o", "--output", metavar="PATH", help="write the demo data as JSON")
    common(sp)
    sp.set_defaults(func=cmd_demo)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        _err(str(exc))
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
