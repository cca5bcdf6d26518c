"""Verify every built-in fixture and print a one-line summary per fixture.

    python3 scripts/run_fixtures.py [--tol 1e-9] [--verbose]
"""

import argparse
import time

from qglab.constructors import (
    disjoint_union_fixture,
    group_convolution,
    group_function,
    matrix_fixture,
    pair_groupoid_function,
    quantum_pair_fixture,
)
from qglab.qgroupoid import verify_quantum_groupoid

FIXTURES = {
    **{f"pair({n}) function": (pair_groupoid_function, n) for n in (2, 3, 4)},
    **{f"M_{n} convolution": (matrix_fixture, n) for n in (2, 3, 4)},
    **{f"Z_{m} function": (group_function, m) for m in (2, 3)},
    "Z_3 convolution": (group_convolution, 3),
    "disjoint union function": (disjoint_union_fixture, "function"),
    "disjoint union convolution": (disjoint_union_fixture, "convolution"),
    "quantum pair M_2 (tracial)": (lambda n: quantum_pair_fixture(n, tracial=True), 2),
    "quantum pair M_2 (non-tracial)": (quantum_pair_fixture, 2),
}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tol", type=float, default=1e-9)
    ap.add_argument("--verbose", action="store_true", help="print the full report of each fixture")
    args = ap.parse_args()
    failures = 0
    for name, (make, arg) in FIXTURES.items():
        start = time.perf_counter()
        report = verify_quantum_groupoid(make(arg), tol=args.tol)
        worst = max((c.residual for c in report.checks if c.residual is not None), default=0.0)
        mark = "ok  " if report.verdict else "FAIL"
        print(f"{mark} {name:<32s} checks={len(report.checks):3d} worst={worst:.1e} "
              f"{time.perf_counter() - start:5.2f}s")
        if args.verbose or not report.verdict:
            print(report.to_text())
        failures += not report.verdict
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
