"""Build both models for seeded random groupoids and verify them end to end.

    python3 scripts/random_sweep.py --count 100 --max-size 30 --seed 0
"""

import argparse
import json
import time

import numpy as np

from qglab.constructors import convolution_algebra_model, function_algebra_model
from qglab.groupoids import random_groupoid
from qglab.qgroupoid import verify_quantum_groupoid


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=50)
    ap.add_argument("--max-size", type=int, default=30)
    ap.add_argument("--max-order", type=int, default=4, help="largest cyclic isotropy order")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tol", type=float, default=1e-9)
    ap.add_argument("--json", metavar="PATH", help="write per-groupoid results as JSON lines")
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    rows, failures = [], 0
    start = time.perf_counter()
    for k in range(args.count):
        components = int(rng.integers(1, 4))
        objects = int(rng.integers(1, 4))
        orders = sorted({int(x) for x in rng.integers(1, args.max_order + 1, size=2)})
        G = random_groupoid(components, objects, orders, seed=args.seed * 100003 + k, max_size=args.max_size)
        for build in (function_algebra_model, convolution_algebra_model):
            report = verify_quantum_groupoid(build(G), tol=args.tol)
            worst = max((c.residual for c in report.checks if c.residual is not None), default=0.0)
            failed = [(c.id, c.anchor) for c in report.failed()]
            rows.append({"index": k, "size": len(G), "model": build.__name__,
                         "verdict": report.verdict, "worst_residual": worst, "failed": failed})
            if failed:
                failures += 1
                print(f"FAIL #{k} ({len(G)} elements, {build.__name__}): {failed[0][0]} [{failed[0][1]}]")
    elapsed = time.perf_counter() - start
    worst = max(r["worst_residual"] for r in rows)
    print(f"{args.count} groupoids x 2 models: {len(rows) - failures}/{len(rows)} pass, "
          f"worst residual {worst:.2e}, {elapsed:.1f}s")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            for r in rows:
                fh.write(json.dumps(r) + "\n")
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
